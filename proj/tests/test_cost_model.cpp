// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "fastssl/cost_model.hpp"

using namespace fastssl;

TEST(CostModel, RatioProduct) {
  const FlopsProfile profile({{200, 1.0}, {224, 1.4}}, 6.0);
  const auto rep = compare(TrainingPlan::constant(170, 224),
                           TrainingPlan::constant(100, 200), profile);
  EXPECT_EQ(rep.steps_ratio, 1.7);
  EXPECT_DOUBLE_EQ(rep.per_step_ratio, 1.4);
  EXPECT_DOUBLE_EQ(rep.combined_speedup, 2.38);
  EXPECT_DOUBLE_EQ(rep.combined_speedup, rep.steps_ratio * rep.per_step_ratio);
  EXPECT_EQ(rep.baseline_flops, 170.0 * (6.0 * 1.4));
  EXPECT_EQ(rep.efficient_flops, 600.0);
}

TEST(CostModel, PlanFlopsBySummation) {
  const FlopsProfile profile({{8, 3.0}, {16, 10.0}, {32, 40.0}}, 6.0);
  TrainingPlan plan;
  plan.resolutions = {32, 32, 16, 16, 16, 32};
  plan.samples_per_step = 4;
  double oracle = 0.0;
  for (int r : plan.resolutions)
    oracle += 4 * 6.0 * (r == 32 ? 40.0 : 10.0);
  EXPECT_EQ(plan_flops(plan, profile), oracle);

  plan.selection = PlanSelection{4, 8};
  EXPECT_EQ(plan_flops(plan, profile), oracle + 6 * 4 * 4 * 3.0);
  plan.selection = PlanSelection{0, 8};
  EXPECT_EQ(plan_flops(plan, profile), oracle);
}

TEST(CostModel, QuadraticProfile) {
  const auto q = FlopsProfile::quadratic(2.0);
  EXPECT_TRUE(q.is_analytic());
  EXPECT_EQ(q.forward_flops(10), 200.0);
  const auto rep = compare(TrainingPlan::constant(10, 224), TrainingPlan::constant(10, 112), q);
  EXPECT_EQ(rep.combined_speedup, 4.0);
  EXPECT_EQ(q.scaled(3.0).forward_flops(10), 600.0);
}

TEST(CostModel, ProfileErrors) {
  EXPECT_THROW(FlopsProfile({{16, 5.0}, {32, 4.0}}, 6.0), ProfileError);
  EXPECT_THROW(FlopsProfile({{16, -1.0}}, 6.0), ProfileError);
  EXPECT_THROW(FlopsProfile({{16, 1.0}}, 0.0), ProfileError);
  const FlopsProfile p({{16, 1.0}}, 6.0);
  EXPECT_THROW(p.forward_flops(24), ProfileError);
  EXPECT_THROW(compare(TrainingPlan{}, TrainingPlan::constant(1, 16), p), ProfileError);
  // Fallback extrapolates quadratically from the nearest entry.
  const FlopsProfile fb({{16, 4.0}}, 6.0, true);
  EXPECT_EQ(fb.forward_flops(24), 9.0);
}

TEST(CostModel, ReportFormats) {
  const auto rep = compare(TrainingPlan::constant(2, 16), TrainingPlan::constant(1, 16),
                           FlopsProfile({{16, 1.0}}, 6.0));
  const auto j = nlohmann::json::parse(format_report_json(rep));
  EXPECT_EQ(j["combined_speedup"].get<double>(), 2.0);
  EXPECT_EQ(j["baseline_steps"].get<int>(), 2);
  EXPECT_NE(format_report_table(rep).find("combined speedup"), std::string::npos);
}
