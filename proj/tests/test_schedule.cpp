// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fastssl/error.hpp"
#include "fastssl/schedule.hpp"

using namespace fastssl;

namespace {

ScheduleConfig f1clr(std::int64_t total, std::int64_t warmup, double lr = 0.2) {
  ScheduleConfig c;
  c.kind = ScheduleKind::FixedOneCycle;
  c.total_steps = total;
  c.warmup_steps = warmup;
  c.lr_max = lr;
  return c;
}

// Straight transcription of the two-branch 1-cycle formulas.
double oracle_lr(double t, double tw, double L, double emax) {
  if (t < tw)
    return emax - 0.5 * emax * (std::cos(t * std::numbers::pi / tw) + 1.0);
  return 0.5 * emax * (std::cos((t - tw) * std::numbers::pi / (L - tw)) + 1.0);
}

} // namespace

TEST(Schedule, CosineAnnealingEndpoints) {
  ScheduleConfig c;
  c.kind = ScheduleKind::CosineAnnealing;
  c.total_steps = 10;
  c.lr_max = 0.05;
  EXPECT_EQ(cosine_annealing(0, c), 0.05);
  EXPECT_EQ(cosine_annealing(10, c), 0.0);
  EXPECT_NEAR(cosine_annealing(5, c), 0.025, 1e-15);
  EXPECT_EQ(evaluate_schedule(3, c).momentum, 0.9);
}

TEST(Schedule, LinearWarmupMidpointAndContinuity) {
  ScheduleConfig c;
  c.kind = ScheduleKind::CosineWarmup;
  c.total_steps = 100;
  c.warmup_steps = 10;
  c.lr_max = 0.16;
  EXPECT_NEAR(cosine_warmup(5, c), 0.08, 1e-15);
  EXPECT_EQ(cosine_warmup(10, c), 0.16);
  EXPECT_EQ(branch::linear_warmup_lr(10, 10, 0.16), 0.16);
  EXPECT_EQ(cosine_warmup(100, c), 0.0);
}

TEST(Schedule, OneCycleKeyPoints) {
  ScheduleConfig c;
  c.kind = ScheduleKind::OneCycle;
  c.total_steps = 100;
  c.phase_fraction = 0.3;
  c.lr_max = 0.1;
  auto p0 = one_cycle(0, c);
  EXPECT_EQ(p0.lr, 0.0);
  EXPECT_EQ(p0.momentum, 0.95);
  auto pk = one_cycle(30, c);
  EXPECT_EQ(pk.lr, 0.1);
  EXPECT_EQ(pk.momentum, 0.85);
  auto pl = one_cycle(100, c);
  EXPECT_EQ(pl.lr, 0.0);
  EXPECT_EQ(pl.momentum, 0.95);
}

TEST(Schedule, FixedOneCycleExamples) {
  const auto c = f1clr(400, 80, 0.2);
  EXPECT_NEAR(fixed_one_cycle(40, c).lr, 0.1, 1e-15);
  const auto peak = fixed_one_cycle(80, c);
  EXPECT_EQ(peak.lr, 0.2);
  EXPECT_EQ(peak.momentum, 0.85);
  EXPECT_EQ(fixed_one_cycle(0, c).momentum, 0.95);
  EXPECT_EQ(fixed_one_cycle(400, c).momentum, 0.95);
  EXPECT_EQ(fixed_one_cycle(400, c).lr, 0.0);
}

TEST(Schedule, FixedOneCycleMatchesFormulaOracle) {
  const auto c = f1clr(333, 47, 0.37);
  for (std::int64_t t = 0; t <= 333; ++t)
    EXPECT_NEAR(fixed_one_cycle(t, c).lr, oracle_lr(t, 47, 333, 0.37), 1e-15)
        << "t=" << t;
}

TEST(Schedule, WarmupIndependentOfLength) {
  const auto a = f1clr(160, 80), b = f1clr(400, 80);
  for (std::int64_t t = 0; t <= 80; ++t) {
    EXPECT_EQ(fixed_one_cycle(t, a).lr, fixed_one_cycle(t, b).lr);
    EXPECT_EQ(fixed_one_cycle(t, a).momentum, fixed_one_cycle(t, b).momentum);
  }
}

TEST(Schedule, RandomizedPropertiesAllKinds) {
  std::mt19937_64 gen(42);
  std::uniform_int_distribution<std::int64_t> len(5, 3000);
  std::uniform_real_distribution<double> lr(1e-3, 2.0), u(0.0, 1.0);
  for (auto kind : {ScheduleKind::CosineAnnealing, ScheduleKind::CosineWarmup,
                    ScheduleKind::OneCycle, ScheduleKind::FixedOneCycle}) {
    for (int trial = 0; trial < 20; ++trial) {
      ScheduleConfig c;
      c.kind = kind;
      c.total_steps = len(gen);
      c.warmup_steps = 1 + static_cast<std::int64_t>(u(gen) * (c.total_steps - 2));
      c.lr_max = lr(gen);
      c.phase_fraction = 0.1 + 0.8 * u(gen);
      c.beta_low = 0.8 + 0.1 * u(gen);
      c.beta_high = c.beta_low + 0.09 * u(gen);
      ASSERT_NO_THROW(c.validate());
      double prev_lr = -1.0;
      for (std::int64_t t = 0; t <= c.total_steps; ++t) {
        const auto p = evaluate_schedule(t, c);
        ASSERT_GE(p.lr, 0.0);
        ASSERT_LE(p.lr, c.lr_max);
        if (kind == ScheduleKind::OneCycle || kind == ScheduleKind::FixedOneCycle) {
          ASSERT_GE(p.momentum, c.beta_low);
          ASSERT_LE(p.momentum, c.beta_high);
        }
        if (kind == ScheduleKind::CosineAnnealing && t > 0) {
          ASSERT_LE(p.lr, prev_lr);
        }
        prev_lr = p.lr;
      }
    }
  }
}

TEST(Schedule, Errors) {
  EXPECT_THROW(f1clr(10, 10).validate(), ConfigError);
  EXPECT_THROW(fixed_one_cycle(0, f1clr(10, 10)), ConfigError);
  EXPECT_THROW(fixed_one_cycle(11, f1clr(10, 5)), RangeError);
  EXPECT_THROW(fixed_one_cycle(-1, f1clr(10, 5)), RangeError);
  ScheduleConfig c;
  c.kind = ScheduleKind::OneCycle;
  c.total_steps = 10;
  c.phase_fraction = 1.0;
  EXPECT_THROW(one_cycle(0, c), ConfigError);
  auto bad = f1clr(10, 5);
  bad.beta_low = 0.97;
  bad.beta_high = 0.85;
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(parse_schedule_kind("linear"), ConfigError);
}

TEST(Schedule, KindNamesRoundTrip) {
  for (auto k : {ScheduleKind::CosineAnnealing, ScheduleKind::CosineWarmup,
                 ScheduleKind::OneCycle, ScheduleKind::FixedOneCycle})
    EXPECT_EQ(parse_schedule_kind(to_string(k)), k);
}

TEST(NoiseScale, Formula) {
  // 0.1 * 10000 / (128 * 0.1) = 1000 / 12.8
  EXPECT_NEAR(noise_scale(0.1, 10000, 128, 0.9).noise_scale, 78.125, 1e-12);
  EXPECT_DOUBLE_EQ(noise_scale(0.1, 10000, 128, 0.0).noise_scale, 0.1 * 10000 / 128.0);
  const double g1 = noise_scale(0.05, 5000, 64, 0.85).noise_scale;
  const double g2 = noise_scale(0.05, 5000, 128, 0.85).noise_scale;
  EXPECT_DOUBLE_EQ(g1, 2.0 * g2);
  EXPECT_DOUBLE_EQ(noise_scale(0.1, 5000, 64, 0.85).noise_scale, 2.0 * g1);
  EXPECT_THROW(noise_scale(0.1, 100, 10, 1.0), NumericError);
  EXPECT_THROW(noise_scale(0.1, 100, 0, 0.5), ConfigError);
}
