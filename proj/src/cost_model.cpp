// SPDX-License-Identifier: Apache-2.0
#include "fastssl/cost_model.hpp"

#include <cmath>
#include <cstdio>
#include <iterator>

#include <nlohmann/json.hpp>

#include "fastssl/error.hpp"

namespace fastssl {

FlopsProfile::FlopsProfile(std::map<int, double> forward_flops,
                           double iteration_cost_ratio,
                           bool quadratic_fallback)
    : entries_(std::move(forward_flops)),
      iteration_cost_ratio_(iteration_cost_ratio),
      quadratic_fallback_(quadratic_fallback) {
  if (!(iteration_cost_ratio_ > 0.0))
    throw ProfileError("iteration cost ratio must be positive");
  double prev = 0.0;
  for (const auto &[res, flops] : entries_) {
    if (res <= 0 || !(flops > 0.0))
      throw ProfileError("profile entries must be positive");
    if (flops <= prev)
      throw ProfileError("profile FLOPs must increase strictly with resolution");
    prev = flops;
  }
}

FlopsProfile FlopsProfile::quadratic(double k, double iteration_cost_ratio) {
  if (!(k > 0.0))
    throw ProfileError("quadratic coefficient must be positive");
  FlopsProfile p({}, iteration_cost_ratio);
  p.analytic_k_ = k;
  return p;
}

double FlopsProfile::forward_flops(int resolution) const {
  if (resolution <= 0)
    throw ProfileError("resolution must be positive");
  if (analytic_k_) {
    const double r = resolution;
    return *analytic_k_ * r * r;
  }
  if (auto it = entries_.find(resolution); it != entries_.end())
    return it->second;
  if (!quadratic_fallback_ || entries_.empty())
    throw ProfileError("no FLOPs entry for resolution " +
                       std::to_string(resolution));
  // Scale the closest measured entry quadratically.
  auto hi = entries_.lower_bound(resolution);
  auto nearest = hi;
  if (hi == entries_.end()) {
    nearest = std::prev(hi);
  } else if (hi != entries_.begin()) {
    auto lo = std::prev(hi);
    if (resolution - lo->first < hi->first - resolution)
      nearest = lo;
  }
  const double ratio =
      static_cast<double>(resolution) / static_cast<double>(nearest->first);
  return nearest->second * ratio * ratio;
}

FlopsProfile FlopsProfile::scaled(double factor) const {
  FlopsProfile p = *this;
  for (auto &[res, flops] : p.entries_)
    flops *= factor;
  if (p.analytic_k_)
    *p.analytic_k_ *= factor;
  return p;
}

TrainingPlan TrainingPlan::constant(std::int64_t steps, int resolution,
                                    std::int64_t samples_per_step) {
  TrainingPlan p;
  p.resolutions.assign(static_cast<std::size_t>(steps), resolution);
  p.samples_per_step = samples_per_step;
  return p;
}

double plan_flops(const TrainingPlan &plan, const FlopsProfile &profile) {
  if (plan.samples_per_step < 1)
    throw ProfileError("samples_per_step must be positive");
  const double c = profile.iteration_cost_ratio();
  const double n = static_cast<double>(plan.samples_per_step);
  double selection = 0.0;
  if (plan.selection && plan.selection->num_positives > 0)
    selection = static_cast<double>(plan.selection->num_positives) *
                profile.forward_flops(plan.selection->selection_resolution);

  // Multiply per run of equal resolutions instead of adding step by step, so
  // long plans do not accumulate rounding error.
  double total = 0.0;
  const auto &res = plan.resolutions;
  for (std::size_t i = 0; i < res.size();) {
    std::size_t j = i;
    while (j < res.size() && res[j] == res[i])
      ++j;
    total += static_cast<double>(j - i) * (n * (c * profile.forward_flops(res[i]) + selection));
    i = j;
  }
  return total;
}

CostReport compare(const TrainingPlan &baseline, const TrainingPlan &efficient,
                   const FlopsProfile &profile) {
  if (baseline.total_steps() < 1 || efficient.total_steps() < 1)
    throw ProfileError("plans must contain at least one step");
  CostReport r;
  r.baseline_flops = plan_flops(baseline, profile);
  r.efficient_flops = plan_flops(efficient, profile);
  r.baseline_steps = baseline.total_steps();
  r.efficient_steps = efficient.total_steps();
  r.steps_ratio = static_cast<double>(r.baseline_steps) /
                  static_cast<double>(r.efficient_steps);
  r.per_step_ratio =
      (r.baseline_flops / static_cast<double>(r.baseline_steps)) /
      (r.efficient_flops / static_cast<double>(r.efficient_steps));
  r.combined_speedup = r.baseline_flops / r.efficient_flops;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "per-step cost = %g x forward(r_t) + m x forward(r_sel); "
                "backward counted as 2 x forward",
                profile.iteration_cost_ratio());
  r.convention = buf;
  return r;
}

std::string format_report_table(const CostReport &r) {
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "%-18s %20s %20s\n"
                "%-18s %20.6e %20.6e\n"
                "%-18s %20lld %20lld\n"
                "%-18s %20.6f\n"
                "%-18s %20.6f\n"
                "%-18s %20.6f\n"
                "convention: %s\n",
                "", "baseline", "efficient", "FLOPs", r.baseline_flops,
                r.efficient_flops, "steps",
                static_cast<long long>(r.baseline_steps),
                static_cast<long long>(r.efficient_steps), "steps ratio",
                r.steps_ratio, "per-step ratio", r.per_step_ratio,
                "combined speedup", r.combined_speedup, r.convention.c_str());
  return buf;
}

std::string format_report_json(const CostReport &r) {
  nlohmann::ordered_json j;
  j["baseline_flops"] = r.baseline_flops;
  j["efficient_flops"] = r.efficient_flops;
  j["baseline_steps"] = r.baseline_steps;
  j["efficient_steps"] = r.efficient_steps;
  j["steps_ratio"] = r.steps_ratio;
  j["per_step_ratio"] = r.per_step_ratio;
  j["combined_speedup"] = r.combined_speedup;
  j["convention"] = r.convention;
  return j.dump();
}

} // namespace fastssl
