// SPDX-License-Identifier: Apache-2.0
/**
 * @file   cost_model.hpp
 * @brief  FLOPs accounting for training plans.
 *
 * Counting convention: one training step over one sample costs
 * `iteration_cost_ratio` forward passes at the step's resolution (default 6:
 * two views, backward counted as twice the forward). Hard-augment selection
 * adds m forward passes at the selection resolution.
 */
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fastssl/hard_augment.hpp"

namespace fastssl {

class FlopsProfile {
public:
  FlopsProfile() = default;
  FlopsProfile(std::map<int, double> forward_flops, double iteration_cost_ratio,
               bool quadratic_fallback = false);

  /// Analytic profile FLOPs(r) = k * r^2 that answers any resolution.
  static FlopsProfile quadratic(double k, double iteration_cost_ratio = 6.0);

  /// Forward FLOPs for one sample at `resolution`.
  double forward_flops(int resolution) const;

  double iteration_cost_ratio() const { return iteration_cost_ratio_; }
  const std::map<int, double> &entries() const { return entries_; }
  bool is_analytic() const { return analytic_k_.has_value(); }

  /// Multiplies every entry (and the analytic coefficient) by `factor`.
  FlopsProfile scaled(double factor) const;

private:
  std::map<int, double> entries_;
  double iteration_cost_ratio_ = 6.0;
  bool quadratic_fallback_ = false;
  std::optional<double> analytic_k_;
};

struct PlanSelection {
  /// 0 disables selection.
  int num_positives = 0;
  int selection_resolution = 0;
};

struct TrainingPlan {
  std::vector<int> resolutions; ///< one entry per step
  /// Samples processed per step (batch size); 1 gives per-sample units.
  std::int64_t samples_per_step = 1;
  std::optional<PlanSelection> selection;

  std::int64_t total_steps() const {
    return static_cast<std::int64_t>(resolutions.size());
  }

  static TrainingPlan constant(std::int64_t steps, int resolution,
                               std::int64_t samples_per_step = 1);
};

struct CostReport {
  double baseline_flops = 0.0;
  double efficient_flops = 0.0;
  std::int64_t baseline_steps = 0;
  std::int64_t efficient_steps = 0;
  double steps_ratio = 1.0;
  double per_step_ratio = 1.0;
  double combined_speedup = 1.0;
  std::string convention;
};

double plan_flops(const TrainingPlan &plan, const FlopsProfile &profile);

CostReport compare(const TrainingPlan &baseline, const TrainingPlan &efficient,
                   const FlopsProfile &profile);

std::string format_report_table(const CostReport &report);
std::string format_report_json(const CostReport &report);

} // namespace fastssl
