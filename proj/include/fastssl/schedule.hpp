// SPDX-License-Identifier: Apache-2.0
/**
 * @file   schedule.hpp
 * @brief  Closed-form learning-rate / momentum schedules.
 *
 * Steps are discrete iteration indices in [0, total_steps]. Evaluating at
 * t == total_steps is defined and returns the limit values, so exporters can
 * emit total_steps + 1 rows.
 *
 * All functions are pure and may be called concurrently.
 */
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fastssl {

enum class ScheduleKind {
  CosineAnnealing,
  CosineWarmup,
  OneCycle,
  FixedOneCycle,
};

std::string_view to_string(ScheduleKind kind);
/// Accepts "cosine", "cosine_warmup", "one_cycle", "f1clr" (case-sensitive).
ScheduleKind parse_schedule_kind(std::string_view name);

struct ScheduleConfig {
  ScheduleKind kind = ScheduleKind::FixedOneCycle;
  std::int64_t total_steps = 1;
  std::int64_t warmup_steps = 0;
  double phase_fraction = 0.3; ///< OneCycle only
  double lr_max = 0.1;
  double beta_low = 0.85;
  double beta_high = 0.95;
  /// Constant momentum reported by the cosine schedules.
  double momentum = 0.9;

  /// Throws ConfigError on any violated invariant for the selected kind.
  void validate() const;
};

struct SchedulePoint {
  std::int64_t step = 0;
  double lr = 0.0;
  double momentum = 0.0;
};

double cosine_annealing(std::int64_t t, const ScheduleConfig &cfg);
double cosine_warmup(std::int64_t t, const ScheduleConfig &cfg);
SchedulePoint one_cycle(std::int64_t t, const ScheduleConfig &cfg);
SchedulePoint fixed_one_cycle(std::int64_t t, const ScheduleConfig &cfg);

/// Dispatches on cfg.kind. Cosine kinds report cfg.momentum.
SchedulePoint evaluate_schedule(std::int64_t t, const ScheduleConfig &cfg);

// Branch formulas, exposed so callers (and tests) can evaluate both sides of
// a boundary. `phase_len` is the length of the rising phase.
namespace branch {
double rising_lr(double t, double phase_len, double lr_max);
double falling_lr(double t, double phase_len, double total, double lr_max);
double rising_phase_momentum(double t, double phase_len, double lo, double hi);
double falling_phase_momentum(double t, double phase_len, double total,
                              double lo, double hi);
double linear_warmup_lr(double t, double warmup, double lr_max);
} // namespace branch

struct NoiseScaleReport {
  double noise_scale = 0.0;
  double lr = 0.0;
  std::int64_t dataset_size = 0;
  std::int64_t batch_size = 0;
  double momentum = 0.0;
};

/// Gradient-noise scale g = lr * |D| / (b * (1 - momentum)).
NoiseScaleReport noise_scale(double lr, std::int64_t dataset_size,
                             std::int64_t batch_size, double momentum);

} // namespace fastssl
