// SPDX-License-Identifier: Apache-2.0
/**
 * @file   curriculum.hpp
 * @brief  Progressive resolution staircase and augmentation-magnitude ramp.
 *
 * During warm-up the plan trains at full resolution. Afterwards the
 * remaining steps are split into `num_stages` equal stages whose resolution
 * climbs from res_min to res_max in multiples of `quantum`. The augmentation
 * magnitude ramps linearly over the whole run, warm-up included.
 */
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fastssl {

struct ProgressivePlan {
  std::int64_t total_steps = 1;
  std::int64_t warmup_steps = 0;
  int res_min = 96;
  int res_max = 224;
  int quantum = 32;
  /// 0 selects the default (res_max - res_min) / quantum + 1.
  int num_stages = 0;
  double mag_min = 4.0;
  double mag_max = 6.0;

  void validate() const;
  int stages() const;
};

struct CurriculumPoint {
  std::int64_t step = 0;
  int resolution = 0;
  double magnitude = 0.0;
};

/// Nearest multiple of `quantum`, ties rounded up.
int round_to_quantum(double value, int quantum);

int resolution_at(std::int64_t t, const ProgressivePlan &plan);
double magnitude_at(std::int64_t t, const ProgressivePlan &plan);
CurriculumPoint curriculum_at(std::int64_t t, const ProgressivePlan &plan);

/// Resolution of every step in [0, total_steps).
std::vector<int> resolution_sequence(const ProgressivePlan &plan);

/// Mean of the per-step speedups (r_max / r_t)^2 over [0, total_steps).
double speedup_eq9(const ProgressivePlan &plan);
/// Same mean over an explicit per-step sequence measured against `res_max`.
double speedup_eq9(std::span<const int> resolutions, int res_max);

/// Ratio of sums: total_steps * r_max^2 / sum_t r_t^2.
double cost_ratio(const ProgressivePlan &plan);
double cost_ratio(std::span<const int> resolutions, int res_max);

} // namespace fastssl
