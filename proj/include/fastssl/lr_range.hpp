// SPDX-License-Identifier: Apache-2.0
/**
 * @file   lr_range.hpp
 * @brief  Learning-rate range test with automatic min/max detection.
 *
 * The sweep raises the learning rate geometrically from lr_lo to lr_hi.
 * min_lr is the first rate at which the smoothed validation loss has stayed
 * below (1 - decrease_delta) x its initial value for `persistence`
 * consecutive steps. Divergence is the first step whose smoothed training
 * loss exceeds divergence_factor x its running minimum; max_lr is the rate
 * at which the raw training loss bottomed out before that point.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

namespace fastssl {

struct RangeTestConfig {
  double lr_lo = 1e-3;
  double lr_hi = 1.0;
  std::int64_t sweep_steps = 200;
  std::int64_t val_batch_size = 256;
  double smoothing_coefficient = 0.05;
  double divergence_factor = 2.0;
  double decrease_delta = 0.01;
  int persistence = 5;
  /// Added to both losses before detection; relative thresholds need a
  /// nonnegative loss (SimSiam-style losses live in [-1, 1]).
  double loss_offset = 0.0;

  void validate() const;
};

struct RangeTracePoint {
  std::int64_t step = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct RangeTestResult {
  double min_lr = 0.0;
  double max_lr = 0.0;
  bool min_detected = false;
  bool diverged = false;
  /// Step at which divergence (or a non-finite loss) was detected, else -1.
  std::int64_t divergence_step = -1;
  std::vector<RangeTracePoint> trace;
};

/// Geometric interpolation lr_lo * (lr_hi / lr_lo)^(t / (sweep_steps - 1)).
double lr_sweep(std::int64_t t, const RangeTestConfig &cfg);

/// Trainer contract: take one step at `lr`, then return the (train_loss,
/// val_loss) measured after that step.
using RangeTrainer = std::function<std::pair<double, double>(double lr)>;

RangeTestResult run_range_test(const RangeTrainer &trainer,
                               const RangeTestConfig &cfg);

/// CSV with header `step,lr,train_loss,val_loss`.
void write_range_trace(std::ostream &out, const RangeTestResult &result);

} // namespace fastssl
