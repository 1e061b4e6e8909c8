// SPDX-License-Identifier: Apache-2.0
/**
 * @file   gradcheck.hpp
 * @brief  Central finite-difference check of the manual backward pass.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "fastssl/sim/model.hpp"

namespace fastssl::sim {

enum class GradObjective {
  /// Symmetric negative-cosine loss; targets frozen at the unperturbed
  /// parameters, which is what stop-gradient means numerically.
  SimSiam,
  /// Fixed random linear readout of the predictions, sum_b r . p_b.
  LinearReadout,
};

struct GradCheckOptions {
  GradObjective objective = GradObjective::SimSiam;
  /// Parameters to probe; empty probes all of them.
  std::vector<std::size_t> params;
  /// Entries sampled per tensor (all entries when the tensor is smaller).
  std::size_t samples_per_tensor = 12;
  double step = 1e-5;
  /// Denominator floor for the relative error.
  double floor = 1e-6;
  std::uint64_t seed = 7;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t worst_param = 0;
  /// Largest |gradient| produced by backpropagating only the loss's target
  /// (z) gradients. Stop-gradient makes this exactly zero.
  double target_path_max_abs = 0.0;
};

/// `view_i` and `view_j` are [B, C, H, W] batches of paired views.
GradCheckReport gradient_check(const ModelParams<double> &params,
                               const Tensor<double> &view_i,
                               const Tensor<double> &view_j,
                               const GradCheckOptions &opts = {});

} // namespace fastssl::sim
