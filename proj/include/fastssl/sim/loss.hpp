// SPDX-License-Identifier: Apache-2.0
/**
 * @file   loss.hpp
 * @brief  Symmetric negative-cosine loss with stop-gradient targets.
 *
 *   L = -1/2 [cos(p_i, sg(z_j)) + cos(p_j, sg(z_i))]
 *
 * No gradient is ever produced for the z arguments.
 */
#pragma once

#include <span>

#include "fastssl/sim/tensor.hpp"

namespace fastssl::sim {

template <typename T> T cosine(std::span<const T> a, std::span<const T> b);

/// Loss for one sample; throws NumericError on a zero-norm vector.
template <typename T>
T simsiam_loss(std::span<const T> z_i, std::span<const T> p_i,
               std::span<const T> z_j, std::span<const T> p_j);

template <typename T> struct PairLossResult {
  T loss = 0;        ///< mean over the batch
  Tensor<T> grad_p_i; ///< dL/dp_i
  Tensor<T> grad_p_j; ///< dL/dp_j
  /// dL/dz_i and dL/dz_j: always zero because targets are stop-gradient.
  Tensor<T> grad_z_i;
  Tensor<T> grad_z_j;
};

/// Batch-mean loss over rows of [B, d] tensors with gradients w.r.t. p only.
template <typename T>
PairLossResult<T> simsiam_batch_loss(const Tensor<T> &z_i, const Tensor<T> &p_i,
                                     const Tensor<T> &z_j,
                                     const Tensor<T> &p_j);

} // namespace fastssl::sim
