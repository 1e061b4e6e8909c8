// SPDX-License-Identifier: Apache-2.0
/**
 * @file   optimizer.hpp
 * @brief  SGD with momentum and coupled L2 weight decay.
 *
 *   mu    <- momentum * mu - lr * (grad + weight_decay * theta)
 *   theta <- theta + mu
 */
#pragma once

#include "fastssl/sim/model.hpp"

namespace fastssl::sim {

template <typename T> struct OptimizerState {
  ModelParams<T> params;
  ModelParams<T> momentum_buffer;
  double weight_decay = 0.0;

  OptimizerState() = default;
  OptimizerState(ModelParams<T> p, double wd)
      : params(std::move(p)), momentum_buffer(params.zeros_like()),
        weight_decay(wd) {}
};

template <typename T>
void sgd_momentum_step(OptimizerState<T> &state, const ModelParams<T> &grads,
                       double lr, double momentum);

} // namespace fastssl::sim
