// SPDX-License-Identifier: Apache-2.0
#include "fastssl/sim/optimizer.hpp"

#include <cmath>
#include <string>

namespace fastssl::sim {

template <typename T>
void sgd_momentum_step(OptimizerState<T> &state, const ModelParams<T> &grads,
                       double lr, double momentum) {
  for (std::size_t id = 0; id < kNumParams; ++id) {
    const std::string name(param_name(id));
    check_same_shape(state.params[id], grads[id], name);
    check_same_shape(state.params[id], state.momentum_buffer[id], name);
    for (const T g : grads[id].data)
      if (!std::isfinite(g))
        throw NumericError("non-finite gradient for " + name);
  }
  const T beta = static_cast<T>(momentum);
  const T eta = static_cast<T>(lr);
  const T wd = static_cast<T>(state.weight_decay);
  for (std::size_t id = 0; id < kNumParams; ++id) {
    auto &theta = state.params[id].data;
    auto &mu = state.momentum_buffer[id].data;
    const auto &g = grads[id].data;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      mu[k] = beta * mu[k] - eta * (g[k] + wd * theta[k]);
      theta[k] += mu[k];
    }
  }
}

template void sgd_momentum_step<float>(OptimizerState<float> &,
                                       const ModelParams<float> &, double,
                                       double);
template void sgd_momentum_step<double>(OptimizerState<double> &,
                                        const ModelParams<double> &, double,
                                        double);

} // namespace fastssl::sim
