// SPDX-License-Identifier: Apache-2.0
#include "fastssl/sim/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fastssl/sim/loss.hpp"

namespace fastssl::sim {

namespace {

struct Objective {
  GradObjective kind;
  Tensor<double> readout; // LinearReadout weights, [B, d]
  Tensor<double> target_i, target_j; // frozen z for SimSiam

  double value(const ModelParams<double> &params, const Tensor<double> &vi,
               const Tensor<double> &vj) const {
    const auto oi = forward(params, vi);
    if (kind == GradObjective::LinearReadout) {
      double s = 0.0;
      for (std::size_t k = 0; k < oi.p.size(); ++k)
        s += readout[k] * oi.p[k];
      return s;
    }
    const auto oj = forward(params, vj);
    return simsiam_batch_loss(target_i, oi.p, target_j, oj.p).loss;
  }
};

} // namespace

GradCheckReport gradient_check(const ModelParams<double> &params,
                               const Tensor<double> &view_i,
                               const Tensor<double> &view_j,
                               const GradCheckOptions &opts) {
  GradCheckReport report;

  // Analytic gradients.
  ForwardCache<double> ci, cj;
  const auto oi = forward(params, view_i, &ci);
  const auto oj = forward(params, view_j, &cj);
  auto grads = params.zeros_like();

  Objective obj{opts.objective, {}, oi.z, oj.z};
  Rng rng(opts.seed);
  if (opts.objective == GradObjective::LinearReadout) {
    obj.readout = Tensor<double>(oi.p.shape);
    for (auto &v : obj.readout.data)
      v = rng.normal();
    backward(params, ci, obj.readout, nullptr, grads);
  } else {
    const auto loss = simsiam_batch_loss(oi.z, oi.p, oj.z, oj.p);
    backward(params, ci, loss.grad_p_i, nullptr, grads);
    backward(params, cj, loss.grad_p_j, nullptr, grads);

    // Target path: only the z-gradients the loss hands back.
    auto target_grads = params.zeros_like();
    const Tensor<double> zero_p(oi.p.shape);
    backward(params, cj, zero_p, &loss.grad_z_j, target_grads);
    backward(params, ci, zero_p, &loss.grad_z_i, target_grads);
    for (const auto &t : target_grads.tensors)
      for (double v : t.data)
        report.target_path_max_abs = std::max(report.target_path_max_abs, std::abs(v));
  }

  std::vector<std::size_t> ids = opts.params;
  if (ids.empty()) {
    ids.resize(kNumParams);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
  }

  ModelParams<double> probe = params;
  for (std::size_t id : ids) {
    const std::size_t n = probe[id].size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (n > opts.samples_per_tensor) {
      rng.shuffle(idx.begin(), idx.end());
      idx.resize(opts.samples_per_tensor);
    }
    for (std::size_t k : idx) {
      const double orig = probe[id][k];
      probe[id][k] = orig + opts.step;
      const double up = obj.value(probe, view_i, view_j);
      probe[id][k] = orig - opts.step;
      const double down = obj.value(probe, view_i, view_j);
      probe[id][k] = orig;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double analytic = grads[id][k];
      const double denom =
          std::max(std::abs(analytic) + std::abs(numeric), opts.floor);
      const double rel = std::abs(analytic - numeric) / denom;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_param = id;
      }
      ++report.checked;
    }
  }
  return report;
}

} // namespace fastssl::sim
