// SPDX-License-Identifier: Apache-2.0
#include "fastssl/sim/loss.hpp"

#include <cmath>

namespace fastssl::sim {

namespace {

template <typename T> T norm(std::span<const T> a) {
  T s = 0;
  for (T v : a)
    s += v * v;
  return std::sqrt(s);
}

template <typename T> T dot(std::span<const T> a, std::span<const T> b) {
  T s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

// Adds scale * d cos(p, z) / dp into grad.
template <typename T>
T cosine_with_grad(std::span<const T> p, std::span<const T> z, T scale,
                   std::span<T> grad) {
  const T np = norm(p), nz = norm(z);
  if (!(np > T(0)) || !(nz > T(0)))
    throw NumericError("zero-norm embedding in cosine loss");
  const T c = dot(p, z) / (np * nz);
  for (std::size_t k = 0; k < p.size(); ++k)
    grad[k] += scale * (z[k] / (np * nz) - c * p[k] / (np * np));
  return c;
}

} // namespace

template <typename T> T cosine(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size())
    throw ConfigError("cosine: length mismatch");
  const T na = norm(a), nb = norm(b);
  if (!(na > T(0)) || !(nb > T(0)))
    throw NumericError("zero-norm embedding in cosine loss");
  return dot(a, b) / (na * nb);
}

template <typename T>
T simsiam_loss(std::span<const T> z_i, std::span<const T> p_i,
               std::span<const T> z_j, std::span<const T> p_j) {
  return T(-0.5) * (cosine(p_i, z_j) + cosine(p_j, z_i));
}

template <typename T>
PairLossResult<T> simsiam_batch_loss(const Tensor<T> &z_i, const Tensor<T> &p_i,
                                     const Tensor<T> &z_j,
                                     const Tensor<T> &p_j) {
  check_same_shape(z_i, p_i, "simsiam loss");
  check_same_shape(z_i, z_j, "simsiam loss");
  check_same_shape(z_i, p_j, "simsiam loss");
  const std::size_t batch = z_i.dim(0), d = z_i.dim(1);
  PairLossResult<T> r;
  r.grad_p_i = Tensor<T>(z_i.shape);
  r.grad_p_j = Tensor<T>(z_i.shape);
  r.grad_z_i = Tensor<T>(z_i.shape);
  r.grad_z_j = Tensor<T>(z_i.shape);
  const T scale = T(-0.5) / static_cast<T>(batch);
  T total = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    auto row = [&](const Tensor<T> &t) {
      return std::span<const T>(t.ptr() + b * d, d);
    };
    auto grow = [&](Tensor<T> &t) { return std::span<T>(t.ptr() + b * d, d); };
    const T c1 = cosine_with_grad(row(p_i), row(z_j), scale, grow(r.grad_p_i));
    const T c2 = cosine_with_grad(row(p_j), row(z_i), scale, grow(r.grad_p_j));
    total += T(-0.5) * (c1 + c2);
  }
  r.loss = total / static_cast<T>(batch);
  return r;
}

#define FASTSSL_INSTANTIATE(T)                                                 \
  template T cosine<T>(std::span<const T>, std::span<const T>);               \
  template T simsiam_loss<T>(std::span<const T>, std::span<const T>,           \
                             std::span<const T>, std::span<const T>);          \
  template PairLossResult<T> simsiam_batch_loss<T>(                            \
      const Tensor<T> &, const Tensor<T> &, const Tensor<T> &,                 \
      const Tensor<T> &);

FASTSSL_INSTANTIATE(float)
FASTSSL_INSTANTIATE(double)

#undef FASTSSL_INSTANTIATE

} // namespace fastssl::sim
