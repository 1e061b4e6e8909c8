// SPDX-License-Identifier: Apache-2.0
/**
 * @file   tensor.hpp
 * @brief  Minimal dense row-major tensor.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fastssl/error.hpp"

namespace fastssl::sim {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape &shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Shape &shape);

template <typename T> struct Tensor {
  Shape shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(Shape s, T fill = T{})
      : shape(std::move(s)), data(shape_size(shape), fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  T *ptr() { return data.data(); }
  const T *ptr() const { return data.data(); }
  std::span<T> span() { return data; }
  std::span<const T> span() const { return data; }

  T &operator[](std::size_t i) { return data[i]; }
  const T &operator[](std::size_t i) const { return data[i]; }

  void zero() { std::fill(data.begin(), data.end(), T{}); }

  template <typename U> Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.assign(data.begin(), data.end());
    return out;
  }

  friend bool operator==(const Tensor &, const Tensor &) = default;
};

template <typename T>
void check_same_shape(const Tensor<T> &a, const Tensor<T> &b,
                      const std::string &what) {
  if (a.shape != b.shape)
    throw ConfigError(what + ": shape mismatch " + shape_string(a.shape) +
                      " vs " + shape_string(b.shape));
}

} // namespace fastssl::sim
