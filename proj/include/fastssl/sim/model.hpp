// SPDX-License-Identifier: Apache-2.0
/**
 * @file   model.hpp
 * @brief  Resolution-agnostic tiny encoder with projection and predictor
 *         heads, forward and manual backward passes.
 *
 * Encoder: three 3x3 stride-2 convolutions (padding 1) with ReLU, then global
 * average pooling. Projection: linear -> batch standardization -> ReLU ->
 * linear -> batch standardization. Predictor: linear -> ReLU -> linear.
 * Batch standardization normalizes each feature by its batch mean and
 * variance and has no learned affine.
 *
 * FLOPs are counted for convolutions (2 k^2 c_in c_out h_out w_out) and dense
 * layers (2 fan_in fan_out) only. Backward passes are counted as twice the
 * forward FLOPs of the layers they traverse.
 */
#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <type_traits>

#include "fastssl/sim/rng.hpp"
#include "fastssl/sim/tensor.hpp"

namespace fastssl::sim {

struct ModelSpec {
  int in_channels = 3;
  std::array<int, 3> conv_channels{16, 32, 64};
  int proj_hidden = 128;
  int embed_dim = 64;
  int pred_hidden = 32;
  double norm_eps = 1e-5;

  void validate() const;
  friend bool operator==(const ModelSpec &, const ModelSpec &) = default;
};

enum ParamId : std::size_t {
  kConv1W,
  kConv1B,
  kConv2W,
  kConv2B,
  kConv3W,
  kConv3B,
  kProj1W,
  kProj1B,
  kProj2W,
  kProj2B,
  kPred1W,
  kPred1B,
  kPred2W,
  kPred2B,
  kNumParams
};

std::string_view param_name(std::size_t id);

/// Output side of a 3x3 stride-2 pad-1 convolution.
constexpr int conv_out_side(int side) { return (side - 1) / 2 + 1; }

template <typename T> struct ModelParams {
  ModelSpec spec;
  std::array<Tensor<T>, kNumParams> tensors;

  Tensor<T> &operator[](std::size_t id) { return tensors[id]; }
  const Tensor<T> &operator[](std::size_t id) const { return tensors[id]; }

  std::size_t num_scalars() const;

  /// Same shapes, zero-filled.
  ModelParams zeros_like() const;

  template <typename U> ModelParams<U> cast() const {
    ModelParams<U> out;
    out.spec = spec;
    for (std::size_t i = 0; i < kNumParams; ++i)
      out.tensors[i] = tensors[i].template cast<U>();
    return out;
  }
};

/// Shapes only, zero-filled.
template <typename T> ModelParams<T> make_params(const ModelSpec &spec);

/// He-normal weights, zero biases.
template <typename T>
ModelParams<T> init_params(const ModelSpec &spec, std::uint64_t seed);

/// Forward FLOPs of the full network for one square input of `side` pixels.
double forward_flops(const ModelSpec &spec, int side);

/// Forward FLOPs of encoder, projection and predictor separately.
struct FlopsBreakdown {
  double encoder = 0.0;
  double projection = 0.0;
  double predictor = 0.0;
  double total() const { return encoder + projection + predictor; }
};
FlopsBreakdown forward_flops_breakdown(const ModelSpec &spec, int side);

template <typename T> struct ForwardCache {
  Tensor<T> input;              // [B, C, H, W]
  std::array<Tensor<T>, 3> act; // post-ReLU conv outputs
  Tensor<T> features;           // [B, c3]
  Tensor<T> proj_norm1;         // standardized hidden, pre-ReLU
  std::vector<T> proj_inv_std1;
  Tensor<T> proj_relu1;
  std::vector<T> proj_inv_std2;
  Tensor<T> z;
  Tensor<T> pred_hidden; // pre-ReLU
  Tensor<T> pred_relu;
};

template <typename T> struct ForwardOutput {
  Tensor<T> features; ///< encoder output [B, c3]
  Tensor<T> z;        ///< projection [B, d]
  Tensor<T> p;        ///< prediction [B, d]
  double flops = 0.0; ///< counted forward FLOPs for the whole batch
};

/**
 * Forward pass over a batch [B, C, H, W] with H == W >= 8.
 * Pass a cache to enable backward(). Throws NumericError naming the layer on
 * non-finite activations.
 */
template <typename T>
ForwardOutput<T> forward(const ModelParams<T> &params, const Tensor<T> &batch,
                         ForwardCache<T> *cache = nullptr);

/// Encoder only, for probes. Not FLOPs-accounted.
template <typename T>
Tensor<T> encode(const ModelParams<T> &params, const Tensor<T> &batch);

/**
 * Accumulates parameter gradients into `grads` given dL/dp and, optionally,
 * an extra dL/dz injected at the projection output. Returns the counted
 * backward FLOPs (twice the forward FLOPs of the batch).
 */
template <typename T>
double backward(const ModelParams<T> &params, const ForwardCache<T> &cache,
                const Tensor<T> &grad_p,
                const std::type_identity_t<Tensor<T>> *grad_z,
                ModelParams<T> &grads);

} // namespace fastssl::sim
