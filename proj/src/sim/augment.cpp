// SPDX-License-Identifier: Apache-2.0
#include "fastssl/sim/augment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fastssl::sim {

void AugmentationPolicy::validate() const {
  if (!(magnitude >= 0.0))
    throw ConfigError("augmentation magnitude must be nonnegative");
  if (!(crop_scale_min > 0.0 && crop_scale_min <= crop_scale_max &&
        crop_scale_max <= 1.0))
    throw ConfigError("crop scale range must satisfy 0 < min <= max <= 1");
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(flip_probability) || !prob(jitter_probability) ||
      !prob(grayscale_probability))
    throw ConfigError("probabilities must lie in [0, 1]");
  if (brightness < 0.0 || contrast < 0.0 || saturation < 0.0 ||
      noise_std < 0.0)
    throw ConfigError("jitter strengths must be nonnegative");
}

Image resize_crop_bilinear(const Image &image, double x0, double y0, double w,
                           double h, int out) {
  const int channels = static_cast<int>(image.dim(0));
  const int sh = static_cast<int>(image.dim(1));
  const int sw = static_cast<int>(image.dim(2));
  const auto o = static_cast<std::size_t>(out);
  Image dst({static_cast<std::size_t>(channels), o, o});
  const double sx = w / out;
  const double sy = h / out;
  for (int v = 0; v < out; ++v) {
    const double fy =
        std::clamp(y0 + (v + 0.5) * sy - 0.5, 0.0, static_cast<double>(sh - 1));
    const int y1 = static_cast<int>(fy);
    const int y2 = std::min(y1 + 1, sh - 1);
    const double wy = fy - y1;
    for (int u = 0; u < out; ++u) {
      const double fx = std::clamp(x0 + (u + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(sw - 1));
      const int x1 = static_cast<int>(fx);
      const int x2 = std::min(x1 + 1, sw - 1);
      const double wx = fx - x1;
      for (int c = 0; c < channels; ++c) {
        const float *p = image.ptr() + static_cast<std::size_t>(c) * sh * sw;
        const double top = p[y1 * sw + x1] * (1.0 - wx) + p[y1 * sw + x2] * wx;
        const double bot = p[y2 * sw + x1] * (1.0 - wx) + p[y2 * sw + x2] * wx;
        dst[(static_cast<std::size_t>(c) * o + v) * o + u] =
            static_cast<float>(top * (1.0 - wy) + bot * wy);
      }
    }
  }
  return dst;
}

Image downsample(const Image &image, int out) {
  const std::size_t channels = image.dim(0);
  const int side = static_cast<int>(image.dim(1));
  if (out < 1 || out > side || image.dim(1) != image.dim(2))
    throw ConfigError("cannot downsample a " + std::to_string(side) +
                      "px view to " + std::to_string(out) + "px");
  if (out == side)
    return image;
  if (side % out != 0)
    return resize_crop_bilinear(image, 0.0, 0.0, side, side, out);

  const int f = side / out;
  const auto o = static_cast<std::size_t>(out);
  Image dst({channels, o, o});
  const float inv = 1.0f / static_cast<float>(f * f);
  for (std::size_t c = 0; c < channels; ++c)
    for (int y = 0; y < out; ++y)
      for (int x = 0; x < out; ++x) {
        float sum = 0.0f;
        for (int dy = 0; dy < f; ++dy)
          for (int dx = 0; dx < f; ++dx)
            sum += image[(c * side + y * f + dy) * side + x * f + dx];
        dst[(c * o + y) * o + x] = sum * inv;
      }
  return dst;
}

namespace {

float luma(float r, float g, float b) {
  return 0.299f * r + 0.587f * g + 0.114f * b;
}

void clamp01(Image &img) {
  for (auto &v : img.data)
    v = std::clamp(v, 0.0f, 1.0f);
}

} // namespace

Image augment(const Image &image, const AugmentationPolicy &policy,
              int resolution, Rng &rng) {
  policy.validate();
  const int sh = static_cast<int>(image.dim(1));
  const int sw = static_cast<int>(image.dim(2));
  if (resolution < 1 || resolution > std::min(sh, sw))
    throw ConfigError("view resolution " + std::to_string(resolution) +
                      " exceeds the " + std::to_string(std::min(sh, sw)) +
                      "px source");

  // Random resized crop.
  const double area = static_cast<double>(sh) * sw;
  double cw = sw, ch = sh, cx = 0.0, cy = 0.0;
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double target =
        area * rng.uniform(policy.crop_scale_min, policy.crop_scale_max);
    const double log_ratio = rng.uniform(std::log(3.0 / 4.0), std::log(4.0 / 3.0));
    const double ratio = std::exp(log_ratio);
    const double w = std::sqrt(target * ratio);
    const double h = std::sqrt(target / ratio);
    if (w <= sw && h <= sh) {
      cw = w;
      ch = h;
      cx = rng.uniform(0.0, sw - w);
      cy = rng.uniform(0.0, sh - h);
      break;
    }
  }
  Image view = resize_crop_bilinear(image, cx, cy, cw, ch, resolution);

  const std::size_t plane = static_cast<std::size_t>(resolution) * resolution;
  const bool colour = view.dim(0) == 3;

  if (rng.bernoulli(policy.flip_probability)) {
    for (std::size_t c = 0; c < view.dim(0); ++c)
      for (int y = 0; y < resolution; ++y) {
        float *row = view.ptr() + c * plane + static_cast<std::size_t>(y) * resolution;
        std::reverse(row, row + resolution);
      }
  }

  const double s = policy.scale();
  if (s <= 0.0)
    return view;

  if (rng.bernoulli(policy.jitter_probability)) {
    const double b = policy.brightness * s;
    const double c = policy.contrast * s;
    const double sat = policy.saturation * s;
    const float fb = static_cast<float>(rng.uniform(std::max(0.0, 1.0 - b), 1.0 + b));
    const float fc = static_cast<float>(rng.uniform(std::max(0.0, 1.0 - c), 1.0 + c));
    const float fs = static_cast<float>(rng.uniform(std::max(0.0, 1.0 - sat), 1.0 + sat));
    if (b > 0.0) {
      for (auto &v : view.data)
        v *= fb;
      clamp01(view);
    }
    if (c > 0.0 && colour) {
      double mean = 0.0;
      for (std::size_t i = 0; i < plane; ++i)
        mean += luma(view[i], view[plane + i], view[2 * plane + i]);
      const float m = static_cast<float>(mean / static_cast<double>(plane));
      for (auto &v : view.data)
        v = (v - m) * fc + m;
      clamp01(view);
    }
    if (sat > 0.0 && colour) {
      for (std::size_t i = 0; i < plane; ++i) {
        const float g = luma(view[i], view[plane + i], view[2 * plane + i]);
        for (std::size_t ch3 = 0; ch3 < 3; ++ch3)
          view[ch3 * plane + i] = (view[ch3 * plane + i] - g) * fs + g;
      }
      clamp01(view);
    }
  }

  if (colour && rng.bernoulli(std::min(1.0, policy.grayscale_probability * s))) {
    for (std::size_t i = 0; i < plane; ++i) {
      const float g = luma(view[i], view[plane + i], view[2 * plane + i]);
      view[i] = view[plane + i] = view[2 * plane + i] = g;
    }
  }

  const double noise = policy.noise_std * s;
  if (noise > 0.0) {
    for (auto &v : view.data)
      v += static_cast<float>(noise * rng.normal());
    clamp01(view);
  }
  return view;
}

} // namespace fastssl::sim
