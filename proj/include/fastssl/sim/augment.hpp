// SPDX-License-Identifier: Apache-2.0
/**
 * @file   augment.hpp
 * @brief  SimCLR-style view generation with a magnitude knob.
 *
 * Photometric strengths (colour jitter, grayscale probability, pixel noise)
 * scale linearly with magnitude / 5, so magnitude 5 gives the standard
 * strengths and magnitude 0 disables them.
 */
#pragma once

#include "fastssl/sim/dataset.hpp"
#include "fastssl/sim/rng.hpp"

namespace fastssl::sim {

struct AugmentationPolicy {
  double magnitude = 5.0;
  double crop_scale_min = 0.2;
  double crop_scale_max = 1.0;
  double flip_probability = 0.5;
  // Strengths at magnitude 5.
  double brightness = 0.4;
  double contrast = 0.4;
  double saturation = 0.4;
  double jitter_probability = 0.8;
  double grayscale_probability = 0.2;
  double noise_std = 0.02;

  static constexpr double kStandardMagnitude = 5.0;

  double scale() const { return magnitude / kStandardMagnitude; }
  void validate() const;
};

/// Random resized crop to `resolution`, flip, jitter, grayscale, noise.
Image augment(const Image &image, const AugmentationPolicy &policy,
              int resolution, Rng &rng);

/// Bilinear resize of the crop box [x0, x0+w) x [y0, y0+h) to out x out.
Image resize_crop_bilinear(const Image &image, double x0, double y0, double w,
                           double h, int out);

/// Box/area average when side is an integer multiple of `out`, else bilinear.
Image downsample(const Image &image, int out);

} // namespace fastssl::sim
