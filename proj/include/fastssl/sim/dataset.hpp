// SPDX-License-Identifier: Apache-2.0
/**
 * @file   dataset.hpp
 * @brief  Seeded synthetic image classification set.
 *
 * Every class owns a smoothed random RGB prototype on a canvas. A sample is a
 * random image_size x image_size window of its class prototype plus pixel
 * noise. Pixel values live in [0, 1].
 */
#pragma once

#include <cstdint>
#include <vector>

#include "fastssl/sim/tensor.hpp"

namespace fastssl::sim {

struct SynthDatasetConfig {
  int num_classes = 8;
  int samples_per_class = 250;
  int canvas_size = 48;
  int image_size = 32;
  double noise_std = 0.05;
  std::uint64_t seed = 1;
  double train_fraction = 0.8;

  void validate() const;
};

using Image = Tensor<float>; ///< [3, H, W]

struct LabeledSet {
  std::vector<Image> images;
  std::vector<int> labels;

  std::size_t size() const { return images.size(); }
};

struct Dataset {
  LabeledSet train;
  LabeledSet eval;
  int num_classes = 0;
  int image_size = 0;
};

Dataset generate_dataset(const SynthDatasetConfig &cfg);

} // namespace fastssl::sim
