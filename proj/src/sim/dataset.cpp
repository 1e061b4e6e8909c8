// SPDX-License-Identifier: Apache-2.0
#include "fastssl/sim/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "fastssl/sim/rng.hpp"

namespace fastssl::sim {

void SynthDatasetConfig::validate() const {
  if (num_classes < 1 || samples_per_class < 1)
    throw ConfigError("dataset needs at least one class and one sample");
  if (image_size < 8)
    throw ConfigError("image_size must be at least 8");
  if (canvas_size < image_size)
    throw ConfigError("canvas_size must be at least image_size");
  if (!(noise_std >= 0.0))
    throw ConfigError("noise_std must be nonnegative");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train_fraction must lie in (0, 1)");
  const int n_train = static_cast<int>(
      std::floor(train_fraction * samples_per_class + 0.5));
  if (n_train < 1 || n_train >= samples_per_class)
    throw ConfigError("samples_per_class too small for a train/eval split");
}

namespace {

// In-place separable box blur of one channel plane.
void box_blur(std::vector<double> &plane, int n, int radius) {
  std::vector<double> tmp(plane.size());
  auto pass = [&](const std::vector<double> &src, std::vector<double> &dst,
                  bool horizontal) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        double sum = 0.0;
        int count = 0;
        for (int d = -radius; d <= radius; ++d) {
          const int c = b + d;
          if (c < 0 || c >= n)
            continue;
          sum += horizontal ? src[a * n + c] : src[c * n + a];
          ++count;
        }
        if (horizontal)
          dst[a * n + b] = sum / count;
        else
          dst[b * n + a] = sum / count;
      }
    }
  };
  pass(plane, tmp, true);
  pass(tmp, plane, false);
}

struct Prototype {
  std::vector<double> field; ///< standardized luminance texture
  double tint[3];            ///< class colour offset
  double mix[3];             ///< per-channel texture weight
};

// Class identity lives in a faint colour cast and a smoothed texture.
// Brightness and contrast are per-sample nuisance.
Prototype make_prototype(Rng &rng, int canvas) {
  const std::size_t plane = static_cast<std::size_t>(canvas) * canvas;
  Prototype p;
  p.field.resize(plane);
  for (auto &v : p.field)
    v = rng.normal();
  for (int pass = 0; pass < 3; ++pass)
    box_blur(p.field, canvas, 2);
  double mean = 0.0;
  for (double v : p.field)
    mean += v;
  mean /= static_cast<double>(plane);
  double var = 0.0;
  for (double v : p.field)
    var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(plane)) + 1e-12;
  for (auto &v : p.field)
    v = (v - mean) / sd;
  for (int c = 0; c < 3; ++c) {
    p.tint[c] = rng.uniform(-0.06, 0.06);
    p.mix[c] = rng.uniform(0.5, 1.5);
  }
  return p;
}

} // namespace

Dataset generate_dataset(const SynthDatasetConfig &cfg) {
  cfg.validate();
  Dataset ds;
  ds.num_classes = cfg.num_classes;
  ds.image_size = cfg.image_size;
  const int n = cfg.image_size;
  const int canvas = cfg.canvas_size;
  const int n_train = static_cast<int>(
      std::floor(cfg.train_fraction * cfg.samples_per_class + 0.5));

  for (int k = 0; k < cfg.num_classes; ++k) {
    Rng proto_rng(derive_seed(cfg.seed, 0x70726f74, static_cast<std::uint64_t>(k)));
    const auto proto = make_prototype(proto_rng, canvas);
    Rng rng(derive_seed(cfg.seed, 0x73616d70, static_cast<std::uint64_t>(k)));
    for (int s = 0; s < cfg.samples_per_class; ++s) {
      const int ox = static_cast<int>(rng.below(canvas - n + 1));
      const int oy = static_cast<int>(rng.below(canvas - n + 1));
      const double gain = rng.uniform(0.7, 1.3);
      const double contrast = rng.uniform(0.03, 0.25);
      Image img({3, static_cast<std::size_t>(n), static_cast<std::size_t>(n)});
      for (int c = 0; c < 3; ++c)
        for (int y = 0; y < n; ++y)
          for (int x = 0; x < n; ++x) {
            const double lum =
                proto.field[static_cast<std::size_t>(oy + y) * canvas + ox + x];
            const double v =
                gain * (0.5 + proto.tint[c] + contrast * proto.mix[c] * lum) +
                cfg.noise_std * rng.normal();
            img[(static_cast<std::size_t>(c) * n + y) * n + x] =
                static_cast<float>(std::clamp(v, 0.0, 1.0));
          }
      LabeledSet &dst = s < n_train ? ds.train : ds.eval;
      dst.images.push_back(std::move(img));
      dst.labels.push_back(k);
    }
  }
  return ds;
}

} // namespace fastssl::sim
