// SPDX-License-Identifier: Apache-2.0
#include "fastssl/hard_augment.hpp"

#include <cmath>

namespace fastssl {

void SelectionConfig::validate() const {
  if (num_positives < 2)
    throw ConfigError("num_positives must be at least 2");
  if (selection_resolution < 0 || train_resolution < 1)
    throw ConfigError("resolutions must be positive");
  if (selection_resolution > train_resolution)
    throw ConfigError("selection_resolution must not exceed train_resolution");
  if (!(iteration_cost_ratio > 0.0))
    throw ConfigError("iteration_cost_ratio must be positive");
}

double SelectionOutcome::chosen_loss(std::size_t sample) const {
  const int m = static_cast<int>(std::lround(
      (1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(num_pairs))) / 2.0));
  return losses[sample * num_pairs + pair_rank(chosen.at(sample), m)];
}

std::size_t pair_count(int m) {
  if (m < 2)
    throw ConfigError("at least two augmentations are needed to form a pair");
  return static_cast<std::size_t>(m) * static_cast<std::size_t>(m - 1) / 2;
}

std::vector<PairIndex> enumerate_pairs(int m) {
  std::vector<PairIndex> pairs;
  pairs.reserve(pair_count(m));
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      pairs.push_back({i, j});
  return pairs;
}

std::size_t pair_rank(PairIndex pair, int m) {
  if (pair.i < 0 || pair.i >= pair.j || pair.j >= m)
    throw RangeError("invalid pair (" + std::to_string(pair.i) + "," +
                     std::to_string(pair.j) + ") for m=" + std::to_string(m));
  // Pairs preceding row i: sum_{a<i} (m-1-a).
  const std::size_t i = static_cast<std::size_t>(pair.i);
  const std::size_t mm = static_cast<std::size_t>(m);
  return i * (2 * mm - i - 1) / 2 + static_cast<std::size_t>(pair.j - pair.i - 1);
}

PairIndex select_hardest(std::span<const double> losses, int m) {
  const auto pairs = enumerate_pairs(m);
  if (losses.size() != pairs.size())
    throw SelectionError("loss row has " + std::to_string(losses.size()) +
                         " entries, expected " + std::to_string(pairs.size()));
  std::size_t best = 0;
  for (std::size_t k = 0; k < losses.size(); ++k) {
    if (!std::isfinite(losses[k]))
      throw SelectionError("non-finite loss for pair (" +
                           std::to_string(pairs[k].i) + "," +
                           std::to_string(pairs[k].j) + ")");
    if (losses[k] > losses[best])
      best = k;
  }
  return pairs[best];
}

OverheadReport selection_overhead(const SelectionConfig &cfg) {
  cfg.validate();
  const double r2c = static_cast<double>(cfg.train_resolution) *
                     static_cast<double>(cfg.train_resolution) *
                     cfg.iteration_cost_ratio;
  const double sel = static_cast<double>(cfg.num_positives) *
                     static_cast<double>(cfg.selection_resolution) *
                     static_cast<double>(cfg.selection_resolution);
  OverheadReport r;
  r.speed_factor = r2c / (r2c + sel);
  r.overhead = 1.0 - r.speed_factor;
  return r;
}

SelectionOutcome select_rows(std::vector<double> losses,
                             std::size_t num_samples, int m) {
  SelectionOutcome out;
  out.num_pairs = pair_count(m);
  if (losses.size() != num_samples * out.num_pairs)
    throw SelectionError("loss matrix has " + std::to_string(losses.size()) +
                         " entries, expected " +
                         std::to_string(num_samples * out.num_pairs));
  out.chosen.reserve(num_samples);
  for (std::size_t s = 0; s < num_samples; ++s) {
    std::span<const double> row(losses.data() + s * out.num_pairs,
                                out.num_pairs);
    try {
      out.chosen.push_back(select_hardest(row, m));
    } catch (const SelectionError &e) {
      throw SelectionError("sample " + std::to_string(s) + ": " + e.what());
    }
  }
  out.losses = std::move(losses);
  return out;
}

} // namespace fastssl
