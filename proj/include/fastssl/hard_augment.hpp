// SPDX-License-Identifier: Apache-2.0
/**
 * @file   hard_augment.hpp
 * @brief  Maximum-loss augmentation pair selection.
 *
 * Each sample carries m augmented views. All C(m,2) pairs are scored on
 * views downsampled to the selection resolution and the pair with the largest
 * loss is kept for the full-resolution training pass.
 */
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fastssl/error.hpp"

namespace fastssl {

struct SelectionConfig {
  int num_positives = 4;
  int selection_resolution = 64;
  int train_resolution = 224;
  /// Cost of one training iteration in units of one forward pass.
  double iteration_cost_ratio = 6.0;

  void validate() const;
};

struct PairIndex {
  int i = 0;
  int j = 1;

  friend bool operator==(const PairIndex &, const PairIndex &) = default;
};

struct SelectionOutcome {
  std::size_t num_pairs = 0;
  std::vector<PairIndex> chosen;
  /// Row-major [sample][pair] losses in enumerate_pairs order.
  std::vector<double> losses;

  double chosen_loss(std::size_t sample) const;
};

struct OverheadReport {
  double speed_factor = 1.0; ///< M_ha
  double overhead = 0.0;     ///< 1 - M_ha
};

std::size_t pair_count(int m);

/// All pairs (i < j) in lexicographic order.
std::vector<PairIndex> enumerate_pairs(int m);

/// Position of `pair` inside enumerate_pairs(m).
std::size_t pair_rank(PairIndex pair, int m);

/// Argmax over one sample's pair losses; ties go to the lowest pair.
PairIndex select_hardest(std::span<const double> losses, int m);

OverheadReport selection_overhead(const SelectionConfig &cfg);

/// Applies select_hardest to every row of a [sample][pair] loss matrix.
SelectionOutcome select_rows(std::vector<double> losses,
                             std::size_t num_samples, int m);

/**
 * Runs the selection pass for a batch.
 *
 * `views[s]` holds the m full-resolution views of sample s. `downsample`
 * maps a view to the selection resolution. `loss_oracle` receives every
 * downsampled view of the batch and returns a [sample][pair] loss matrix.
 * Batch-level oracles let the caller embed all views in one pass.
 */
template <typename View, typename Downsample, typename LossOracle>
SelectionOutcome hard_select_batch(const std::vector<std::vector<View>> &views,
                                   Downsample &&downsample,
                                   LossOracle &&loss_oracle,
                                   const SelectionConfig &cfg) {
  cfg.validate();
  const int m = cfg.num_positives;
  std::vector<std::vector<View>> small(views.size());
  for (std::size_t s = 0; s < views.size(); ++s) {
    if (views[s].size() != static_cast<std::size_t>(m))
      throw SelectionError("sample " + std::to_string(s) + " has " +
                           std::to_string(views[s].size()) +
                           " views, expected " + std::to_string(m));
    small[s].reserve(views[s].size());
    for (const auto &v : views[s])
      small[s].push_back(downsample(v, cfg.selection_resolution));
  }
  std::vector<double> losses;
  try {
    losses = loss_oracle(small);
  } catch (const Error &) {
    throw;
  } catch (const std::exception &e) {
    throw SelectionError(std::string("loss oracle failed: ") + e.what());
  }
  return select_rows(std::move(losses), views.size(), m);
}

} // namespace fastssl
