// SPDX-License-Identifier: Apache-2.0
/**
 * @file   experiment.hpp
 * @brief  Named desk-scale experiment presets and run persistence.
 *
 * A run directory holds config.txt, schedule.csv, metrics.jsonl (one record
 * per epoch, appended as training progresses), cost.txt / cost.json (FLOPs
 * against the baseline preset) and checkpoint.{manifest,bin}.
 */
#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fastssl/config.hpp"
#include "fastssl/cost_model.hpp"

namespace fastssl {

/// Desk-scale epoch budgets (200 / 120 / 20 epochs scaled by 1/5).
inline constexpr int kBaselineEpochs = 40;
inline constexpr int kEfficientEpochs = 24;
inline constexpr int kEfficientWarmupEpochs = 4;

using Overrides = std::vector<std::pair<std::string, std::string>>;

void apply_overrides(ExperimentConfig &cfg, const Overrides &overrides);

/// Cosine annealing, constant full resolution, fixed magnitude 5, no
/// selection, 40 epochs at lr 0.05. Dataset, model and seed come from `base`.
ExperimentConfig baseline_config(const ExperimentConfig &base);

/// F1-CLR with 4 warm-up epochs, progressive resolution 16..32 with magnitude
/// 4..6, hard augment with 4 positives at 8 px, 24 epochs at lr 0.1.
ExperimentConfig efficient_config(const ExperimentConfig &base);

struct RunSpec {
  std::string name;
  ExperimentConfig config;
};

std::vector<std::string_view> preset_names();

/// Expands a preset over `base`; `overrides` are applied to every run last.
/// Throws ConfigError for an unknown preset.
std::vector<RunSpec> preset_runs(std::string_view preset,
                                 const ExperimentConfig &base,
                                 const Overrides &overrides = {});

/// Analytic profile covering every resolution either config can use.
FlopsProfile shared_profile(const ExperimentConfig &a, const ExperimentConfig &b);

struct RunSummary {
  std::string name;
  std::uint64_t seed = 0;
  double knn_accuracy = 0.0;
  double cumulative_flops = 0.0;
  double baseline_flops = 0.0; ///< planned FLOPs of the matching baseline
  double flops_fraction = 0.0; ///< cumulative_flops / baseline_flops
  std::int64_t steps = 0;
  double embedding_std = 0.0;
};

using LogFn = std::function<void(const std::string &)>;

/**
 * Trains one run into `dir` (created if missing). `reference` is the
 * baseline the cost report compares against. Metrics are appended per epoch
 * so a failed run leaves its partial log behind.
 */
RunSummary execute_run(const RunSpec &run, const ExperimentConfig &reference,
                       const std::string &dir, const LogFn &log = {});

/// Runs every configuration of a preset sequentially under `out_dir` and
/// writes summary.json and summary.txt there.
std::vector<RunSummary> run_preset(std::string_view preset,
                                   const ExperimentConfig &base,
                                   const Overrides &overrides,
                                   const std::string &out_dir,
                                   const LogFn &log = {});

std::string format_summary_table(const std::vector<RunSummary> &runs);
std::string format_summary_json(const std::vector<RunSummary> &runs);

} // namespace fastssl
