// SPDX-License-Identifier: Apache-2.0
/**
 * @file   trainer.hpp
 * @brief  Desk-scale self-supervised training loop.
 *
 * Per iteration: query the learning-rate/momentum schedule and the
 * resolution/magnitude curriculum, draw n views per sample, optionally pick
 * the hardest pair on downsampled views, forward both chosen views, apply
 * the symmetric stop-gradient loss, backpropagate and take an SGD-momentum
 * step. Training is single-threaded and bit-reproducible for a given config.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fastssl/config.hpp"
#include "fastssl/cost_model.hpp"
#include "fastssl/lr_range.hpp"
#include "fastssl/sim/augment.hpp"
#include "fastssl/sim/dataset.hpp"
#include "fastssl/sim/model.hpp"
#include "fastssl/sim/optimizer.hpp"

namespace fastssl::sim {

struct EpochRecord {
  int epoch = 0;
  std::int64_t step = 0; ///< iterations completed
  double lr = 0.0;
  double momentum = 0.0;
  int resolution = 0;
  double magnitude = 0.0;
  double train_loss = 0.0;
  std::optional<double> knn_accuracy;
  double cumulative_flops = 0.0;
  double embedding_std = 0.0;
};

/// One JSON object per line, keys in a fixed order.
std::string to_json_line(const EpochRecord &r);

struct TrainResult {
  std::vector<EpochRecord> epochs;
  ModelParams<float> params;
  double cumulative_flops = 0.0;
  /// The plan that was actually executed, for cost_model cross-checks.
  TrainingPlan realized_plan;
  /// Forward FLOPs per sample at every resolution the run used.
  FlopsProfile measured_profile;
  double final_knn_accuracy = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord &)>;

SynthDatasetConfig dataset_config(const ExperimentConfig &cfg);
ModelSpec model_spec(const ExperimentConfig &cfg);
AugmentationPolicy augmentation_policy(const ExperimentConfig &cfg,
                                       double magnitude);

/// Maps [0, 1] pixels to the network input range and stacks views.
Tensor<float> stack_views(const std::vector<const Image *> &views);

/// Encoder features of every image of `set`, batched.
Tensor<float> embed_set(const ModelParams<float> &params, const LabeledSet &set);

double knn_probe(const ModelParams<float> &params, const Dataset &ds, int k);

struct StepStats {
  double loss = 0.0;
  double flops = 0.0;         ///< forward + backward + selection, whole batch
  double forward_flops = 0.0; ///< one view batch at the step resolution
  double selection_flops = 0.0;
  double embedding_std = 0.0;
};

/// Model, optimizer state and data of one run. train() drives it; the LR
/// range test reuses it one step at a time.
class Trainer {
public:
  explicit Trainer(const ExperimentConfig &cfg);

  const ExperimentConfig &config() const { return cfg_; }
  const Dataset &dataset() const { return data_; }
  const ModelParams<float> &params() const { return opt_.params; }
  bool selects() const { return selects_; }
  int views_per_sample() const { return selects_ ? cfg_.num_positives : 2; }

  /// Draws the views of sample `index` for iteration `t`.
  std::vector<Image> draw_views(std::size_t index, std::int64_t t,
                                std::size_t slot, int resolution,
                                double magnitude) const;

  /// One optimization step over train-split rows `batch`.
  StepStats step(const std::vector<std::size_t> &batch, std::int64_t t,
                 double lr, double momentum, int resolution, double magnitude);

  /// Mean loss of a fixed pair of view batches, no update.
  double evaluate_loss(const Tensor<float> &view_i,
                       const Tensor<float> &view_j) const;

private:
  ExperimentConfig cfg_;
  Dataset data_;
  OptimizerState<float> opt_;
  bool selects_ = false;
};

/**
 * Runs a full training job. `on_epoch` is invoked after each epoch, before
 * any later failure, so callers can persist partial metrics. Numeric
 * failures are rethrown as NumericError prefixed with the iteration index.
 */
TrainResult train(const ExperimentConfig &cfg, const EpochCallback &on_epoch = {});

/// Range-test trainer: each call takes one step at the given rate with
/// momentum `cfg.momentum`, cycling through shuffled batches at full
/// resolution and the mean magnitude. Returns the step's minibatch loss and
/// the loss on a fixed held-out batch of `val_batch_size` eval images.
RangeTrainer make_range_trainer(const ExperimentConfig &cfg,
                                std::int64_t val_batch_size);

/// Training-cost plan implied by a config without running it.
TrainingPlan planned_training(const ExperimentConfig &cfg);

/// Analytic per-sample forward FLOPs of the config's model, every resolution
/// the config can emit included.
FlopsProfile model_profile(const ExperimentConfig &cfg);

} // namespace fastssl::sim
