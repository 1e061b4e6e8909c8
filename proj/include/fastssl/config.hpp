// SPDX-License-Identifier: Apache-2.0
/**
 * @file   config.hpp
 * @brief  Flat experiment configuration: parsing, rendering, validation.
 *
 * Text format: one `key = value` per line, `#` starts a comment. Unknown keys
 * are rejected. Missing keys keep their defaults, which describe the desk-scale
 * analogue of the efficient Imagenette setup (F1-CLR, progressive
 * resolution/magnitude, hard augment).
 */
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fastssl/curriculum.hpp"
#include "fastssl/error.hpp"
#include "fastssl/hard_augment.hpp"
#include "fastssl/schedule.hpp"

namespace fastssl {

/// ConfigError that carries the offending key and, once known, its line.
class ConfigFieldError : public ConfigError {
public:
  ConfigFieldError(std::string key, const std::string &message, int line = 0);
  const std::string &key() const { return key_; }
  const std::string &message() const { return message_; }
  int line() const { return line_; }

private:
  std::string key_;
  std::string message_;
  int line_;
};

struct ExperimentConfig {
  // Run identity.
  std::uint64_t seed = 1;

  // Synthetic dataset.
  int num_classes = 8;
  int samples_per_class = 250;
  int canvas_size = 48;
  int image_size = 32;
  double data_noise_std = 0.05;

  // Optimizer and schedule.
  int epochs = 24;
  int batch_size = 64;
  double weight_decay = 5e-4;
  double lr = 0.1;
  ScheduleKind schedule = ScheduleKind::FixedOneCycle;
  int warmup_epochs = 4;
  double phase_fraction = 0.3;
  double beta_low = 0.85;
  double beta_high = 0.95;
  double momentum = 0.9;

  // Progressive resolution and augmentation magnitude.
  bool progressive = true;
  int res_min = 16;
  int res_max = 32;
  int res_quantum = 4;
  int num_stages = 0;
  double mag_min = 4.0;
  double mag_max = 6.0;
  double crop_scale_min = 0.2;

  // Hard augment.
  bool hard_augment = true;
  int num_positives = 6;
  int selection_resolution = 8;
  double cost_ratio = 6.0;

  // Model.
  int conv1_channels = 16;
  int conv2_channels = 32;
  int conv3_channels = 64;
  int proj_hidden = 128;
  int embed_dim = 64;
  int pred_hidden = 32;

  // Probe.
  int knn_k = 20;
  int knn_every = 10;

  /// Throws ConfigFieldError naming the key at fault.
  void validate() const;

  /// Training iterations per epoch (drop-last batching over the train split).
  std::int64_t iterations_per_epoch() const;
  std::int64_t total_steps() const;

  ScheduleConfig schedule_config() const;
  ProgressivePlan progressive_plan() const;
  SelectionConfig selection_config() const;

  friend bool operator==(const ExperimentConfig &,
                         const ExperimentConfig &) = default;
};

/// Names of every accepted key, in render order.
std::vector<std::string_view> config_keys();

/// Assigns one key from its textual value. Throws ConfigFieldError.
void set_config_value(ExperimentConfig &cfg, std::string_view key,
                      std::string_view value);

std::string get_config_value(const ExperimentConfig &cfg, std::string_view key);

/// Parses `key = value` text over the defaults and validates the result.
ExperimentConfig parse_config(std::string_view text);

/// Renders every key; parse_config(render_config(c)) == c.
std::string render_config(const ExperimentConfig &cfg);

ExperimentConfig load_config_file(const std::string &path);

} // namespace fastssl
