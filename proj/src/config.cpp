// SPDX-License-Identifier: Apache-2.0
#include "fastssl/config.hpp"

#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace fastssl {

ConfigFieldError::ConfigFieldError(std::string key, const std::string &message,
                                   int line)
    : ConfigError(line > 0 ? "line " + std::to_string(line) + ": " + key +
                                 ": " + message
                           : key + ": " + message),
      key_(std::move(key)), message_(message), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename Int> Int parse_int(std::string_view key, std::string_view v) {
  Int out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigFieldError(std::string(key),
                           "expected an integer, got '" + std::string(v) + "'");
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigFieldError(std::string(key),
                           "expected a number, got '" + std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on")
    return true;
  if (v == "false" || v == "0" || v == "no" || v == "off")
    return false;
  throw ConfigFieldError(std::string(key),
                         "expected true/false, got '" + std::string(v) + "'");
}

std::string render_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::string_view key;
  std::function<void(ExperimentConfig &, std::string_view)> set;
  std::function<std::string(const ExperimentConfig &)> get;
};

#define INT_FIELD(name)                                                        \
  Field {                                                                      \
    #name,                                                                     \
        [](ExperimentConfig &c, std::string_view v) {                          \
          c.name = parse_int<decltype(c.name)>(#name, v);                      \
        },                                                                     \
        [](const ExperimentConfig &c) { return std::to_string(c.name); }       \
  }
#define DOUBLE_FIELD(name)                                                     \
  Field {                                                                      \
    #name,                                                                     \
        [](ExperimentConfig &c, std::string_view v) {                          \
          c.name = parse_double(#name, v);                                     \
        },                                                                     \
        [](const ExperimentConfig &c) { return render_double(c.name); }        \
  }
#define BOOL_FIELD(name)                                                       \
  Field {                                                                      \
    #name,                                                                     \
        [](ExperimentConfig &c, std::string_view v) {                          \
          c.name = parse_bool(#name, v);                                       \
        },                                                                     \
        [](const ExperimentConfig &c) {                                        \
          return std::string(c.name ? "true" : "false");                       \
        }                                                                      \
  }

const std::vector<Field> &fields() {
  static const std::vector<Field> table = {
      INT_FIELD(seed),
      INT_FIELD(num_classes),
      INT_FIELD(samples_per_class),
      INT_FIELD(canvas_size),
      INT_FIELD(image_size),
      DOUBLE_FIELD(data_noise_std),
      INT_FIELD(epochs),
      INT_FIELD(batch_size),
      DOUBLE_FIELD(weight_decay),
      DOUBLE_FIELD(lr),
      Field{"schedule",
            [](ExperimentConfig &c, std::string_view v) {
              try {
                c.schedule = parse_schedule_kind(v);
              } catch (const ConfigError &e) {
                throw ConfigFieldError("schedule", e.what());
              }
            },
            [](const ExperimentConfig &c) {
              return std::string(to_string(c.schedule));
            }},
      INT_FIELD(warmup_epochs),
      DOUBLE_FIELD(phase_fraction),
      DOUBLE_FIELD(beta_low),
      DOUBLE_FIELD(beta_high),
      DOUBLE_FIELD(momentum),
      BOOL_FIELD(progressive),
      INT_FIELD(res_min),
      INT_FIELD(res_max),
      INT_FIELD(res_quantum),
      INT_FIELD(num_stages),
      DOUBLE_FIELD(mag_min),
      DOUBLE_FIELD(mag_max),
      DOUBLE_FIELD(crop_scale_min),
      BOOL_FIELD(hard_augment),
      INT_FIELD(num_positives),
      INT_FIELD(selection_resolution),
      DOUBLE_FIELD(cost_ratio),
      INT_FIELD(conv1_channels),
      INT_FIELD(conv2_channels),
      INT_FIELD(conv3_channels),
      INT_FIELD(proj_hidden),
      INT_FIELD(embed_dim),
      INT_FIELD(pred_hidden),
      INT_FIELD(knn_k),
      INT_FIELD(knn_every),
  };
  return table;
}

#undef INT_FIELD
#undef DOUBLE_FIELD
#undef BOOL_FIELD

const Field &find_field(std::string_view key) {
  for (const auto &f : fields())
    if (f.key == key)
      return f;
  throw ConfigFieldError(std::string(key), "unknown key");
}

void require(bool ok, const char *key, const std::string &message) {
  if (!ok)
    throw ConfigFieldError(key, message);
}

} // namespace

std::vector<std::string_view> config_keys() {
  std::vector<std::string_view> keys;
  for (const auto &f : fields())
    keys.push_back(f.key);
  return keys;
}

void set_config_value(ExperimentConfig &cfg, std::string_view key,
                      std::string_view value) {
  find_field(key).set(cfg, trim(value));
}

std::string get_config_value(const ExperimentConfig &cfg, std::string_view key) {
  return find_field(key).get(cfg);
}

void ExperimentConfig::validate() const {
  require(num_classes >= 1, "num_classes", "must be at least 1");
  require(samples_per_class >= 2, "samples_per_class", "must be at least 2");
  require(image_size >= 8, "image_size", "must be at least 8");
  require(canvas_size >= image_size, "canvas_size",
          "must be at least image_size");
  require(data_noise_std >= 0.0, "data_noise_std", "must be nonnegative");
  require(epochs >= 1, "epochs", "must be at least 1");
  require(batch_size >= 2, "batch_size", "must be at least 2");
  require(weight_decay >= 0.0, "weight_decay", "must be nonnegative");
  require(lr > 0.0, "lr", "must be positive");
  require(warmup_epochs >= 0, "warmup_epochs", "must be nonnegative");
  require(beta_low >= 0.0 && beta_low < 1.0, "beta_low", "must lie in [0, 1)");
  require(beta_high >= 0.0 && beta_high < 1.0, "beta_high",
          "must lie in [0, 1)");
  require(beta_low <= beta_high, "beta_high",
          "must not be smaller than beta_low");
  require(momentum >= 0.0 && momentum < 1.0, "momentum", "must lie in [0, 1)");
  require(phase_fraction > 0.0 && phase_fraction < 1.0, "phase_fraction",
          "must lie in (0, 1)");
  const bool warm = schedule == ScheduleKind::FixedOneCycle ||
                    schedule == ScheduleKind::CosineWarmup;
  if (warm) {
    require(warmup_epochs >= 1, "warmup_epochs",
            "must be at least 1 for warm-up schedules");
    require(warmup_epochs < epochs, "warmup_epochs", "must be below epochs");
  }
  require(res_quantum >= 1, "res_quantum", "must be positive");
  require(res_min >= 8, "res_min", "must be at least 8");
  require(res_max <= image_size, "res_max", "must not exceed image_size");
  require(res_min <= res_max, "res_max", "must not be smaller than res_min");
  require(res_min % res_quantum == 0, "res_min", "must be a multiple of res_quantum");
  require(res_max % res_quantum == 0, "res_max", "must be a multiple of res_quantum");
  require(num_stages >= 0, "num_stages", "must be nonnegative");
  require(mag_min >= 0.0, "mag_min", "must be nonnegative");
  require(mag_min <= mag_max, "mag_max", "must not be smaller than mag_min");
  require(crop_scale_min > 0.0 && crop_scale_min <= 1.0, "crop_scale_min",
          "must lie in (0, 1]");
  require(num_positives >= 2, "num_positives", "must be at least 2");
  require(selection_resolution >= 8, "selection_resolution",
          "must be at least 8");
  require(selection_resolution <= res_min, "selection_resolution",
          "must not exceed res_min");
  require(cost_ratio > 0.0, "cost_ratio", "must be positive");
  require(conv1_channels >= 1 && conv2_channels >= 1 && conv3_channels >= 1,
          "conv1_channels", "conv widths must be positive");
  require(proj_hidden >= 1, "proj_hidden", "must be positive");
  require(embed_dim >= 1, "embed_dim", "must be positive");
  require(pred_hidden >= 1, "pred_hidden", "must be positive");
  require(knn_k >= 1, "knn_k", "must be positive");
  require(knn_every >= 1, "knn_every", "must be positive");
  require(iterations_per_epoch() >= 1, "batch_size",
          "exceeds the training split");
  require(static_cast<std::int64_t>(knn_k) <
              static_cast<std::int64_t>(num_classes) * samples_per_class,
          "knn_k", "exceeds the reference set");
}

std::int64_t ExperimentConfig::iterations_per_epoch() const {
  const std::int64_t per_class =
      static_cast<std::int64_t>(0.8 * samples_per_class + 0.5);
  return per_class * num_classes / batch_size;
}

std::int64_t ExperimentConfig::total_steps() const {
  return iterations_per_epoch() * epochs;
}

ScheduleConfig ExperimentConfig::schedule_config() const {
  ScheduleConfig s;
  s.kind = schedule;
  s.total_steps = total_steps();
  s.warmup_steps = static_cast<std::int64_t>(warmup_epochs) * iterations_per_epoch();
  if (schedule == ScheduleKind::CosineAnnealing ||
      schedule == ScheduleKind::OneCycle)
    s.warmup_steps = 0;
  s.phase_fraction = phase_fraction;
  s.lr_max = lr;
  s.beta_low = beta_low;
  s.beta_high = beta_high;
  s.momentum = momentum;
  return s;
}

ProgressivePlan ExperimentConfig::progressive_plan() const {
  ProgressivePlan p;
  p.total_steps = total_steps();
  p.warmup_steps = static_cast<std::int64_t>(warmup_epochs) * iterations_per_epoch();
  if (p.warmup_steps >= p.total_steps)
    p.warmup_steps = 0;
  p.res_min = progressive ? res_min : res_max;
  p.res_max = res_max;
  p.quantum = res_quantum;
  p.num_stages = progressive ? num_stages : 1;
  p.mag_min = mag_min;
  p.mag_max = mag_max;
  return p;
}

SelectionConfig ExperimentConfig::selection_config() const {
  SelectionConfig s;
  s.num_positives = num_positives;
  s.selection_resolution = selection_resolution;
  s.train_resolution = res_max;
  s.iteration_cost_ratio = cost_ratio;
  return s;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::map<std::string, int, std::less<>> lines;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigFieldError(std::string(line), "expected 'key = value'",
                             line_no);
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigFieldError &e) {
      throw ConfigFieldError(e.key(), e.message(), line_no);
    }
    lines[std::string(key)] = line_no;
  }
  try {
    cfg.validate();
  } catch (const ConfigFieldError &e) {
    const auto it = lines.find(e.key());
    const int at = it == lines.end() ? 0 : it->second;
    throw ConfigFieldError(e.key(), e.message(), at);
  }
  return cfg;
}

std::string render_config(const ExperimentConfig &cfg) {
  std::string out;
  for (const auto &f : fields()) {
    out += f.key;
    out += " = ";
    out += f.get(cfg);
    out += '\n';
  }
  return out;
}

ExperimentConfig load_config_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

} // namespace fastssl
