// SPDX-License-Identifier: Apache-2.0
#include "fastssl/fastssl.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "fastssl/config.hpp"
#include "fastssl/cost_model.hpp"
#include "fastssl/experiment.hpp"
#include "fastssl/export.hpp"
#include "fastssl/hard_augment.hpp"
#include "fastssl/lr_range.hpp"
#include "fastssl/sim/checkpoint.hpp"
#include "fastssl/sim/trainer.hpp"

struct fastssl_config {
  fastssl::ExperimentConfig cfg;
};

namespace {

thread_local std::string g_last_error;

struct ArgumentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename F> fastssl_status guarded(F &&f) {
  try {
    f();
    g_last_error.clear();
    return FASTSSL_OK;
  } catch (const ArgumentError &e) {
    g_last_error = e.what();
    return FASTSSL_ERR_ARGUMENT;
  } catch (const fastssl::ConfigError &e) {
    g_last_error = e.what();
    return FASTSSL_ERR_CONFIG;
  } catch (const fastssl::RangeError &e) {
    g_last_error = e.what();
    return FASTSSL_ERR_RANGE;
  } catch (const fastssl::SelectionError &e) {
    g_last_error = e.what();
    return FASTSSL_ERR_SELECTION;
  } catch (const fastssl::NumericError &e) {
    g_last_error = e.what();
    return FASTSSL_ERR_NUMERIC;
  } catch (const fastssl::ProfileError &e) {
    g_last_error = e.what();
    return FASTSSL_ERR_PROFILE;
  } catch (const fastssl::IoError &e) {
    g_last_error = e.what();
    return FASTSSL_ERR_IO;
  } catch (const nlohmann::json::exception &e) {
    g_last_error = std::string("json: ") + e.what();
    return FASTSSL_ERR_ARGUMENT;
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
    return FASTSSL_ERR_INTERNAL;
  } catch (const std::exception &e) {
    g_last_error = e.what();
    return FASTSSL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return FASTSSL_ERR_INTERNAL;
  }
}

template <typename T> void need(T *p, const char *name) {
  if (!p)
    throw ArgumentError(std::string(name) + " is null");
}

char *dup_string(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out)
    throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

fastssl::FlopsProfile parse_profile(const std::string &text) {
  const auto j = nlohmann::json::parse(text);
  std::map<int, double> entries;
  for (const auto &[res, flops] : j.at("forward_flops").items()) {
    std::size_t used = 0;
    const int r = std::stoi(res, &used);
    if (used != res.size())
      throw fastssl::ProfileError("bad resolution key '" + res + "'");
    entries[r] = flops.get<double>();
  }
  return fastssl::FlopsProfile(entries, j.value("cost_ratio", 6.0));
}

struct LogBridge {
  fastssl_log_fn fn;
  void *user;
  void operator()(const std::string &line) const {
    if (fn)
      fn(line.c_str(), user);
  }
};

} // namespace

extern "C" {

const char *fastssl_version(void) { return "0.1.0"; }

const char *fastssl_status_name(fastssl_status status) {
  switch (status) {
  case FASTSSL_OK:
    return "ok";
  case FASTSSL_ERR_CONFIG:
    return "config error";
  case FASTSSL_ERR_RANGE:
    return "range error";
  case FASTSSL_ERR_SELECTION:
    return "selection error";
  case FASTSSL_ERR_NUMERIC:
    return "numeric error";
  case FASTSSL_ERR_PROFILE:
    return "profile error";
  case FASTSSL_ERR_IO:
    return "io error";
  case FASTSSL_ERR_ARGUMENT:
    return "argument error";
  case FASTSSL_ERR_INTERNAL:
    return "internal error";
  }
  return "unknown status";
}

const char *fastssl_last_error(void) { return g_last_error.c_str(); }

void fastssl_string_free(char *s) { std::free(s); }

fastssl_status fastssl_config_create(fastssl_config **out) {
  return guarded([&] {
    need(out, "out");
    *out = new fastssl_config{};
  });
}

fastssl_status fastssl_config_parse(const char *text, fastssl_config **out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new fastssl_config{fastssl::parse_config(text)};
  });
}

fastssl_status fastssl_config_load(const char *path, fastssl_config **out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new fastssl_config{fastssl::load_config_file(path)};
  });
}

fastssl_status fastssl_config_clone(const fastssl_config *cfg,
                                    fastssl_config **out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = new fastssl_config{cfg->cfg};
  });
}

void fastssl_config_destroy(fastssl_config *cfg) { delete cfg; }

fastssl_status fastssl_config_set(fastssl_config *cfg, const char *key,
                                  const char *value) {
  return guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    need(value, "value");
    fastssl::set_config_value(cfg->cfg, key, value);
  });
}

fastssl_status fastssl_config_get(const fastssl_config *cfg, const char *key,
                                  char **value) {
  return guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    need(value, "value");
    *value = dup_string(fastssl::get_config_value(cfg->cfg, key));
  });
}

fastssl_status fastssl_config_validate(const fastssl_config *cfg) {
  return guarded([&] {
    need(cfg, "cfg");
    cfg->cfg.validate();
  });
}

fastssl_status fastssl_config_render(const fastssl_config *cfg, char **text) {
  return guarded([&] {
    need(cfg, "cfg");
    need(text, "text");
    *text = dup_string(fastssl::render_config(cfg->cfg));
  });
}

fastssl_status fastssl_config_total_steps(const fastssl_config *cfg,
                                          int64_t *steps) {
  return guarded([&] {
    need(cfg, "cfg");
    need(steps, "steps");
    cfg->cfg.validate();
    *steps = cfg->cfg.total_steps();
  });
}

fastssl_status fastssl_config_apply_preset(fastssl_config *cfg,
                                           const char *preset) {
  return guarded([&] {
    need(cfg, "cfg");
    need(preset, "preset");
    const std::string p = preset;
    if (p == "baseline")
      cfg->cfg = fastssl::baseline_config(cfg->cfg);
    else if (p == "efficient")
      cfg->cfg = fastssl::efficient_config(cfg->cfg);
    else
      throw fastssl::ConfigError("preset must be baseline or efficient, got '" +
                                 p + "'");
  });
}

fastssl_status fastssl_schedule_at(const fastssl_config *cfg, int64_t step,
                                   fastssl_schedule_point *out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    cfg->cfg.validate();
    const auto sp = fastssl::evaluate_schedule(step, cfg->cfg.schedule_config());
    const auto cp = fastssl::curriculum_at(step, cfg->cfg.progressive_plan());
    *out = {step, sp.lr, sp.momentum, cp.resolution, cp.magnitude};
  });
}

fastssl_status fastssl_emit_schedule(const fastssl_config *cfg, const char *path) {
  return guarded([&] {
    need(cfg, "cfg");
    need(path, "path");
    fastssl::emit_schedule(cfg->cfg, path);
  });
}

fastssl_status fastssl_selection_overhead(int32_t train_resolution,
                                          int32_t selection_resolution,
                                          int32_t num_positives, double cost_ratio,
                                          double *speed_factor, double *overhead) {
  return guarded([&] {
    fastssl::SelectionConfig s;
    s.train_resolution = train_resolution;
    s.selection_resolution = selection_resolution;
    s.num_positives = num_positives;
    s.iteration_cost_ratio = cost_ratio;
    const auto r = fastssl::selection_overhead(s);
    if (speed_factor)
      *speed_factor = r.speed_factor;
    if (overhead)
      *overhead = r.overhead;
  });
}

fastssl_status fastssl_enumerate_pairs(int32_t num_positives, int32_t *pairs,
                                       size_t capacity, size_t *count) {
  return guarded([&] {
    need(count, "count");
    const auto all = fastssl::enumerate_pairs(num_positives);
    *count = all.size();
    if (all.size() > capacity)
      throw ArgumentError("capacity " + std::to_string(capacity) +
                          " is smaller than " + std::to_string(all.size()) +
                          " pairs");
    need(pairs, "pairs");
    for (std::size_t k = 0; k < all.size(); ++k) {
      pairs[2 * k] = all[k].i;
      pairs[2 * k + 1] = all[k].j;
    }
  });
}

fastssl_status fastssl_select_hardest(const double *losses, size_t num_losses,
                                      int32_t num_positives, int32_t *i,
                                      int32_t *j) {
  return guarded([&] {
    need(losses, "losses");
    need(i, "i");
    need(j, "j");
    const auto p = fastssl::select_hardest({losses, num_losses}, num_positives);
    *i = p.i;
    *j = p.j;
  });
}

fastssl_status fastssl_estimate_cost(const fastssl_config *baseline,
                                     const fastssl_config *efficient,
                                     const char *profile_json, char **table,
                                     char **json) {
  return guarded([&] {
    need(baseline, "baseline");
    need(efficient, "efficient");
    baseline->cfg.validate();
    efficient->cfg.validate();
    const auto profile =
        profile_json ? parse_profile(profile_json)
                     : fastssl::shared_profile(baseline->cfg, efficient->cfg);
    const auto report =
        fastssl::compare(fastssl::sim::planned_training(baseline->cfg),
                         fastssl::sim::planned_training(efficient->cfg), profile);
    std::string t, js;
    if (table)
      t = fastssl::format_report_table(report);
    if (json)
      js = fastssl::format_report_json(report);
    if (table)
      *table = dup_string(t);
    if (json)
      *json = dup_string(js);
  });
}

void fastssl_range_options_default(fastssl_range_options *opts) {
  if (!opts)
    return;
  const fastssl::RangeTestConfig d;
  opts->lr_lo = d.lr_lo;
  opts->lr_hi = d.lr_hi;
  opts->sweep_steps = d.sweep_steps;
  opts->val_batch_size = d.val_batch_size;
  opts->smoothing_coefficient = d.smoothing_coefficient;
  opts->divergence_factor = d.divergence_factor;
  opts->decrease_delta = d.decrease_delta;
  opts->persistence = d.persistence;
  // Negative-cosine losses live in [-1, 1].
  opts->loss_offset = 1.0;
}

fastssl_status fastssl_lr_find(const fastssl_config *cfg,
                               const fastssl_range_options *opts,
                               const char *trace_path, fastssl_range_result *out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(opts, "opts");
    need(out, "out");
    fastssl::RangeTestConfig rc;
    rc.lr_lo = opts->lr_lo;
    rc.lr_hi = opts->lr_hi;
    rc.sweep_steps = opts->sweep_steps;
    rc.val_batch_size = opts->val_batch_size;
    rc.smoothing_coefficient = opts->smoothing_coefficient;
    rc.divergence_factor = opts->divergence_factor;
    rc.decrease_delta = opts->decrease_delta;
    rc.persistence = opts->persistence;
    rc.loss_offset = opts->loss_offset;
    rc.validate();
    const auto trainer = fastssl::sim::make_range_trainer(cfg->cfg, rc.val_batch_size);
    const auto r = fastssl::run_range_test(trainer, rc);
    if (trace_path) {
      std::ofstream f(trace_path, std::ios::binary | std::ios::trunc);
      if (!f)
        throw fastssl::IoError(std::string("cannot open ") + trace_path);
      fastssl::write_range_trace(f, r);
      if (!f.flush())
        throw fastssl::IoError(std::string("failed writing ") + trace_path);
    }
    *out = {r.min_lr, r.max_lr, r.min_detected ? 1 : 0, r.diverged ? 1 : 0,
            r.divergence_step};
  });
}

fastssl_status fastssl_train(const fastssl_config *cfg, const char *out_dir,
                             fastssl_log_fn log, void *user,
                             fastssl_run_summary *out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out_dir, "out_dir");
    const fastssl::RunSpec run{"train", cfg->cfg};
    const auto s = fastssl::execute_run(run, fastssl::baseline_config(cfg->cfg),
                                        out_dir, LogBridge{log, user});
    if (out)
      *out = {s.knn_accuracy, s.cumulative_flops, s.baseline_flops, s.steps,
              s.embedding_std};
  });
}

fastssl_status fastssl_eval(const fastssl_config *cfg, const char *checkpoint_prefix,
                            int32_t k, double *accuracy) {
  return guarded([&] {
    need(cfg, "cfg");
    need(checkpoint_prefix, "checkpoint_prefix");
    need(accuracy, "accuracy");
    cfg->cfg.validate();
    if (k < 1)
      throw fastssl::ConfigError("k must be positive");
    const auto params = fastssl::sim::load_checkpoint(checkpoint_prefix);
    const auto ds =
        fastssl::sim::generate_dataset(fastssl::sim::dataset_config(cfg->cfg));
    *accuracy = fastssl::sim::knn_probe(params, ds, k);
  });
}

fastssl_status fastssl_preset_names(char **names) {
  return guarded([&] {
    need(names, "names");
    std::string s;
    for (auto n : fastssl::preset_names())
      s += (s.empty() ? "" : ",") + std::string(n);
    *names = dup_string(s);
  });
}

fastssl_status fastssl_experiment(const fastssl_config *base, const char *preset,
                                  const char *const *keys,
                                  const char *const *values, size_t num_overrides,
                                  const char *out_dir, fastssl_log_fn log,
                                  void *user, char **summary) {
  return guarded([&] {
    need(base, "base");
    need(preset, "preset");
    need(out_dir, "out_dir");
    fastssl::Overrides ov;
    if (num_overrides > 0) {
      need(keys, "keys");
      need(values, "values");
    }
    for (std::size_t k = 0; k < num_overrides; ++k) {
      need(keys[k], "override key");
      need(values[k], "override value");
      ov.emplace_back(keys[k], values[k]);
    }
    const auto runs =
        fastssl::run_preset(preset, base->cfg, ov, out_dir, LogBridge{log, user});
    if (summary)
      *summary = dup_string(fastssl::format_summary_table(runs));
  });
}

} // extern "C"
