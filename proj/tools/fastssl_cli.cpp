// SPDX-License-Identifier: Apache-2.0
/**
 * @file   fastssl_cli.cpp
 * @brief  Command-line front end over the C API.
 *
 * Config keys can be overridden on any config-taking subcommand with
 * `--key value` or `--key=value`; dashes in keys are read as underscores.
 * FASTSSL_OUT_DIR sets the root for default output locations.
 */
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "fastssl/fastssl.h"

namespace {

struct Failure {
  fastssl_status status;
};

void check(fastssl_status s) {
  if (s != FASTSSL_OK)
    throw Failure{s};
}

struct ConfigDeleter {
  void operator()(fastssl_config *c) const { fastssl_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<fastssl_config, ConfigDeleter>;

struct StringDeleter {
  void operator()(char *s) const { fastssl_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

std::string out_root() {
  const char *env = std::getenv("FASTSSL_OUT_DIR");
  return env && *env ? env : "runs";
}

std::string join_path(const std::string &a, const std::string &b) {
  if (a.empty() || a.back() == '/')
    return a + b;
  return a + "/" + b;
}

void print_log(const char *line, void *) {
  std::fprintf(stderr, "%s\n", line);
}

using Overrides = std::vector<std::pair<std::string, std::string>>;

// Turns leftover `--key value` / `--key=value` tokens into config overrides.
Overrides parse_overrides(const std::vector<std::string> &extras) {
  Overrides out;
  for (std::size_t k = 0; k < extras.size(); ++k) {
    const std::string &tok = extras[k];
    if (tok.rfind("--", 0) != 0)
      throw CLI::ExtrasError("unexpected argument '" + tok + "'",
                             std::vector<std::string>{tok});
    std::string key = tok.substr(2), value;
    const auto eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (k + 1 >= extras.size())
        throw CLI::ExtrasError("missing value for '" + tok + "'",
                               std::vector<std::string>{tok});
      value = extras[++k];
    }
    for (auto &ch : key)
      if (ch == '-')
        ch = '_';
    out.emplace_back(key, value);
  }
  return out;
}

ConfigPtr load_config(const std::string &path, const std::string &preset,
                      const Overrides &overrides) {
  fastssl_config *raw = nullptr;
  check(path.empty() ? fastssl_config_create(&raw) : fastssl_config_load(path.c_str(), &raw));
  ConfigPtr cfg(raw);
  if (!preset.empty())
    check(fastssl_config_apply_preset(cfg.get(), preset.c_str()));
  for (const auto &[k, v] : overrides)
    check(fastssl_config_set(cfg.get(), k.c_str(), v.c_str()));
  check(fastssl_config_validate(cfg.get()));
  return cfg;
}

int exit_code(fastssl_status s) {
  switch (s) {
  case FASTSSL_ERR_CONFIG:
  case FASTSSL_ERR_ARGUMENT:
  case FASTSSL_ERR_RANGE:
    return 2;
  case FASTSSL_ERR_IO:
    return 3;
  case FASTSSL_ERR_NUMERIC:
    return 4;
  default:
    return 1;
  }
}

struct ConfigOpts {
  std::string config_path;
  std::string preset;
};

// Lists every config key with its default, taken from the rendered defaults.
std::string config_footer() {
  static const std::string text = [] {
    std::string out = "Any config key may be overridden as --key value (dashes or underscores).\n"
                      "Keys and defaults:\n";
    fastssl_config *cfg = nullptr;
    char *rendered = nullptr;
    if (fastssl_config_create(&cfg) == FASTSSL_OK &&
        fastssl_config_render(cfg, &rendered) == FASTSSL_OK) {
      std::istringstream lines(rendered);
      for (std::string line; std::getline(lines, line);)
        if (!line.empty() && line[0] != '#')
          out += "  " + line + "\n";
    }
    fastssl_string_free(rendered);
    fastssl_config_destroy(cfg);
    return out;
  }();
  return text;
}

void add_config_opts(CLI::App *cmd, ConfigOpts &o, bool with_preset = true) {
  cmd->add_option("-c,--config", o.config_path, "Config file (key = value lines)")
      ->check(CLI::ExistingFile);
  if (with_preset)
    cmd->add_option("--preset", o.preset, "Start from the baseline or efficient preset")
        ->check(CLI::IsMember({"baseline", "efficient"}));
  cmd->allow_extras();
  cmd->footer(config_footer());
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Efficient self-supervised training toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fastssl_version()));

  // emit-schedule
  ConfigOpts emit_opts;
  std::string emit_out;
  auto *emit = app.add_subcommand("emit-schedule", "Write the lr/momentum/resolution/magnitude trace");
  add_config_opts(emit, emit_opts);
  emit->add_option("-o,--out", emit_out, "CSV path (default $FASTSSL_OUT_DIR/schedule.csv, '-' for stdout)");

  // estimate-cost
  ConfigOpts cost_opts;
  std::string cost_baseline, cost_profile;
  bool cost_json = false;
  auto *cost = app.add_subcommand("estimate-cost", "Compare training FLOPs against a baseline");
  add_config_opts(cost, cost_opts);
  cost->add_option("--baseline-config", cost_baseline,
                   "Baseline config file (default: baseline preset of the config)")
      ->check(CLI::ExistingFile);
  cost->add_option("--profile", cost_profile,
                   "JSON FLOPs profile {\"cost_ratio\":C,\"forward_flops\":{\"res\":flops}}")
      ->check(CLI::ExistingFile);
  cost->add_flag("--json", cost_json, "Print the machine-readable record");

  // overhead
  int ov_res = 224, ov_sel = 64, ov_m = 4;
  double ov_c = 6.0;
  auto *overhead = app.add_subcommand("overhead", "Hard-augment selection overhead");
  overhead->add_option("--res", ov_res, "Training resolution")->capture_default_str();
  overhead->add_option("--sel-res", ov_sel, "Selection resolution")->capture_default_str();
  overhead->add_option("--num-positives", ov_m, "Views per sample")->capture_default_str();
  overhead->add_option("--cost-ratio", ov_c, "Training cost in forward passes")->capture_default_str();

  // pairs
  int pairs_m = 4;
  auto *pairs = app.add_subcommand("pairs", "List candidate view pairs");
  pairs->add_option("--num-positives", pairs_m, "Views per sample")->capture_default_str();

  // lr-find
  ConfigOpts lr_opts;
  fastssl_range_options range;
  fastssl_range_options_default(&range);
  std::string lr_trace;
  auto *lrfind = app.add_subcommand("lr-find", "Learning-rate range test");
  add_config_opts(lrfind, lr_opts);
  lrfind->add_option("--lr-lo", range.lr_lo, "First learning rate")->capture_default_str();
  lrfind->add_option("--lr-hi", range.lr_hi, "Last learning rate")->capture_default_str();
  lrfind->add_option("--steps", range.sweep_steps, "Sweep length")->capture_default_str();
  lrfind->add_option("--val-batch", range.val_batch_size, "Held-out batch size")->capture_default_str();
  lrfind->add_option("--smoothing", range.smoothing_coefficient, "EMA coefficient")->capture_default_str();
  lrfind->add_option("--divergence-factor", range.divergence_factor)->capture_default_str();
  lrfind->add_option("--decrease-delta", range.decrease_delta)->capture_default_str();
  lrfind->add_option("--persistence", range.persistence)->capture_default_str();
  lrfind->add_option("--loss-offset", range.loss_offset)->capture_default_str();
  lrfind->add_option("--trace", lr_trace, "CSV trace path (default $FASTSSL_OUT_DIR/lr_find.csv)");

  // train
  ConfigOpts train_opts;
  std::string train_out;
  auto *train = app.add_subcommand("train", "Train one configuration");
  add_config_opts(train, train_opts);
  train->add_option("-o,--out", train_out, "Run directory (default $FASTSSL_OUT_DIR/train)");

  // eval
  ConfigOpts eval_opts;
  std::string eval_ckpt;
  int eval_k = 20;
  auto *eval = app.add_subcommand("eval", "kNN accuracy of a checkpoint");
  add_config_opts(eval, eval_opts);
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint prefix (without .manifest/.bin)")
      ->required();
  eval->add_option("-k", eval_k, "Neighbours")->capture_default_str();

  // experiment
  ConfigOpts exp_opts;
  std::string exp_name, exp_out;
  std::vector<std::string> exp_seeds;
  auto *exp = app.add_subcommand("experiment", "Run a named preset");
  add_config_opts(exp, exp_opts, false);
  exp->add_option("preset", exp_name, "Preset name")->required();
  exp->add_option("--seeds", exp_seeds, "Run the preset once per seed")->delimiter(',');
  exp->add_option("-o,--out", exp_out, "Output directory (default $FASTSSL_OUT_DIR/<preset>)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  try {
    if (*emit) {
      auto cfg = load_config(emit_opts.config_path, emit_opts.preset,
                             parse_overrides(emit->remaining()));
      if (emit_out == "-") {
        int64_t steps = 0;
        check(fastssl_config_total_steps(cfg.get(), &steps));
        std::printf("step,lr,momentum,resolution,aug_magnitude\n");
        for (int64_t t = 0; t <= steps; ++t) {
          fastssl_schedule_point p;
          check(fastssl_schedule_at(cfg.get(), t, &p));
          std::printf("%lld,%.9g,%.9g,%d,%.9g\n", static_cast<long long>(t), p.lr,
                      p.momentum, p.resolution, p.magnitude);
        }
      } else {
        const std::string path =
            emit_out.empty() ? join_path(out_root(), "schedule.csv") : emit_out;
        check(fastssl_emit_schedule(cfg.get(), path.c_str()));
        std::printf("wrote %s\n", path.c_str());
      }
    } else if (*cost) {
      const auto ov = parse_overrides(cost->remaining());
      auto eff = load_config(cost_opts.config_path,
                             cost_opts.preset.empty() ? "" : cost_opts.preset, ov);
      ConfigPtr base;
      if (cost_baseline.empty()) {
        fastssl_config *raw = nullptr;
        check(fastssl_config_clone(eff.get(), &raw));
        base.reset(raw);
        check(fastssl_config_apply_preset(base.get(), "baseline"));
      } else {
        base = load_config(cost_baseline, "", {});
      }
      std::string profile;
      if (!cost_profile.empty()) {
        std::ifstream in(cost_profile);
        std::stringstream ss;
        ss << in.rdbuf();
        profile = ss.str();
      }
      char *table = nullptr, *json = nullptr;
      check(fastssl_estimate_cost(base.get(), eff.get(),
                                  profile.empty() ? nullptr : profile.c_str(),
                                  &table, &json));
      OwnedString t(table), j(json);
      std::printf("%s\n", cost_json ? j.get() : t.get());
    } else if (*overhead) {
      double speed = 0, frac = 0;
      check(fastssl_selection_overhead(ov_res, ov_sel, ov_m, ov_c, &speed, &frac));
      std::printf("train resolution      %d\n", ov_res);
      std::printf("selection resolution  %d\n", ov_sel);
      std::printf("positives             %d (%d pairs)\n", ov_m, ov_m * (ov_m - 1) / 2);
      std::printf("cost ratio            %g\n", ov_c);
      std::printf("speed factor          %.6f\n", speed);
      std::printf("overhead              %.1f%% (%.4f%%)\n", 100.0 * frac, 100.0 * frac);
    } else if (*pairs) {
      size_t count = 0;
      fastssl_status s = fastssl_enumerate_pairs(pairs_m, nullptr, 0, &count);
      if (s != FASTSSL_OK && s != FASTSSL_ERR_ARGUMENT)
        throw Failure{s};
      std::vector<int32_t> buf(2 * count);
      check(fastssl_enumerate_pairs(pairs_m, buf.data(), count, &count));
      for (size_t k = 0; k < count; ++k)
        std::printf("%zu: (%d, %d)\n", k, buf[2 * k], buf[2 * k + 1]);
      std::printf("%zu pairs\n", count);
    } else if (*lrfind) {
      auto cfg = load_config(lr_opts.config_path, lr_opts.preset,
                             parse_overrides(lrfind->remaining()));
      const std::string trace =
          lr_trace.empty() ? join_path(out_root(), "lr_find.csv") : lr_trace;
      fastssl_range_result r;
      check(fastssl_lr_find(cfg.get(), &range, trace.c_str(), &r));
      std::printf("min_lr %.6g%s\n", r.min_lr, r.min_detected ? "" : " (not detected, sweep start)");
      std::printf("max_lr %.6g%s\n", r.max_lr, r.diverged ? "" : " (no divergence within sweep)");
      if (r.diverged)
        std::printf("diverged at step %lld\n", static_cast<long long>(r.divergence_step));
      std::printf("trace %s\n", trace.c_str());
    } else if (*train) {
      auto cfg = load_config(train_opts.config_path, train_opts.preset,
                             parse_overrides(train->remaining()));
      const std::string dir = train_out.empty() ? join_path(out_root(), "train") : train_out;
      fastssl_run_summary s;
      check(fastssl_train(cfg.get(), dir.c_str(), print_log, nullptr, &s));
      std::printf("knn_accuracy %.4f\n", s.knn_accuracy);
      std::printf("cumulative_flops %.6g (%.1f%% of baseline)\n", s.cumulative_flops,
                  100.0 * s.cumulative_flops / s.baseline_flops);
      std::printf("run %s\n", dir.c_str());
    } else if (*eval) {
      auto cfg = load_config(eval_opts.config_path, eval_opts.preset,
                             parse_overrides(eval->remaining()));
      double acc = 0;
      check(fastssl_eval(cfg.get(), eval_ckpt.c_str(), eval_k, &acc));
      std::printf("knn_accuracy %.4f\n", acc);
    } else if (*exp) {
      auto ov = parse_overrides(exp->remaining());
      auto base = load_config(exp_opts.config_path, "", {});
      if (exp_seeds.empty()) {
        std::string seed;
        for (const auto &[k, v] : ov)
          if (k == "seed")
            seed = v;
        exp_seeds.push_back(seed);
      }
      const std::string root =
          exp_out.empty() ? join_path(out_root(), exp_name) : exp_out;
      for (const auto &seed : exp_seeds) {
        Overrides run_ov = ov;
        std::string dir = root;
        if (!seed.empty()) {
          run_ov.emplace_back("seed", seed);
          if (exp_seeds.size() > 1)
            dir = join_path(root, "seed" + seed);
        }
        std::vector<const char *> keys, values;
        for (const auto &[k, v] : run_ov) {
          keys.push_back(k.c_str());
          values.push_back(v.c_str());
        }
        char *summary = nullptr;
        check(fastssl_experiment(base.get(), exp_name.c_str(), keys.data(),
                                 values.data(), keys.size(), dir.c_str(), print_log,
                                 nullptr, &summary));
        OwnedString s(summary);
        std::printf("%s", s.get());
        std::printf("results in %s\n", dir.c_str());
      }
    }
  } catch (const Failure &f) {
    std::fprintf(stderr, "error: %s: %s\n", fastssl_status_name(f.status),
                 fastssl_last_error());
    return exit_code(f.status);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }
  return 0;
}
