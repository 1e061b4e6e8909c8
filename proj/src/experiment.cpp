// SPDX-License-Identifier: Apache-2.0
#include "fastssl/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fastssl/export.hpp"
#include "fastssl/sim/checkpoint.hpp"
#include "fastssl/sim/model.hpp"
#include "fastssl/sim/trainer.hpp"

namespace fastssl {

namespace fs = std::filesystem;

void apply_overrides(ExperimentConfig &cfg, const Overrides &overrides) {
  for (const auto &[key, value] : overrides)
    set_config_value(cfg, key, value);
}

ExperimentConfig baseline_config(const ExperimentConfig &base) {
  ExperimentConfig c = base;
  c.epochs = kBaselineEpochs;
  c.lr = 0.05;
  c.schedule = ScheduleKind::CosineAnnealing;
  c.warmup_epochs = 0;
  c.momentum = 0.9;
  c.progressive = false;
  c.mag_min = 5.0;
  c.mag_max = 5.0;
  c.hard_augment = false;
  c.num_positives = 2;
  return c;
}

ExperimentConfig efficient_config(const ExperimentConfig &base) {
  ExperimentConfig c = base;
  c.epochs = kEfficientEpochs;
  c.lr = 0.1;
  c.schedule = ScheduleKind::FixedOneCycle;
  c.warmup_epochs = kEfficientWarmupEpochs;
  c.beta_low = 0.85;
  c.beta_high = 0.95;
  c.progressive = true;
  c.res_min = 16;
  c.res_max = 32;
  c.res_quantum = 4;
  c.mag_min = 4.0;
  c.mag_max = 6.0;
  c.hard_augment = true;
  c.num_positives = 4;
  c.selection_resolution = 8;
  return c;
}

std::vector<std::string_view> preset_names() {
  return {"baseline",   "efficient",         "ablation-components",
          "aug-res-grid", "curriculum-bounds", "f1clr-lengths"};
}

namespace {

std::string num_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// One row of the component toggle matrix. Rows other than the baseline get
// the efficient epoch budget; rows without the curriculum keep magnitude 5.
ExperimentConfig component_row(const ExperimentConfig &base, bool f1clr,
                               bool progressive, bool hard) {
  if (!f1clr && !progressive && !hard)
    return baseline_config(base);
  ExperimentConfig c = efficient_config(base);
  if (!f1clr) {
    c.schedule = ScheduleKind::CosineAnnealing;
    c.lr = 0.05;
    c.momentum = 0.9;
  }
  if (!progressive) {
    c.progressive = false;
    c.mag_min = 5.0;
    c.mag_max = 5.0;
  }
  if (!hard) {
    c.hard_augment = false;
    c.num_positives = 2;
  }
  return c;
}

std::vector<RunSpec> expand(std::string_view preset, const ExperimentConfig &base) {
  std::vector<RunSpec> runs;
  if (preset == "baseline") {
    runs.push_back({"baseline", baseline_config(base)});
  } else if (preset == "efficient") {
    runs.push_back({"efficient", efficient_config(base)});
  } else if (preset == "ablation-components") {
    runs.push_back({"ca", component_row(base, false, false, false)});
    runs.push_back({"f1clr", component_row(base, true, false, false)});
    runs.push_back({"ca+ha", component_row(base, false, false, true)});
    runs.push_back({"f1clr+sp", component_row(base, true, true, false)});
    runs.push_back({"f1clr+ha", component_row(base, true, false, true)});
    runs.push_back({"f1clr+sp+ha", component_row(base, true, true, true)});
  } else if (preset == "aug-res-grid") {
    // Fixed resolution and magnitude per run, cosine annealing.
    for (int res : {16, 24, 32})
      for (double mag : {3.0, 5.0, 7.0, 10.0, 15.0}) {
        ExperimentConfig c = baseline_config(base);
        c.epochs = kEfficientEpochs;
        c.res_min = res;
        c.res_max = res;
        c.selection_resolution = 8;
        c.mag_min = mag;
        c.mag_max = mag;
        runs.push_back({"r" + std::to_string(res) + "-m" + num_label(mag), c});
      }
  } else if (preset == "curriculum-bounds") {
    const std::pair<double, double> bounds[] = {{5, 5}, {2.5, 4}, {3, 4},
                                                {4, 5}, {5, 6},   {4, 6}};
    for (const auto &[lo, hi] : bounds) {
      ExperimentConfig c = efficient_config(base);
      c.mag_min = lo;
      c.mag_max = hi;
      runs.push_back({"mag" + num_label(lo) + "-" + num_label(hi), c});
    }
  } else if (preset == "f1clr-lengths") {
    // Same warm-up, different total lengths: the warm-up traces coincide.
    for (int epochs : {12, 16, 24, 32, 40}) {
      ExperimentConfig c = component_row(base, true, false, false);
      c.epochs = epochs;
      runs.push_back({"f1clr-e" + std::to_string(epochs), c});
    }
  } else {
    std::string known;
    for (auto n : preset_names())
      known += (known.empty() ? "" : ", ") + std::string(n);
    throw ConfigError("unknown preset '" + std::string(preset) + "' (known: " +
                      known + ")");
  }
  return runs;
}

} // namespace

std::vector<RunSpec> preset_runs(std::string_view preset,
                                 const ExperimentConfig &base,
                                 const Overrides &overrides) {
  auto runs = expand(preset, base);
  for (auto &r : runs) {
    apply_overrides(r.config, overrides);
    try {
      r.config.validate();
    } catch (const ConfigError &e) {
      throw ConfigError(r.name + ": " + e.what());
    }
  }
  return runs;
}

FlopsProfile shared_profile(const ExperimentConfig &a, const ExperimentConfig &b) {
  if (!(sim::model_spec(a) == sim::model_spec(b)))
    throw ConfigError("cost comparison needs the same model on both sides");
  std::set<int> res;
  for (const auto *c : {&a, &b}) {
    for (int r : resolution_sequence(c->progressive_plan()))
      res.insert(r);
    if (c->hard_augment && c->num_positives > 2)
      res.insert(c->selection_resolution);
  }
  std::map<int, double> entries;
  const auto spec = sim::model_spec(a);
  for (int r : res)
    entries[r] = sim::forward_flops(spec, r);
  return FlopsProfile(entries, a.cost_ratio);
}

RunSummary execute_run(const RunSpec &run, const ExperimentConfig &reference,
                       const std::string &dir, const LogFn &log) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create " + dir + ": " + ec.message());
  const fs::path root(dir);

  write_text_file((root / "config.txt").string(), render_config(run.config));
  emit_schedule(run.config, (root / "schedule.csv").string());

  const auto metrics_path = (root / "metrics.jsonl").string();
  std::ofstream metrics(metrics_path, std::ios::binary | std::ios::trunc);
  if (!metrics)
    throw IoError("cannot open " + metrics_path);

  const auto result = sim::train(run.config, [&](const sim::EpochRecord &r) {
    metrics << sim::to_json_line(r) << '\n';
    metrics.flush();
    if (log) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s epoch %d/%d loss %.4f", run.name.c_str(),
                    r.epoch, run.config.epochs, r.train_loss);
      std::string line = buf;
      if (r.knn_accuracy) {
        std::snprintf(buf, sizeof buf, " knn %.4f", *r.knn_accuracy);
        line += buf;
      }
      log(line);
    }
  });
  if (!metrics.flush())
    throw IoError("failed writing " + metrics_path);

  const auto profile = shared_profile(reference, run.config);
  const auto report =
      compare(sim::planned_training(reference), result.realized_plan, profile);
  write_text_file((root / "cost.txt").string(), format_report_table(report));
  write_text_file((root / "cost.json").string(), format_report_json(report) + "\n");
  sim::save_checkpoint((root / "checkpoint").string(), result.params);

  RunSummary s;
  s.name = run.name;
  s.seed = run.config.seed;
  s.knn_accuracy = result.final_knn_accuracy;
  s.cumulative_flops = result.cumulative_flops;
  s.baseline_flops = report.baseline_flops;
  s.flops_fraction = result.cumulative_flops / report.baseline_flops;
  s.steps = static_cast<std::int64_t>(result.realized_plan.resolutions.size());
  s.embedding_std = result.epochs.empty() ? 0.0 : result.epochs.back().embedding_std;
  return s;
}

std::vector<RunSummary> run_preset(std::string_view preset,
                                   const ExperimentConfig &base,
                                   const Overrides &overrides,
                                   const std::string &out_dir, const LogFn &log) {
  const auto runs = preset_runs(preset, base, overrides);
  // The cost reference is the baseline preset under the same overrides.
  ExperimentConfig reference = baseline_config(base);
  apply_overrides(reference, overrides);
  reference.validate();

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw IoError("cannot create " + out_dir + ": " + ec.message());

  std::vector<RunSummary> done;
  for (const auto &run : runs) {
    if (log)
      log("run " + run.name);
    done.push_back(execute_run(run, reference,
                               (fs::path(out_dir) / run.name).string(), log));
    write_text_file((fs::path(out_dir) / "summary.json").string(),
                    format_summary_json(done) + "\n");
    write_text_file((fs::path(out_dir) / "summary.txt").string(),
                    format_summary_table(done));
  }
  return done;
}

std::string format_summary_table(const std::vector<RunSummary> &runs) {
  std::ostringstream os;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-16s %6s %10s %14s %10s %8s\n", "run", "seed",
                "knn_acc", "flops", "vs_base", "emb_std");
  os << buf;
  for (const auto &r : runs) {
    std::snprintf(buf, sizeof buf, "%-16s %6llu %10.4f %14.6g %9.1f%% %8.4f\n",
                  r.name.c_str(), static_cast<unsigned long long>(r.seed),
                  r.knn_accuracy, r.cumulative_flops, 100.0 * r.flops_fraction,
                  r.embedding_std);
    os << buf;
  }
  return os.str();
}

std::string format_summary_json(const std::vector<RunSummary> &runs) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto &r : runs) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["seed"] = r.seed;
    j["knn_accuracy"] = r.knn_accuracy;
    j["cumulative_flops"] = r.cumulative_flops;
    j["baseline_flops"] = r.baseline_flops;
    j["flops_fraction"] = r.flops_fraction;
    j["steps"] = r.steps;
    j["embedding_std"] = r.embedding_std;
    arr.push_back(j);
  }
  return arr.dump(2);
}

} // namespace fastssl
