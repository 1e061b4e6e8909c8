// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fastssl/cost_model.hpp"
#include "fastssl/experiment.hpp"
#include "fastssl/sim/augment.hpp"
#include "fastssl/sim/checkpoint.hpp"
#include "fastssl/sim/dataset.hpp"
#include "fastssl/sim/gradcheck.hpp"
#include "fastssl/sim/knn.hpp"
#include "fastssl/sim/loss.hpp"
#include "fastssl/sim/model.hpp"
#include "fastssl/sim/optimizer.hpp"
#include "fastssl/sim/trainer.hpp"

using namespace fastssl;
using namespace fastssl::sim;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny(bool efficient) {
  ExperimentConfig base;
  base.samples_per_class = 30;
  auto c = efficient ? efficient_config(base) : baseline_config(base);
  c.epochs = 2;
  c.warmup_epochs = efficient ? 1 : 0;
  c.knn_every = 1;
  c.validate();
  return c;
}

fs::path scratch(const std::string &name) {
  auto p = fs::temp_directory_path() / ("fastssl_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

} // namespace

TEST(Dataset, DeterministicAndWellFormed) {
  SynthDatasetConfig c;
  c.samples_per_class = 20;
  const auto a = generate_dataset(c), b = generate_dataset(c);
  ASSERT_EQ(a.train.size(), 128u);
  ASSERT_EQ(a.eval.size(), 32u);
  for (std::size_t i = 0; i < a.train.size(); ++i)
    ASSERT_EQ(a.train.images[i], b.train.images[i]);
  EXPECT_EQ(a.train.labels, b.train.labels);
  std::vector<int> counts(8, 0);
  for (int l : a.train.labels)
    ++counts.at(static_cast<std::size_t>(l));
  for (int n : counts)
    EXPECT_EQ(n, 16);
  for (const auto &img : a.eval.images) {
    ASSERT_EQ(img.shape, (Shape{3, 32, 32}));
    for (float v : img.data)
      ASSERT_TRUE(v >= 0.0f && v <= 1.0f);
  }
  c.seed = 2;
  EXPECT_NE(generate_dataset(c).train.images[0], a.train.images[0]);
}

TEST(Augment, NullPolicyIsIdentity) {
  SynthDatasetConfig dc;
  dc.samples_per_class = 5;
  const auto ds = generate_dataset(dc);
  AugmentationPolicy p;
  p.magnitude = 0.0;
  p.crop_scale_min = p.crop_scale_max = 1.0;
  p.flip_probability = 0.0;
  Rng rng(1);
  const auto &img = ds.train.images[0];
  const auto v = augment(img, p, 32, rng);
  ASSERT_EQ(v.shape, img.shape);
  for (std::size_t i = 0; i < v.size(); ++i)
    ASSERT_NEAR(v[i], img[i], 1e-6);
}

TEST(Augment, DownsampleBoxAverage) {
  Image img({1, 4, 4});
  for (std::size_t i = 0; i < img.size(); ++i)
    img[i] = static_cast<float>(i);
  const auto d = downsample(img, 2);
  ASSERT_EQ(d.shape, (Shape{1, 2, 2}));
  EXPECT_FLOAT_EQ(d[0], (0 + 1 + 4 + 5) / 4.0f);
  EXPECT_FLOAT_EQ(d[3], (10 + 11 + 14 + 15) / 4.0f);
}

TEST(Augment, ViewsStayInRangeAndDependOnSeed) {
  SynthDatasetConfig dc;
  dc.samples_per_class = 5;
  const auto ds = generate_dataset(dc);
  AugmentationPolicy p;
  p.magnitude = 15.0;
  Rng r1(4), r2(4), r3(5);
  const auto a = augment(ds.train.images[1], p, 16, r1);
  const auto b = augment(ds.train.images[1], p, 16, r2);
  const auto c = augment(ds.train.images[1], p, 16, r3);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (float v : a.data)
    ASSERT_TRUE(v >= 0.0f && v <= 1.0f);
  EXPECT_THROW(augment(ds.train.images[1], p, 64, r1), ConfigError);
}

TEST(Loss, ValuesAndBounds) {
  const std::vector<double> x = {1.0, 2.0, -1.0}, nx = {-1.0, -2.0, 1.0};
  EXPECT_NEAR(simsiam_loss<double>(x, x, x, x), -1.0, 1e-15);
  EXPECT_NEAR(simsiam_loss<double>(x, nx, x, nx), 1.0, 1e-15);
  const std::vector<double> a = {1.0, 0.0}, b = {0.0, 1.0};
  EXPECT_NEAR(simsiam_loss<double>(a, b, a, b), 0.0, 1e-15);
  const std::vector<double> zero = {0.0, 0.0};
  EXPECT_THROW(simsiam_loss<double>(a, zero, a, b), NumericError);
}

TEST(Loss, BatchGradientsOnlyOnPredictions) {
  Rng rng(3);
  Tensor<double> zi({4, 5}), pi({4, 5}), zj({4, 5}), pj({4, 5});
  for (auto *t : {&zi, &pi, &zj, &pj})
    for (auto &v : t->data)
      v = rng.normal();
  const auto r = simsiam_batch_loss(zi, pi, zj, pj);
  EXPECT_GE(r.loss, -1.0);
  EXPECT_LE(r.loss, 1.0);
  for (double v : r.grad_z_i.data)
    EXPECT_EQ(v, 0.0);
  for (double v : r.grad_z_j.data)
    EXPECT_EQ(v, 0.0);
  // Finite difference on one prediction entry.
  const double h = 1e-6;
  auto plus = pi, minus = pi;
  plus[7] += h;
  minus[7] -= h;
  const double fd = (simsiam_batch_loss(zi, plus, zj, pj).loss -
                     simsiam_batch_loss(zi, minus, zj, pj).loss) /
                    (2 * h);
  EXPECT_NEAR(r.grad_p_i[7], fd, 1e-8);
}

TEST(Optimizer, MomentumRecurrence) {
  ModelSpec spec;
  spec.conv_channels = {2, 2, 2};
  spec.proj_hidden = 2;
  spec.embed_dim = 2;
  spec.pred_hidden = 2;
  auto p = init_params<double>(spec, 1);
  const auto theta0 = p;
  OptimizerState<double> st(p, 0.0);
  auto g = p.zeros_like();
  for (auto &t : g.tensors)
    for (auto &v : t.data)
      v = 0.5;
  const double lr = 0.1, beta = 0.9;
  sgd_momentum_step(st, g, lr, beta);
  sgd_momentum_step(st, g, lr, beta);
  // Two steps with a constant gradient: theta0 - lr g (2 + beta).
  for (std::size_t k = 0; k < kNumParams; ++k)
    for (std::size_t i = 0; i < st.params[k].size(); ++i)
      ASSERT_NEAR(st.params[k][i], theta0[k][i] - lr * 0.5 * (2 + beta), 1e-15);

  OptimizerState<double> frozen(theta0, 0.5);
  sgd_momentum_step(frozen, g, 0.0, beta);
  for (std::size_t k = 0; k < kNumParams; ++k)
    ASSERT_EQ(frozen.params[k], theta0[k]);

  OptimizerState<double> decay(theta0, 0.1);
  sgd_momentum_step(decay, theta0.zeros_like(), 1.0, 0.0);
  EXPECT_NEAR(decay.params[kConv1W][0], 0.9 * theta0[kConv1W][0], 1e-15);
}

TEST(Knn, SimpleCases) {
  Tensor<float> ref({4, 2});
  ref.data = {1, 0, 0.9f, 0.1f, 0, 1, 0.1f, 0.9f};
  const std::vector<int> labels = {0, 0, 1, 1};
  Tensor<float> q({2, 2});
  q.data = {1, 0.05f, 0.05f, 1};
  EXPECT_EQ(knn_eval(ref, labels, q, {0, 1}, {1, false}), 1.0);
  EXPECT_EQ(knn_eval(ref, labels, q, {1, 0}, {1, false}), 0.0);
  EXPECT_EQ(knn_eval(ref, labels, q, {0, 1}, {2, false}), 1.0);
  // Self-exclusion: each row votes with its partner.
  EXPECT_EQ(knn_eval(ref, labels, ref, labels, {1, true}), 1.0);
  // Vote tie among k=4 goes to the smaller class.
  EXPECT_EQ(knn_eval(ref, labels, q, {0, 0}, {4, false}), 1.0);
}

TEST(Model, FlopsFormula) {
  ModelSpec s;
  double conv = 0.0;
  int side = 32, cin = 3;
  for (int cout : s.conv_channels) {
    side = (side - 1) / 2 + 1;
    conv += 2.0 * 9 * cin * cout * side * side;
    cin = cout;
  }
  const double dense = 2.0 * (64 * s.proj_hidden + s.proj_hidden * s.embed_dim +
                              s.embed_dim * s.pred_hidden + s.pred_hidden * s.embed_dim);
  EXPECT_EQ(forward_flops(s, 32), conv + dense);
  EXPECT_EQ(forward_flops_breakdown(s, 32).total(), conv + dense);
  EXPECT_LT(forward_flops(s, 16), forward_flops(s, 24));
}

TEST(Model, GradientCheckAndStopGradient) {
  ModelSpec spec;
  spec.conv_channels = {4, 6, 8};
  spec.proj_hidden = 10;
  spec.embed_dim = 6;
  spec.pred_hidden = 5;
  auto params = init_params<double>(spec, 3);
  for (auto &t : params.tensors)
    for (auto &v : t.data)
      if (v == 0.0)
        v = 0.01;
  Rng rng(5);
  Tensor<double> a({4, 3, 8, 8}), b({4, 3, 8, 8});
  for (auto &v : a.data)
    v = rng.normal();
  for (auto &v : b.data)
    v = rng.normal();
  const auto rep = gradient_check(params, a, b);
  EXPECT_LE(rep.max_relative_error, 1e-4) << param_name(rep.worst_param);
  EXPECT_EQ(rep.target_path_max_abs, 0.0);
  EXPECT_GT(rep.checked, 100u);
}

TEST(Checkpoint, RoundTripAndCorruption) {
  const auto dir = scratch("ckpt");
  const auto params = init_params<float>(ModelSpec{}, 9);
  const auto prefix = (dir / "model").string();
  save_checkpoint(prefix, params);
  const auto back = load_checkpoint(prefix);
  EXPECT_EQ(back.spec, params.spec);
  for (std::size_t k = 0; k < kNumParams; ++k)
    EXPECT_EQ(back[k], params[k]);

  fs::resize_file(prefix + ".bin", fs::file_size(prefix + ".bin") - 4);
  EXPECT_THROW(load_checkpoint(prefix), IoError);
  EXPECT_THROW(load_checkpoint((dir / "missing").string()), IoError);
  fs::remove_all(dir);
}

TEST(Trainer, PlannedFlopsMatchCounter) {
  for (bool eff : {false, true}) {
    const auto c = tiny(eff);
    const auto r = train(c);
    const auto plan = planned_training(c);
    EXPECT_EQ(r.realized_plan.resolutions, plan.resolutions);
    EXPECT_EQ(plan_flops(plan, model_profile(c)), r.cumulative_flops);
    EXPECT_EQ(plan_flops(r.realized_plan, r.measured_profile), r.cumulative_flops);
    ASSERT_EQ(r.epochs.size(), 2u);
    EXPECT_TRUE(r.epochs.back().knn_accuracy.has_value());
    EXPECT_EQ(r.epochs.back().cumulative_flops, r.cumulative_flops);
  }
}

TEST(Trainer, TwoPositivesEqualsNoSelection) {
  auto on = tiny(true);
  on.num_positives = 2;
  auto off = on;
  off.hard_augment = false;
  const auto a = train(on), b = train(off);
  for (std::size_t k = 0; k < kNumParams; ++k)
    EXPECT_EQ(a.params[k], b.params[k]);
  ASSERT_EQ(a.epochs.size(), b.epochs.size());
  for (std::size_t e = 0; e < a.epochs.size(); ++e)
    EXPECT_EQ(to_json_line(a.epochs[e]), to_json_line(b.epochs[e]));
}

TEST(Trainer, ReproducibleAndSeedSensitive) {
  const auto c = tiny(true);
  const auto a = train(c), b = train(c);
  EXPECT_EQ(to_json_line(a.epochs.back()), to_json_line(b.epochs.back()));
  auto c2 = c;
  c2.seed = 2;
  EXPECT_NE(to_json_line(train(c2).epochs.back()), to_json_line(a.epochs.back()));
}

TEST(Trainer, JsonLineFields) {
  EpochRecord r;
  r.epoch = 3;
  r.train_loss = -0.5;
  const auto line = to_json_line(r);
  EXPECT_EQ(line.rfind("{\"epoch\":3,\"step\":0,", 0), 0u);
  EXPECT_NE(line.find("\"knn_accuracy\":null"), std::string::npos);
}

TEST(Trainer, RangeTrainerProducesFiniteLosses) {
  auto c = tiny(true);
  const auto rt = make_range_trainer(c, 16);
  for (double lr : {1e-3, 1e-2, 1e-1}) {
    const auto [tl, vl] = rt(lr);
    EXPECT_TRUE(std::isfinite(tl));
    EXPECT_GE(vl, -1.0);
    EXPECT_LE(vl, 1.0);
  }
}

TEST(Experiment, PresetsExpandAndValidate) {
  ExperimentConfig base;
  for (auto name : preset_names())
    EXPECT_FALSE(preset_runs(name, base).empty()) << name;
  EXPECT_EQ(preset_runs("ablation-components", base).size(), 6u);
  EXPECT_EQ(preset_runs("aug-res-grid", base).size(), 15u);
  const auto e = preset_runs("efficient", base, {{"seed", "7"}}).front().config;
  EXPECT_EQ(e.seed, 7u);
  EXPECT_EQ(e.num_positives, 4);
  EXPECT_THROW(preset_runs("nope", base), ConfigError);
  EXPECT_THROW(preset_runs("baseline", base, {{"epochs", "0"}}), ConfigError);
}

TEST(Experiment, RunWritesArtifacts) {
  const auto dir = scratch("exp");
  ExperimentConfig base;
  const Overrides o = {{"epochs", "2"}, {"warmup_epochs", "1"}, {"samples_per_class", "20"}};
  const auto runs = run_preset("efficient", base, o, dir.string(), {});
  ASSERT_EQ(runs.size(), 1u);
  for (const char *f : {"config.txt", "schedule.csv", "metrics.jsonl", "cost.txt",
                        "cost.json", "checkpoint.bin", "checkpoint.manifest"})
    EXPECT_TRUE(fs::exists(dir / "efficient" / f)) << f;
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_GT(runs[0].flops_fraction, 0.0);
  EXPECT_LT(runs[0].flops_fraction, 1.0);
  fs::remove_all(dir);
}
