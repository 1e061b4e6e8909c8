// SPDX-License-Identifier: Apache-2.0
#include "fastssl/sim/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <numeric>

#include <nlohmann/json.hpp>

#include "fastssl/sim/knn.hpp"
#include "fastssl/sim/loss.hpp"

namespace fastssl::sim {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kInitTag = 0x696e6974ULL;
constexpr std::uint64_t kShuffleTag = 0x73687566ULL;
constexpr std::uint64_t kViewTag = 0x76696577ULL;
constexpr std::uint64_t kValTag = 0x76616c31ULL;

constexpr float kInputMean = 0.5f;
constexpr float kInputScale = 4.0f; // 1 / 0.25

// Mean over dimensions of the batch std of L2-normalized rows.
double normalized_std(const Tensor<float> &z) {
  const std::size_t b = z.shape[0], d = z.shape[1];
  if (b < 2)
    return 0.0;
  std::vector<double> unit(b * d);
  for (std::size_t r = 0; r < b; ++r) {
    double n = 0.0;
    for (std::size_t c = 0; c < d; ++c)
      n += double(z[r * d + c]) * z[r * d + c];
    n = std::max(std::sqrt(n), 1e-12);
    for (std::size_t c = 0; c < d; ++c)
      unit[r * d + c] = z[r * d + c] / n;
  }
  double total = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < b; ++r)
      mean += unit[r * d + c];
    mean /= double(b);
    double var = 0.0;
    for (std::size_t r = 0; r < b; ++r) {
      const double e = unit[r * d + c] - mean;
      var += e * e;
    }
    total += std::sqrt(var / double(b));
  }
  return total / double(d);
}

std::vector<int> plan_resolutions(const ExperimentConfig &cfg) {
  return resolution_sequence(cfg.progressive_plan());
}

} // namespace

std::string to_json_line(const EpochRecord &r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["step"] = r.step;
  j["lr"] = r.lr;
  j["momentum"] = r.momentum;
  j["resolution"] = r.resolution;
  j["magnitude"] = r.magnitude;
  j["train_loss"] = r.train_loss;
  if (r.knn_accuracy)
    j["knn_accuracy"] = *r.knn_accuracy;
  else
    j["knn_accuracy"] = nullptr;
  j["cumulative_flops"] = r.cumulative_flops;
  j["embedding_std"] = r.embedding_std;
  return j.dump();
}

SynthDatasetConfig dataset_config(const ExperimentConfig &cfg) {
  SynthDatasetConfig d;
  d.num_classes = cfg.num_classes;
  d.samples_per_class = cfg.samples_per_class;
  d.canvas_size = cfg.canvas_size;
  d.image_size = cfg.image_size;
  d.noise_std = cfg.data_noise_std;
  d.seed = cfg.seed;
  return d;
}

ModelSpec model_spec(const ExperimentConfig &cfg) {
  ModelSpec m;
  m.conv_channels = {cfg.conv1_channels, cfg.conv2_channels, cfg.conv3_channels};
  m.proj_hidden = cfg.proj_hidden;
  m.embed_dim = cfg.embed_dim;
  m.pred_hidden = cfg.pred_hidden;
  return m;
}

AugmentationPolicy augmentation_policy(const ExperimentConfig &cfg,
                                       double magnitude) {
  AugmentationPolicy p;
  p.magnitude = magnitude;
  p.crop_scale_min = cfg.crop_scale_min;
  return p;
}

Tensor<float> stack_views(const std::vector<const Image *> &views) {
  if (views.empty())
    throw ConfigError("stack_views: no views");
  const Shape &s0 = views.front()->shape;
  Tensor<float> out({views.size(), s0[0], s0[1], s0[2]});
  const std::size_t n = shape_size(s0);
  for (std::size_t b = 0; b < views.size(); ++b) {
    check_same_shape(*views[b], *views.front(), "stack_views");
    const float *src = views[b]->ptr();
    float *dst = out.ptr() + b * n;
    for (std::size_t k = 0; k < n; ++k)
      dst[k] = (src[k] - kInputMean) * kInputScale;
  }
  return out;
}

Tensor<float> embed_set(const ModelParams<float> &params, const LabeledSet &set) {
  constexpr std::size_t kChunk = 256;
  const std::size_t width = static_cast<std::size_t>(params.spec.conv_channels[2]);
  Tensor<float> out({set.size(), width});
  for (std::size_t start = 0; start < set.size(); start += kChunk) {
    const std::size_t end = std::min(set.size(), start + kChunk);
    std::vector<const Image *> views;
    for (std::size_t k = start; k < end; ++k)
      views.push_back(&set.images[k]);
    const auto f = encode(params, stack_views(views));
    std::copy(f.data.begin(), f.data.end(), out.ptr() + start * width);
  }
  return out;
}

double knn_probe(const ModelParams<float> &params, const Dataset &ds, int k) {
  const auto ref = embed_set(params, ds.train);
  const auto query = embed_set(params, ds.eval);
  KnnOptions opts;
  opts.k = k;
  return knn_eval(ref, ds.train.labels, query, ds.eval.labels, opts);
}

Trainer::Trainer(const ExperimentConfig &cfg) : cfg_(cfg) {
  cfg_.validate();
  data_ = generate_dataset(dataset_config(cfg_));
  opt_ = OptimizerState<float>(
      init_params<float>(model_spec(cfg_), derive_seed(cfg_.seed, kInitTag)),
      cfg_.weight_decay);
  selects_ = cfg_.hard_augment && cfg_.num_positives > 2;
}

std::vector<Image> Trainer::draw_views(std::size_t index, std::int64_t t,
                                       std::size_t slot, int resolution,
                                       double magnitude) const {
  Rng rng(derive_seed(derive_seed(cfg_.seed, kViewTag, static_cast<std::uint64_t>(t)),
                      slot));
  const auto policy = augmentation_policy(cfg_, magnitude);
  std::vector<Image> views;
  const int n = views_per_sample();
  views.reserve(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v)
    views.push_back(augment(data_.train.images.at(index), policy, resolution, rng));
  return views;
}

StepStats Trainer::step(const std::vector<std::size_t> &batch, std::int64_t t,
                        double lr, double momentum, int resolution,
                        double magnitude) {
  StepStats st;
  const std::size_t b = batch.size();
  std::vector<std::vector<Image>> views(b);
  for (std::size_t s = 0; s < b; ++s)
    views[s] = draw_views(batch[s], t, s, resolution, magnitude);

  std::vector<PairIndex> chosen(b, PairIndex{0, 1});
  if (selects_) {
    const auto sel = cfg_.selection_config();
    const int m = sel.num_positives;
    auto oracle = [&](const std::vector<std::vector<Image>> &small) {
      std::vector<const Image *> flat;
      for (const auto &row : small)
        for (const auto &v : row)
          flat.push_back(&v);
      const auto out = forward(opt_.params, stack_views(flat));
      st.selection_flops = out.flops;
      const auto pairs = enumerate_pairs(m);
      const std::size_t d = out.z.shape[1];
      auto row = [&](const Tensor<float> &x, std::size_t r) {
        return std::span<const float>(x.ptr() + r * d, d);
      };
      std::vector<double> losses;
      losses.reserve(small.size() * pairs.size());
      for (std::size_t s = 0; s < small.size(); ++s)
        for (const auto &pr : pairs) {
          const std::size_t a = s * m + pr.i, c = s * m + pr.j;
          losses.push_back(simsiam_loss<float>(row(out.z, a), row(out.p, a),
                                               row(out.z, c), row(out.p, c)));
        }
      return losses;
    };
    auto down = [](const Image &v, int r) { return downsample(v, r); };
    chosen = hard_select_batch(views, down, oracle, sel).chosen;
  }

  std::vector<const Image *> vi(b), vj(b);
  for (std::size_t s = 0; s < b; ++s) {
    vi[s] = &views[s][static_cast<std::size_t>(chosen[s].i)];
    vj[s] = &views[s][static_cast<std::size_t>(chosen[s].j)];
  }
  ForwardCache<float> ci, cj;
  const auto oi = forward(opt_.params, stack_views(vi), &ci);
  const auto oj = forward(opt_.params, stack_views(vj), &cj);
  const auto loss = simsiam_batch_loss(oi.z, oi.p, oj.z, oj.p);
  if (!std::isfinite(loss.loss))
    throw NumericError("non-finite loss");

  auto grads = opt_.params.zeros_like();
  double flops = oi.flops + oj.flops;
  flops += backward(opt_.params, ci, loss.grad_p_i, nullptr, grads);
  flops += backward(opt_.params, cj, loss.grad_p_j, nullptr, grads);
  sgd_momentum_step(opt_, grads, lr, momentum);

  st.loss = loss.loss;
  st.forward_flops = oi.flops;
  st.flops = flops + st.selection_flops;
  st.embedding_std = normalized_std(oi.z);
  return st;
}

double Trainer::evaluate_loss(const Tensor<float> &view_i,
                              const Tensor<float> &view_j) const {
  const auto oi = forward(opt_.params, view_i);
  const auto oj = forward(opt_.params, view_j);
  return simsiam_batch_loss(oi.z, oi.p, oj.z, oj.p).loss;
}

TrainResult train(const ExperimentConfig &cfg, const EpochCallback &on_epoch) {
  Trainer trainer(cfg);
  const auto sched = cfg.schedule_config();
  sched.validate();
  const auto plan = cfg.progressive_plan();
  plan.validate();

  const std::size_t bsz = static_cast<std::size_t>(cfg.batch_size);
  const std::int64_t ipe = cfg.iterations_per_epoch();
  const std::size_t n_train = trainer.dataset().train.size();

  TrainResult result;
  result.realized_plan.samples_per_step = cfg.batch_size;
  if (trainer.selects())
    result.realized_plan.selection =
        PlanSelection{cfg.num_positives, cfg.selection_resolution};
  result.realized_plan.resolutions.reserve(static_cast<std::size_t>(cfg.total_steps()));
  std::map<int, double> measured;

  std::vector<std::size_t> order(n_train);
  std::int64_t t = 0;
  double cumulative = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffler(derive_seed(cfg.seed, kShuffleTag, static_cast<std::uint64_t>(epoch)));
    shuffler.shuffle(order.begin(), order.end());

    EpochRecord rec;
    double loss_sum = 0.0;
    for (std::int64_t it = 0; it < ipe; ++it, ++t) {
      const auto sp = evaluate_schedule(t, sched);
      const auto cp = curriculum_at(t, plan);
      const auto first = order.begin() + static_cast<std::ptrdiff_t>(it * cfg.batch_size);
      const std::vector<std::size_t> batch(first, first + static_cast<std::ptrdiff_t>(bsz));
      StepStats st;
      try {
        st = trainer.step(batch, t, sp.lr, sp.momentum, cp.resolution, cp.magnitude);
      } catch (const NumericError &e) {
        throw NumericError("iteration " + std::to_string(t) + ": " + e.what());
      }
      cumulative += st.flops;
      loss_sum += st.loss;
      measured[cp.resolution] = st.forward_flops / double(bsz);
      if (trainer.selects())
        measured[cfg.selection_resolution] =
            st.selection_flops / double(bsz * static_cast<std::size_t>(cfg.num_positives));
      result.realized_plan.resolutions.push_back(cp.resolution);

      rec.lr = sp.lr;
      rec.momentum = sp.momentum;
      rec.resolution = cp.resolution;
      rec.magnitude = cp.magnitude;
      rec.embedding_std = st.embedding_std;
    }
    rec.epoch = epoch + 1;
    rec.step = t;
    rec.train_loss = loss_sum / double(ipe);
    rec.cumulative_flops = cumulative;
    const bool last = epoch + 1 == cfg.epochs;
    if (last || (cfg.knn_every > 0 && (epoch + 1) % cfg.knn_every == 0))
      rec.knn_accuracy = knn_probe(trainer.params(), trainer.dataset(), cfg.knn_k);
    if (last)
      result.final_knn_accuracy = *rec.knn_accuracy;
    result.epochs.push_back(rec);
    if (on_epoch)
      on_epoch(rec);
  }

  result.params = trainer.params();
  result.cumulative_flops = cumulative;
  result.measured_profile = FlopsProfile(measured, 6.0);
  return result;
}

RangeTrainer make_range_trainer(const ExperimentConfig &cfg,
                                std::int64_t val_batch_size) {
  auto trainer = std::make_shared<Trainer>(cfg);
  const auto &eval = trainer->dataset().eval;
  if (val_batch_size < 1)
    throw ConfigError("val_batch_size must be positive");
  const std::size_t nval =
      std::min(eval.size(), static_cast<std::size_t>(val_batch_size));
  if (nval < 2)
    throw ConfigError("eval split too small for a validation batch");

  // Fixed held-out views at full resolution and the standard magnitude.
  Rng vrng(derive_seed(cfg.seed, kValTag));
  AugmentationPolicy policy = augmentation_policy(cfg, AugmentationPolicy::kStandardMagnitude);
  std::vector<Image> a, b;
  for (std::size_t k = 0; k < nval; ++k) {
    a.push_back(augment(eval.images[k], policy, cfg.res_max, vrng));
    b.push_back(augment(eval.images[k], policy, cfg.res_max, vrng));
  }
  std::vector<const Image *> pa, pb;
  for (std::size_t k = 0; k < nval; ++k) {
    pa.push_back(&a[k]);
    pb.push_back(&b[k]);
  }
  auto val_i = std::make_shared<Tensor<float>>(stack_views(pa));
  auto val_j = std::make_shared<Tensor<float>>(stack_views(pb));

  struct Cursor {
    std::vector<std::size_t> order;
    std::size_t pos = 0;
    std::int64_t t = 0;
    std::uint64_t pass = 0;
  };
  auto cur = std::make_shared<Cursor>();
  cur->order.resize(trainer->dataset().train.size());

  const double magnitude = 0.5 * (cfg.mag_min + cfg.mag_max);
  return [=](double lr) -> std::pair<double, double> {
    const std::size_t bsz = static_cast<std::size_t>(cfg.batch_size);
    if (cur->t == 0 || cur->pos + bsz > cur->order.size()) {
      std::iota(cur->order.begin(), cur->order.end(), std::size_t{0});
      Rng shuffler(derive_seed(cfg.seed, kShuffleTag, cur->pass++));
      shuffler.shuffle(cur->order.begin(), cur->order.end());
      cur->pos = 0;
    }
    const auto first = cur->order.begin() + static_cast<std::ptrdiff_t>(cur->pos);
    const std::vector<std::size_t> batch(first, first + static_cast<std::ptrdiff_t>(bsz));
    cur->pos += bsz;
    double train_loss, val_loss;
    try {
      train_loss = trainer->step(batch, cur->t++, lr, cfg.momentum, cfg.res_max,
                                 magnitude).loss;
      val_loss = trainer->evaluate_loss(*val_i, *val_j);
    } catch (const NumericError &) {
      // Divergence: report it to the detector as a non-finite loss.
      return {std::nan(""), std::nan("")};
    }
    return {train_loss, val_loss};
  };
}

TrainingPlan planned_training(const ExperimentConfig &cfg) {
  cfg.validate();
  TrainingPlan plan;
  plan.resolutions = plan_resolutions(cfg);
  plan.samples_per_step = cfg.batch_size;
  if (cfg.hard_augment && cfg.num_positives > 2)
    plan.selection = PlanSelection{cfg.num_positives, cfg.selection_resolution};
  return plan;
}

FlopsProfile model_profile(const ExperimentConfig &cfg) {
  const ModelSpec spec = model_spec(cfg);
  std::map<int, double> entries;
  for (int r : plan_resolutions(cfg))
    entries.try_emplace(r, forward_flops(spec, r));
  entries.try_emplace(cfg.selection_resolution,
                      forward_flops(spec, cfg.selection_resolution));
  return FlopsProfile(entries, cfg.cost_ratio);
}

} // namespace fastssl::sim
