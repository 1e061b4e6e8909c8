// SPDX-License-Identifier: Apache-2.0
#include "fastssl/lr_range.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "fastssl/error.hpp"

namespace fastssl {

void RangeTestConfig::validate() const {
  if (!(lr_lo > 0.0) || !(lr_hi > lr_lo))
    throw ConfigError("range test needs 0 < lr_lo < lr_hi");
  if (sweep_steps < 10)
    throw ConfigError("sweep_steps must be at least 10");
  if (!(smoothing_coefficient > 0.0 && smoothing_coefficient < 1.0))
    throw ConfigError("smoothing_coefficient must lie in (0, 1)");
  if (!(divergence_factor > 1.0))
    throw ConfigError("divergence_factor must exceed 1");
  if (!std::isfinite(loss_offset))
    throw ConfigError("loss_offset must be finite");
  if (!(decrease_delta >= 0.0 && decrease_delta < 1.0))
    throw ConfigError("decrease_delta must lie in [0, 1)");
  if (persistence < 1)
    throw ConfigError("persistence must be positive");
  if (val_batch_size < 1)
    throw ConfigError("val_batch_size must be positive");
}

double lr_sweep(std::int64_t t, const RangeTestConfig &cfg) {
  if (t < 0 || t >= cfg.sweep_steps)
    throw RangeError("sweep step " + std::to_string(t) + " outside [0, " +
                     std::to_string(cfg.sweep_steps) + ")");
  if (t == cfg.sweep_steps - 1)
    return cfg.lr_hi;
  const double frac =
      static_cast<double>(t) / static_cast<double>(cfg.sweep_steps - 1);
  return cfg.lr_lo * std::exp(frac * std::log(cfg.lr_hi / cfg.lr_lo));
}

namespace {

// Bias-corrected exponential moving average.
class Smoother {
public:
  explicit Smoother(double coefficient) : keep_(1.0 - coefficient) {}

  double push(double x) {
    avg_ = keep_ * avg_ + (1.0 - keep_) * x;
    correction_ *= keep_;
    return avg_ / (1.0 - correction_);
  }

private:
  double keep_;
  double avg_ = 0.0;
  double correction_ = 1.0;
};

} // namespace

RangeTestResult run_range_test(const RangeTrainer &trainer,
                               const RangeTestConfig &cfg) {
  cfg.validate();
  RangeTestResult res;
  Smoother train_ema(cfg.smoothing_coefficient);
  Smoother val_ema(cfg.smoothing_coefficient);

  double initial_val = 0.0;
  double running_min = std::numeric_limits<double>::infinity();
  double raw_min = std::numeric_limits<double>::infinity();
  std::int64_t raw_min_step = 0;
  int below_run = 0;
  std::int64_t run_start = -1;
  bool nonfinite = false;

  for (std::int64_t t = 0; t < cfg.sweep_steps; ++t) {
    const double lr = lr_sweep(t, cfg);
    const auto [train_loss, val_loss] = trainer(lr);
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
      res.diverged = true;
      res.divergence_step = t;
      nonfinite = true;
      res.max_lr = t > 0 ? lr_sweep(t - 1, cfg) : cfg.lr_lo;
      break;
    }
    res.trace.push_back({t, lr, train_loss, val_loss});

    const double sv = val_ema.push(val_loss + cfg.loss_offset);
    if (t == 0)
      initial_val = sv;
    if (!res.min_detected) {
      if (sv < initial_val - cfg.decrease_delta * std::abs(initial_val)) {
        if (below_run++ == 0)
          run_start = t;
        if (below_run >= cfg.persistence) {
          res.min_detected = true;
          res.min_lr = lr_sweep(run_start, cfg);
        }
      } else {
        below_run = 0;
      }
    }

    const double st = train_ema.push(train_loss + cfg.loss_offset);
    if (st > cfg.divergence_factor * running_min && running_min > 0.0) {
      res.diverged = true;
      res.divergence_step = t;
      break;
    }
    running_min = std::min(running_min, st);
    if (train_loss < raw_min) {
      raw_min = train_loss;
      raw_min_step = t;
    }
  }

  if (!nonfinite)
    res.max_lr = lr_sweep(raw_min_step, cfg);
  if (!res.min_detected)
    res.min_lr = cfg.lr_lo;
  if (res.min_lr > res.max_lr)
    res.min_lr = res.max_lr;
  return res;
}

void write_range_trace(std::ostream &out, const RangeTestResult &result) {
  out << "step,lr,train_loss,val_loss\n";
  char buf[160];
  for (const auto &p : result.trace) {
    std::snprintf(buf, sizeof buf, "%lld,%.9g,%.9g,%.9g\n",
                  static_cast<long long>(p.step), p.lr, p.train_loss,
                  p.val_loss);
    out << buf;
  }
}

} // namespace fastssl
