// SPDX-License-Identifier: Apache-2.0
/**
 * @file   schedule.cpp
 * @brief  Cosine annealing, linear-warmup cosine, 1-cycle and fixed 1-cycle.
 */
#include "fastssl/schedule.hpp"

#include <cmath>
#include <numbers>

#include "fastssl/error.hpp"

namespace fastssl {

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
  case ScheduleKind::CosineAnnealing:
    return "cosine";
  case ScheduleKind::CosineWarmup:
    return "cosine_warmup";
  case ScheduleKind::OneCycle:
    return "one_cycle";
  case ScheduleKind::FixedOneCycle:
    return "f1clr";
  }
  return "?";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "cosine")
    return ScheduleKind::CosineAnnealing;
  if (name == "cosine_warmup")
    return ScheduleKind::CosineWarmup;
  if (name == "one_cycle")
    return ScheduleKind::OneCycle;
  if (name == "f1clr")
    return ScheduleKind::FixedOneCycle;
  throw ConfigError("unknown schedule kind '" + std::string(name) + "'");
}

void ScheduleConfig::validate() const {
  if (total_steps < 1)
    throw ConfigError("total_steps must be positive");
  if (!(lr_max > 0.0) || !std::isfinite(lr_max))
    throw ConfigError("lr_max must be positive and finite");
  if (!(beta_low >= 0.0 && beta_low < 1.0) ||
      !(beta_high >= 0.0 && beta_high < 1.0))
    throw ConfigError("momentum bounds must lie in [0, 1)");
  if (beta_low > beta_high)
    throw ConfigError("beta_low must not exceed beta_high");
  if (warmup_steps < 0)
    throw ConfigError("warmup_steps must be nonnegative");

  switch (kind) {
  case ScheduleKind::CosineAnnealing:
    break;
  case ScheduleKind::CosineWarmup:
  case ScheduleKind::FixedOneCycle:
    if (warmup_steps < 1)
      throw ConfigError("warmup_steps must be at least 1");
    if (warmup_steps >= total_steps)
      throw ConfigError("warmup_steps must be smaller than total_steps");
    break;
  case ScheduleKind::OneCycle:
    if (!(phase_fraction > 0.0 && phase_fraction < 1.0))
      throw ConfigError("phase_fraction must lie in (0, 1)");
    if (phase_fraction * static_cast<double>(total_steps) < 1.0)
      throw ConfigError("phase_fraction * total_steps must be at least 1");
    break;
  }
  if ((kind == ScheduleKind::CosineAnnealing ||
       kind == ScheduleKind::CosineWarmup) &&
      !(momentum >= 0.0 && momentum < 1.0))
    throw ConfigError("momentum must lie in [0, 1)");
}

namespace {

constexpr double kPi = std::numbers::pi;

void check_step(std::int64_t t, const ScheduleConfig &cfg) {
  if (t < 0 || t > cfg.total_steps)
    throw RangeError("step " + std::to_string(t) + " outside [0, " +
                     std::to_string(cfg.total_steps) + "]");
}

double half_cos(double x) { return 0.5 * (std::cos(x * kPi) + 1.0); }

} // namespace

namespace branch {

double rising_lr(double t, double phase_len, double lr_max) {
  return lr_max - lr_max * half_cos(t / phase_len);
}

double falling_lr(double t, double phase_len, double total, double lr_max) {
  return lr_max * half_cos((t - phase_len) / (total - phase_len));
}

double rising_phase_momentum(double t, double phase_len, double lo,
                             double hi) {
  return std::lerp(lo, hi, half_cos(t / phase_len));
}

double falling_phase_momentum(double t, double phase_len, double total,
                              double lo, double hi) {
  return std::lerp(lo, hi, 1.0 - half_cos((t - phase_len) / (total - phase_len)));
}

double linear_warmup_lr(double t, double warmup, double lr_max) {
  return t / warmup * lr_max;
}

} // namespace branch

double cosine_annealing(std::int64_t t, const ScheduleConfig &cfg) {
  check_step(t, cfg);
  return cfg.lr_max * half_cos(static_cast<double>(t) /
                               static_cast<double>(cfg.total_steps));
}

double cosine_warmup(std::int64_t t, const ScheduleConfig &cfg) {
  if (cfg.warmup_steps >= cfg.total_steps)
    throw ConfigError("warmup_steps must be smaller than total_steps");
  if (cfg.warmup_steps < 1)
    throw ConfigError("warmup_steps must be at least 1");
  check_step(t, cfg);
  const double tw = static_cast<double>(cfg.warmup_steps);
  const double td = static_cast<double>(t);
  if (t < cfg.warmup_steps)
    return branch::linear_warmup_lr(td, tw, cfg.lr_max);
  return branch::falling_lr(td, tw, static_cast<double>(cfg.total_steps),
                            cfg.lr_max);
}

namespace {

SchedulePoint cycle_point(std::int64_t t, double phase_len,
                          const ScheduleConfig &cfg) {
  const double td = static_cast<double>(t);
  const double total = static_cast<double>(cfg.total_steps);
  SchedulePoint p;
  p.step = t;
  if (td < phase_len) {
    p.lr = branch::rising_lr(td, phase_len, cfg.lr_max);
    p.momentum = branch::rising_phase_momentum(td, phase_len, cfg.beta_low,
                                               cfg.beta_high);
  } else {
    p.lr = branch::falling_lr(td, phase_len, total, cfg.lr_max);
    p.momentum = branch::falling_phase_momentum(td, phase_len, total,
                                                cfg.beta_low, cfg.beta_high);
  }
  // cos(0) and cos(pi) are exact; clamp the last ulp elsewhere so the bounds
  // invariants hold without tolerance.
  if (p.lr < 0.0)
    p.lr = 0.0;
  if (p.lr > cfg.lr_max)
    p.lr = cfg.lr_max;
  if (p.momentum < cfg.beta_low)
    p.momentum = cfg.beta_low;
  if (p.momentum > cfg.beta_high)
    p.momentum = cfg.beta_high;
  return p;
}

} // namespace

SchedulePoint one_cycle(std::int64_t t, const ScheduleConfig &cfg) {
  if (!(cfg.phase_fraction > 0.0 && cfg.phase_fraction < 1.0))
    throw ConfigError("phase_fraction must lie in (0, 1)");
  check_step(t, cfg);
  return cycle_point(t, cfg.phase_fraction * static_cast<double>(cfg.total_steps),
                     cfg);
}

SchedulePoint fixed_one_cycle(std::int64_t t, const ScheduleConfig &cfg) {
  if (cfg.warmup_steps >= cfg.total_steps)
    throw ConfigError("warmup_steps must be smaller than total_steps");
  if (cfg.warmup_steps < 1)
    throw ConfigError("warmup_steps must be at least 1");
  check_step(t, cfg);
  return cycle_point(t, static_cast<double>(cfg.warmup_steps), cfg);
}

SchedulePoint evaluate_schedule(std::int64_t t, const ScheduleConfig &cfg) {
  switch (cfg.kind) {
  case ScheduleKind::CosineAnnealing:
    return {t, cosine_annealing(t, cfg), cfg.momentum};
  case ScheduleKind::CosineWarmup:
    return {t, cosine_warmup(t, cfg), cfg.momentum};
  case ScheduleKind::OneCycle:
    return one_cycle(t, cfg);
  case ScheduleKind::FixedOneCycle:
    return fixed_one_cycle(t, cfg);
  }
  throw ConfigError("unknown schedule kind");
}

NoiseScaleReport noise_scale(double lr, std::int64_t dataset_size,
                             std::int64_t batch_size, double momentum) {
  if (batch_size < 1)
    throw ConfigError("batch_size must be at least 1");
  if (momentum >= 1.0)
    throw NumericError("noise scale is singular at momentum >= 1");
  NoiseScaleReport r;
  r.lr = lr;
  r.dataset_size = dataset_size;
  r.batch_size = batch_size;
  r.momentum = momentum;
  r.noise_scale = lr * static_cast<double>(dataset_size) /
                  (static_cast<double>(batch_size) * (1.0 - momentum));
  return r;
}

} // namespace fastssl
