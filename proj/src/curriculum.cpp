// SPDX-License-Identifier: Apache-2.0
#include "fastssl/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fastssl/error.hpp"

namespace fastssl {

void ProgressivePlan::validate() const {
  if (total_steps < 1)
    throw ConfigError("total_steps must be positive");
  if (warmup_steps < 0 || warmup_steps >= total_steps)
    throw ConfigError("warmup_steps must lie in [0, total_steps)");
  if (quantum < 1)
    throw ConfigError("quantum must be positive");
  if (res_min < 1 || res_max < 1)
    throw ConfigError("resolutions must be positive");
  if (res_min > res_max)
    throw ConfigError("res_min must not exceed res_max");
  if (res_min % quantum != 0 || res_max % quantum != 0)
    throw ConfigError("res_min and res_max must be multiples of quantum " +
                      std::to_string(quantum));
  if (num_stages < 0)
    throw ConfigError("num_stages must be nonnegative");
  if (mag_min > mag_max)
    throw ConfigError("mag_min must not exceed mag_max");
}

int ProgressivePlan::stages() const {
  if (num_stages > 0)
    return num_stages;
  return (res_max - res_min) / quantum + 1;
}

int round_to_quantum(double value, int quantum) {
  const double q = static_cast<double>(quantum);
  return static_cast<int>(std::floor(value / q + 0.5)) * quantum;
}

int resolution_at(std::int64_t t, const ProgressivePlan &plan) {
  if (t < 0 || t > plan.total_steps)
    throw RangeError("step " + std::to_string(t) + " outside [0, " +
                     std::to_string(plan.total_steps) + "]");
  const int k = plan.stages();
  if (t < plan.warmup_steps || k == 1)
    return plan.res_max;

  const std::int64_t span = plan.total_steps - plan.warmup_steps;
  std::int64_t stage = (t - plan.warmup_steps) * k / span;
  stage = std::clamp<std::int64_t>(stage, 0, k - 1);

  const double offset = static_cast<double>(stage) *
                        static_cast<double>(plan.res_max - plan.res_min) /
                        static_cast<double>(k - 1);
  const int r = plan.res_min + round_to_quantum(offset, plan.quantum);
  return std::clamp(r, plan.res_min, plan.res_max);
}

double magnitude_at(std::int64_t t, const ProgressivePlan &plan) {
  if (t < 0 || t > plan.total_steps)
    throw RangeError("step " + std::to_string(t) + " outside [0, " +
                     std::to_string(plan.total_steps) + "]");
  const double frac =
      static_cast<double>(t) / static_cast<double>(plan.total_steps);
  return std::lerp(plan.mag_min, plan.mag_max, frac);
}

CurriculumPoint curriculum_at(std::int64_t t, const ProgressivePlan &plan) {
  return {t, resolution_at(t, plan), magnitude_at(t, plan)};
}

std::vector<int> resolution_sequence(const ProgressivePlan &plan) {
  plan.validate();
  std::vector<int> seq;
  seq.reserve(static_cast<std::size_t>(plan.total_steps));
  for (std::int64_t t = 0; t < plan.total_steps; ++t)
    seq.push_back(resolution_at(t, plan));
  return seq;
}

double speedup_eq9(std::span<const int> resolutions, int res_max) {
  if (resolutions.empty() || res_max < 1)
    throw ConfigError("speedup needs a nonempty sequence and positive res_max");
  const double rmax = res_max;
  double sum = 0.0;
  for (int r : resolutions) {
    if (r < 1)
      throw ConfigError("resolutions must be positive");
    const double ratio = rmax / static_cast<double>(r);
    sum += ratio * ratio;
  }
  return sum / static_cast<double>(resolutions.size());
}

double speedup_eq9(const ProgressivePlan &plan) {
  const auto seq = resolution_sequence(plan);
  return speedup_eq9(seq, plan.res_max);
}

double cost_ratio(std::span<const int> resolutions, int res_max) {
  if (resolutions.empty() || res_max < 1)
    throw ConfigError("cost ratio needs a nonempty sequence and positive res_max");
  const double rmax = res_max;
  double sum = 0.0;
  for (int r : resolutions) {
    if (r < 1)
      throw ConfigError("resolutions must be positive");
    sum += static_cast<double>(r) * static_cast<double>(r);
  }
  return static_cast<double>(resolutions.size()) * rmax * rmax / sum;
}

double cost_ratio(const ProgressivePlan &plan) {
  const auto seq = resolution_sequence(plan);
  return cost_ratio(seq, plan.res_max);
}

} // namespace fastssl
