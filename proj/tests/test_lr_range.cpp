// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "fastssl/error.hpp"
#include "fastssl/lr_range.hpp"

using namespace fastssl;

namespace {

RangeTrainer quadratic(double lambda, double &x) {
  return [lambda, &x](double lr) {
    x -= lr * lambda * x;
    const double f = 0.5 * lambda * x * x;
    return std::pair{f, f};
  };
}

} // namespace

TEST(LrRange, SweepEndpointsAndLogLinearity) {
  RangeTestConfig c;
  c.lr_lo = 1e-4;
  c.lr_hi = 3.0;
  c.sweep_steps = 101;
  EXPECT_EQ(lr_sweep(0, c), 1e-4);
  EXPECT_EQ(lr_sweep(100, c), 3.0);
  const double step = std::log(3.0 / 1e-4) / 100.0;
  for (std::int64_t t = 1; t < 100; ++t)
    EXPECT_NEAR(std::log(lr_sweep(t, c)) - std::log(lr_sweep(t - 1, c)), step, 1e-12);
  EXPECT_THROW(lr_sweep(101, c), RangeError);
}

TEST(LrRange, QuadraticMaxIsLastStableRate) {
  // Plain gradient descent on lambda/2 x^2 shrinks the loss at every rate
  // below 2/lambda and grows it above, so the raw-loss minimum sits at the
  // last sweep rate not exceeding 2/lambda.
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> loglam(std::log(0.2), std::log(50.0));
  RangeTestConfig c;
  c.lr_lo = 1e-3;
  c.lr_hi = 20.0;
  c.sweep_steps = 400;
  const double ratio = lr_sweep(1, c) / lr_sweep(0, c);
  for (int k = 0; k < 20; ++k) {
    const double lambda = std::exp(loglam(gen));
    double x = 1.0;
    const auto res = run_range_test(quadratic(lambda, x), c);
    EXPECT_LE(res.max_lr, 2.0 / lambda) << lambda;
    EXPECT_GT(res.max_lr * ratio, 2.0 / lambda) << lambda;
    EXPECT_TRUE(res.min_detected);
    EXPECT_LE(res.min_lr, res.max_lr);
  }
}

TEST(LrRange, QuadraticWithLossFloorDiverges) {
  // An irreducible floor keeps the loss away from zero, so the blow-up past
  // 2/lambda shows up against the running minimum.
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> loglam(std::log(2.0), std::log(50.0));
  RangeTestConfig c;
  c.lr_lo = 1e-3;
  c.lr_hi = 20.0;
  c.sweep_steps = 400;
  for (int k = 0; k < 20; ++k) {
    const double lambda = std::exp(loglam(gen));
    double x = 1.0;
    auto inner = quadratic(lambda, x);
    const auto res = run_range_test(
        [&](double lr) {
          const double f = inner(lr).first + 0.01;
          return std::pair{f, f};
        },
        c);
    EXPECT_TRUE(res.diverged) << lambda;
    EXPECT_GT(lr_sweep(res.divergence_step, c), 2.0 / lambda);
    EXPECT_LE(res.max_lr, 2.0 / lambda) << lambda;
    EXPECT_EQ(res.trace.size(), static_cast<std::size_t>(res.divergence_step + 1));
  }
}

TEST(LrRange, NonFiniteLossStopsSweep) {
  RangeTestConfig c;
  c.sweep_steps = 50;
  int calls = 0;
  const auto res = run_range_test(
      [&](double) {
        ++calls;
        const double v = calls < 20 ? 1.0 / calls : std::numeric_limits<double>::quiet_NaN();
        return std::pair{v, v};
      },
      c);
  EXPECT_TRUE(res.diverged);
  EXPECT_EQ(res.divergence_step, 19);
  EXPECT_EQ(res.max_lr, lr_sweep(18, c));
  EXPECT_EQ(res.trace.size(), 19u);
}

TEST(LrRange, FlatLossNeverDetects) {
  RangeTestConfig c;
  c.sweep_steps = 30;
  const auto res = run_range_test([](double) { return std::pair{1.0, 1.0}; }, c);
  EXPECT_FALSE(res.diverged);
  EXPECT_FALSE(res.min_detected);
  EXPECT_EQ(res.min_lr, c.lr_lo);
  EXPECT_EQ(res.divergence_step, -1);
}

TEST(LrRange, OffsetMakesNegativeLossesUsable) {
  // Loss in [-1, 0]: decreasing then blowing up towards +1.
  RangeTestConfig c;
  c.sweep_steps = 200;
  c.lr_hi = 200.0;
  c.loss_offset = 1.0;
  double x = 1.0;
  auto inner = quadratic(1.0, x);
  const auto res = run_range_test(
      [&](double lr) {
        auto [f, g] = inner(lr);
        const double l = std::tanh(f) - 1.0 + 1e-3;
        (void)g;
        return std::pair{l, l};
      },
      c);
  EXPECT_TRUE(res.diverged);
  EXPECT_LE(res.max_lr, 2.0);
}

TEST(LrRange, TraceCsvAndValidation) {
  RangeTestConfig c;
  c.sweep_steps = 10;
  double x = 1.0;
  const auto res = run_range_test(quadratic(1.0, x), c);
  std::ostringstream os;
  write_range_trace(os, res);
  EXPECT_EQ(os.str().rfind("step,lr,train_loss,val_loss\n", 0), 0u);
  c.lr_hi = c.lr_lo;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.sweep_steps = 5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.divergence_factor = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}
