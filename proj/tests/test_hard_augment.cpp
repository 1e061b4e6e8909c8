// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <stdexcept>

#include "fastssl/hard_augment.hpp"

using namespace fastssl;

TEST(HardAugment, PairEnumeration) {
  const auto p4 = enumerate_pairs(4);
  const std::vector<PairIndex> expect = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  EXPECT_EQ(p4, expect);
  for (int m = 2; m <= 9; ++m) {
    const auto pairs = enumerate_pairs(m);
    ASSERT_EQ(pairs.size(), pair_count(m));
    ASSERT_EQ(pair_count(m), static_cast<std::size_t>(m * (m - 1) / 2));
    for (std::size_t k = 0; k < pairs.size(); ++k)
      ASSERT_EQ(pair_rank(pairs[k], m), k);
  }
  EXPECT_THROW(enumerate_pairs(1), ConfigError);
  EXPECT_THROW(pair_rank({2, 1}, 4), RangeError);
}

TEST(HardAugment, SelectHardestExamples) {
  const std::vector<double> l = {0.1, 0.9, 0.3, 0.2, 0.5, 0.4};
  EXPECT_EQ(select_hardest(l, 4), (PairIndex{0, 2}));
  const std::vector<double> tie = {0.7, 0.1, 0.7};
  EXPECT_EQ(select_hardest(tie, 3), (PairIndex{0, 1}));
  const std::vector<double> one = {-0.4};
  EXPECT_EQ(select_hardest(one, 2), (PairIndex{0, 1}));
}

TEST(HardAugment, SelectMatchesBruteForce) {
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<int> coarse(0, 4);
  for (int m = 2; m <= 8; ++m) {
    const auto pairs = enumerate_pairs(m);
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<double> row(pairs.size());
      for (auto &v : row)
        v = coarse(gen) / 4.0;
      std::size_t best = 0;
      for (std::size_t k = 1; k < row.size(); ++k)
        if (row[k] > row[best])
          best = k;
      ASSERT_EQ(select_hardest(row, m), pairs[best]);
    }
  }
}

TEST(HardAugment, SelectErrors) {
  const std::vector<double> short_row = {0.1, 0.2};
  EXPECT_THROW(select_hardest(short_row, 3), SelectionError);
  const std::vector<double> nan_row = {0.1, std::nan(""), 0.3};
  EXPECT_THROW(select_hardest(nan_row, 3), SelectionError);
  EXPECT_THROW(select_rows({0.1, 0.2, 0.3}, 2, 3), SelectionError);
}

TEST(HardAugment, OverheadValues) {
  SelectionConfig c;
  c.train_resolution = 224;
  c.selection_resolution = 64;
  c.num_positives = 4;
  c.iteration_cost_ratio = 6.0;
  const auto r4 = selection_overhead(c);
  EXPECT_NEAR(r4.overhead, 16384.0 / (301056.0 + 16384.0), 1e-15);
  EXPECT_NEAR(100.0 * r4.overhead, 5.16, 0.005);
  EXPECT_DOUBLE_EQ(r4.speed_factor + r4.overhead, 1.0);
  c.num_positives = 6;
  EXPECT_NEAR(100.0 * selection_overhead(c).overhead, 7.547, 5e-4);
  c.selection_resolution = 224;
  c.num_positives = 2;
  EXPECT_NEAR(selection_overhead(c).speed_factor, 0.75, 1e-15);
}

TEST(HardAugment, OverheadMonotoneGrid) {
  auto ov = [](int r, int s, int m, double cr) {
    SelectionConfig c;
    c.train_resolution = r;
    c.selection_resolution = s;
    c.num_positives = m;
    c.iteration_cost_ratio = cr;
    return selection_overhead(c).overhead;
  };
  for (int m = 2; m < 8; ++m)
    for (int s : {16, 32, 64})
      for (int r : {128, 224})
        for (double cr : {4.0, 6.0}) {
          const double o = ov(r, s, m, cr);
          EXPECT_LT(o, ov(r, s, m + 1, cr));
          EXPECT_LT(o, ov(r, s * 2, m, cr));
          EXPECT_GT(o, ov(r * 2, s, m, cr));
          EXPECT_GT(o, ov(r, s, m, cr + 1.0));
        }
}

TEST(HardAugment, ConfigErrors) {
  SelectionConfig c;
  c.num_positives = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.selection_resolution = 300;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.iteration_cost_ratio = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(HardAugment, BatchPipeline) {
  // Views are integers; "downsampling" halves them; pair loss is |a - b|.
  SelectionConfig cfg;
  cfg.num_positives = 3;
  cfg.selection_resolution = 4;
  cfg.train_resolution = 8;
  const std::vector<std::vector<double>> views = {{1, 5, 2}, {10, 9, 30}};
  int downsampled = 0;
  auto down = [&](double v, int res) {
    EXPECT_EQ(res, 4);
    ++downsampled;
    return v / 2.0;
  };
  auto oracle = [](const std::vector<std::vector<double>> &small) {
    std::vector<double> out;
    for (const auto &s : small)
      for (auto [i, j] : enumerate_pairs(static_cast<int>(s.size())))
        out.push_back(std::abs(s[i] - s[j]));
    return out;
  };
  const auto res = hard_select_batch(views, down, oracle, cfg);
  EXPECT_EQ(downsampled, 6);
  ASSERT_EQ(res.chosen.size(), 2u);
  EXPECT_EQ(res.chosen[0], (PairIndex{0, 1}));
  EXPECT_EQ(res.chosen[1], (PairIndex{1, 2}));
  EXPECT_DOUBLE_EQ(res.chosen_loss(1), 10.5);

  const std::vector<std::vector<double>> ragged = {{1, 2, 3}, {1, 2}};
  EXPECT_THROW(hard_select_batch(ragged, down, oracle, cfg), SelectionError);
  auto failing = [](const std::vector<std::vector<double>> &) -> std::vector<double> {
    throw std::runtime_error("boom");
  };
  EXPECT_THROW(hard_select_batch(views, down, failing, cfg), SelectionError);
}
