// SPDX-License-Identifier: Apache-2.0
/**
 * @file   knn.hpp
 * @brief  Cosine-similarity k-nearest-neighbour probe.
 */
#pragma once

#include <vector>

#include "fastssl/sim/tensor.hpp"

namespace fastssl::sim {

struct KnnOptions {
  int k = 20;
  /// Skip the reference row with the same index as the query; used when the
  /// query set is the reference set itself.
  bool exclude_self = false;
};

/**
 * Majority vote among the k most cosine-similar reference rows (similarity
 * ties go to the lower reference index, vote ties to the smaller class).
 * Returns the fraction of queries whose vote matches their label.
 */
double knn_eval(const Tensor<float> &reference, const std::vector<int> &ref_labels,
                const Tensor<float> &queries, const std::vector<int> &query_labels,
                const KnnOptions &opts = {});

} // namespace fastssl::sim
