// SPDX-License-Identifier: Apache-2.0
#include "fastssl/sim/knn.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fastssl::sim {

namespace {

std::vector<double> normalized_rows(const Tensor<float> &t) {
  const std::size_t n = t.dim(0), d = t.dim(1);
  std::vector<double> out(n * d);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c)
      s += static_cast<double>(t[r * d + c]) * t[r * d + c];
    const double inv = s > 0.0 ? 1.0 / std::sqrt(s) : 0.0;
    for (std::size_t c = 0; c < d; ++c)
      out[r * d + c] = t[r * d + c] * inv;
  }
  return out;
}

} // namespace

double knn_eval(const Tensor<float> &reference,
                const std::vector<int> &ref_labels,
                const Tensor<float> &queries,
                const std::vector<int> &query_labels, const KnnOptions &opts) {
  if (reference.shape.size() != 2 || queries.shape.size() != 2 ||
      reference.dim(0) == 0 || queries.dim(0) == 0)
    throw ConfigError("knn_eval needs non-empty [N, d] embedding sets");
  if (reference.dim(1) != queries.dim(1))
    throw ConfigError("knn_eval: embedding dimensions differ");
  if (ref_labels.size() != reference.dim(0) ||
      query_labels.size() != queries.dim(0))
    throw ConfigError("knn_eval: label count mismatch");
  const std::size_t n_ref = reference.dim(0), n_q = queries.dim(0),
                    d = reference.dim(1);
  const std::size_t available = opts.exclude_self ? n_ref - 1 : n_ref;
  if (opts.k < 1 || static_cast<std::size_t>(opts.k) > available)
    throw ConfigError("knn_eval: k must lie in [1, reference size]");

  const auto ref = normalized_rows(reference);
  const auto qry = normalized_rows(queries);
  const auto k = static_cast<std::size_t>(opts.k);

  std::vector<std::pair<double, std::size_t>> sims;
  sims.reserve(n_ref);
  std::size_t correct = 0;
  for (std::size_t q = 0; q < n_q; ++q) {
    sims.clear();
    const double *qv = qry.data() + q * d;
    for (std::size_t r = 0; r < n_ref; ++r) {
      if (opts.exclude_self && r == q)
        continue;
      const double *rv = ref.data() + r * d;
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c)
        s += qv[c] * rv[c];
      sims.emplace_back(s, r);
    }
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k),
                      sims.end(), [](const auto &a, const auto &b) {
                        return a.first != b.first ? a.first > b.first
                                                  : a.second < b.second;
                      });
    std::map<int, int> votes;
    for (std::size_t i = 0; i < k; ++i)
      ++votes[ref_labels[sims[i].second]];
    int best_label = votes.begin()->first;
    int best_count = -1;
    for (const auto &[label, count] : votes)
      if (count > best_count) {
        best_count = count;
        best_label = label;
      }
    if (best_label == query_labels[q])
      ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n_q);
}

} // namespace fastssl::sim
