#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "balance/acquisition.hpp"
#include "balance/batch_state.hpp"
#include "balance/ensemble.hpp"
#include "balance/error.hpp"
#include "balance/parallel.hpp"
#include "balance/random.hpp"
#include "balance/sampling.hpp"
#include "balance/tensor.hpp"

namespace balance {

struct SelectionConfig {
  std::size_t batch_size = 1;             // B
  std::size_t num_pairs = 100;            // K
  std::size_t num_config_samples = 10000; // M
  double coldness = 1.0;                  // beta
  std::size_t enumeration_threshold = 4;  // exact while b < this
  std::size_t dispatch_threshold = 50;    // greedy while B < this
  double subsample_factor = 2.0;          // |C| = round(c * B)
  std::size_t max_cluster_iters = 5;      // T
  std::uint64_t seed = 0;

  void validate() const {
    if (batch_size < 1) throw ConfigError("batch size B must be >= 1");
    if (num_pairs < 1) throw ConfigError("pair count K must be >= 1");
    if (num_config_samples < 1) throw ConfigError("configuration sample count M must be >= 1");
    if (!(coldness >= 0.0)) throw ConfigError("coldness beta must be >= 0");
    if (!(subsample_factor >= 1.0)) throw ConfigError("subsample factor c must be >= 1");
    if (max_cluster_iters < 1) throw ConfigError("max_cluster_iters T must be >= 1");
  }
};

enum class SelectionPath { greedy, clustering, uniform_fallback };

struct Selection {
  std::vector<std::size_t> indices;  // tensor point indices, in selection order
  std::vector<double> scores;        // score that justified each pick
  SelectionPath path = SelectionPath::greedy;
};

/// Single-point Delta for every pool entry.
inline std::vector<double> point_scores(std::span<const std::size_t> pool, const EnsemblePairs& pairs,
                                        const PredictionTensor& tensor) {
  std::vector<double> scores(pool.size());
  parallel_for(pool.size(), [&](std::size_t i) { scores[i] = balance_point(pool[i], pairs, tensor); });
  return scores;
}

namespace detail {

inline void check_pool(std::span<const std::size_t> pool, std::size_t batch, const PredictionTensor& tensor) {
  if (pool.empty()) throw ConfigError("empty pool");
  if (batch > pool.size()) {
    throw ConfigError("batch size " + std::to_string(batch) + " exceeds pool size " +
                      std::to_string(pool.size()));
  }
  std::vector<std::uint8_t> seen(tensor.num_points(), 0);
  for (std::size_t x : pool) {
    if (x >= tensor.num_points()) throw ConfigError("pool index out of range");
    if (seen[x]++) throw ConfigError("pool contains duplicate index " + std::to_string(x));
  }
}

}  // namespace detail

/// Greedy batch construction: step b adds argmax_x Delta(A_{b-1} + {x}),
/// enumerating configurations while b < enumeration_threshold and switching to
/// M importance-sampled configurations afterwards. Ties go to the lowest index.
inline Selection greedy_select(std::span<const std::size_t> pool, const EnsemblePairs& pairs,
                               const PredictionTensor& tensor, const SelectionConfig& config,
                               Rng& rng) {
  detail::check_pool(pool, config.batch_size, tensor);
  Selection out;
  out.path = SelectionPath::greedy;
  BatchState state = empty_state(pairs, tensor.num_classes());
  std::vector<std::uint8_t> taken(pool.size(), 0);
  std::vector<double> scores(pool.size());
  for (std::size_t b = 1; b <= config.batch_size; ++b) {
    if (b >= config.enumeration_threshold && state.mode == StateMode::exact) {
      state = to_sampled(state, config.num_config_samples, rng);
    }
    parallel_for(pool.size(), [&](std::size_t i) {
      scores[i] = taken[i] ? -1.0 : state_delta(state, pool[i], pairs, tensor);
    });
    std::size_t best = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (taken[i]) continue;
      if (best == pool.size() || scores[i] > scores[best] ||
          (scores[i] == scores[best] && pool[i] < pool[best])) {
        best = i;
      }
    }
    taken[best] = 1;
    out.indices.push_back(pool[best]);
    out.scores.push_back(scores[best]);
    if (b == config.batch_size) break;
    state = state.mode == StateMode::exact ? extend_state(state, pool[best], pairs, tensor)
                                           : sample_configs(state, pool[best], pairs, tensor, rng);
  }
  return out;
}

/// I(x, y) = Delta(x) + Delta(y) - Delta({x, y}).
inline double info_measure(std::size_t x, std::size_t y, const EnsemblePairs& pairs,
                           const PredictionTensor& tensor) {
  const std::size_t both[] = {x, y};
  return balance_point(x, pairs, tensor) + balance_point(y, pairs, tensor) -
         balance_exact(both, pairs, tensor);
}

/// Symmetric |C| x |C| matrix of I over the subset, row-major.
inline std::vector<double> info_matrix(std::span<const std::size_t> subset, std::span<const double> singles,
                                       const EnsemblePairs& pairs, const PredictionTensor& tensor) {
  const std::size_t n = subset.size();
  std::vector<double> info(n * n, 0.0);
  const BatchState root = empty_state(pairs, tensor.num_classes());
  parallel_for(n, [&](std::size_t i) {
    const BatchState with_x = extend_state(root, subset[i], pairs, tensor);
    for (std::size_t j = i; j < n; ++j) {
      info[i * n + j] = singles[i] + singles[j] - state_delta(with_x, subset[j], pairs, tensor);
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) info[i * n + j] = info[j * n + i];
  }
  return info;
}

struct Clustering {
  std::vector<std::size_t> centroids;              // tensor point indices
  std::vector<std::vector<std::size_t>> clusters;  // tensor point indices per centroid
  std::size_t iterations = 0;
};

/// Lloyd-style medoid clustering with I as similarity. Initial centroids are
/// drawn with p(x) ~ Delta(x)^beta. Each centroid always stays in its own
/// cluster, so clusters never empty out; the loop stops when assignments repeat
/// or after T iterations.
inline Clustering balance_clustering(std::span<const std::size_t> subset, const EnsemblePairs& pairs,
                                     const PredictionTensor& tensor, const SelectionConfig& config,
                                     Rng& rng, std::span<const double> subset_scores = {}) {
  detail::check_pool(subset, config.batch_size, tensor);
  const std::size_t n = subset.size();
  const std::size_t clusters = config.batch_size;
  const std::vector<double> singles = subset_scores.empty()
                                          ? point_scores(subset, pairs, tensor)
                                          : std::vector<double>(subset_scores.begin(), subset_scores.end());
  const auto info = info_matrix(subset, singles, pairs, tensor);

  std::vector<std::size_t> centre = power_sample(singles, config.coldness, clusters, rng);
  std::vector<std::size_t> assignment(n, 0);
  std::vector<std::size_t> previous;
  std::size_t iterations = 0;
  while (iterations < config.max_cluster_iters) {
    ++iterations;
    std::vector<std::int64_t> centre_of(n, -1);
    for (std::size_t j = 0; j < clusters; ++j) centre_of[centre[j]] = static_cast<std::int64_t>(j);
    for (std::size_t i = 0; i < n; ++i) {
      if (centre_of[i] >= 0) {
        assignment[i] = static_cast<std::size_t>(centre_of[i]);
        continue;
      }
      std::size_t best = 0;
      for (std::size_t j = 1; j < clusters; ++j) {
        if (info[i * n + centre[j]] > info[i * n + centre[best]]) best = j;
      }
      assignment[i] = best;
    }
    if (assignment == previous) break;
    previous = assignment;

    bool moved = false;
    for (std::size_t j = 0; j < clusters; ++j) {
      std::size_t best = centre[j];
      double best_sum = -INFINITY;
      for (std::size_t cand = 0; cand < n; ++cand) {
        if (assignment[cand] != j) continue;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (assignment[i] == j) sum += info[i * n + cand];
        }
        if (sum > best_sum) {
          best_sum = sum;
          best = cand;
        }
      }
      moved = moved || best != centre[j];
      centre[j] = best;
    }
    if (!moved) break;
  }

  Clustering out;
  out.iterations = iterations;
  out.clusters.assign(clusters, {});
  for (std::size_t i = 0; i < n; ++i) out.clusters[assignment[i]].push_back(subset[i]);
  for (std::size_t j = 0; j < clusters; ++j) out.centroids.push_back(subset[centre[j]]);
  return out;
}

/// Candidate-subset size for the clustering path.
inline std::size_t downsample_size(const SelectionConfig& config, std::size_t pool_size) {
  const auto wanted = static_cast<std::size_t>(std::llround(config.subsample_factor *
                                                            static_cast<double>(config.batch_size)));
  return std::clamp(wanted, config.batch_size, pool_size);
}

/// Batch selection dispatcher: greedy selection for B below the dispatch
/// threshold, otherwise power-sampled downsampling followed by clustering.
/// When every pool score is zero the batch is a uniform random subset.
inline Selection select_batch(std::span<const std::size_t> pool, const EnsemblePairs& pairs,
                              const PredictionTensor& tensor, const SelectionConfig& config,
                              Rng& rng) {
  config.validate();
  detail::check_pool(pool, config.batch_size, tensor);
  const auto scores = point_scores(pool, pairs, tensor);
  if (std::all_of(scores.begin(), scores.end(), [](double s) { return s == 0.0; })) {
    Selection out;
    out.path = SelectionPath::uniform_fallback;
    for (std::size_t pos : uniform_subset(pool.size(), config.batch_size, rng)) {
      out.indices.push_back(pool[pos]);
      out.scores.push_back(0.0);
    }
    return out;
  }
  if (config.batch_size < config.dispatch_threshold) return greedy_select(pool, pairs, tensor, config, rng);

  const std::size_t subset_size = downsample_size(config, pool.size());
  const auto picked = power_sample(scores, config.coldness, subset_size, rng);
  std::vector<std::size_t> subset;
  std::vector<double> subset_scores;
  for (std::size_t pos : picked) {
    subset.push_back(pool[pos]);
    subset_scores.push_back(scores[pos]);
  }
  const Clustering clustering = balance_clustering(subset, pairs, tensor, config, rng, subset_scores);
  Selection out;
  out.path = SelectionPath::clustering;
  out.indices = clustering.centroids;
  for (std::size_t x : out.indices) {
    const auto it = std::find(subset.begin(), subset.end(), x);
    out.scores.push_back(subset_scores[static_cast<std::size_t>(it - subset.begin())]);
  }
  return out;
}

}  // namespace balance
