#pragma once

// One entry point for every acquisition strategy the harness can run.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "balance/acquisition.hpp"
#include "balance/ensemble.hpp"
#include "balance/error.hpp"
#include "balance/parallel.hpp"
#include "balance/partition.hpp"
#include "balance/sampling.hpp"
#include "balance/selection.hpp"

namespace balance {

enum class Algorithm {
  balance,
  batch_balance,
  power_balance,
  bald,
  power_bald,
  batch_bald,
  mean_std,
  variation_ratio,
  random,
  balance_partition,
};

struct AlgorithmName {
  Algorithm algorithm;
  std::string_view name;
};

inline constexpr AlgorithmName kAlgorithmNames[] = {
    {Algorithm::balance, "balance"},
    {Algorithm::batch_balance, "batch-balance"},
    {Algorithm::power_balance, "power-balance"},
    {Algorithm::bald, "bald"},
    {Algorithm::power_bald, "power-bald"},
    {Algorithm::batch_bald, "batch-bald"},
    {Algorithm::mean_std, "mean-std"},
    {Algorithm::variation_ratio, "variation-ratio"},
    {Algorithm::random, "random"},
    {Algorithm::balance_partition, "balance-partition"},
};

inline Algorithm parse_algorithm(std::string_view name) {
  for (const auto& entry : kAlgorithmNames) {
    if (entry.name == name) return entry.algorithm;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

inline std::string_view algorithm_name(Algorithm algorithm) {
  for (const auto& entry : kAlgorithmNames) {
    if (entry.algorithm == algorithm) return entry.name;
  }
  return "?";
}

/// Everything a strategy may look at for one acquisition round.
struct AcquisitionRequest {
  Algorithm algorithm = Algorithm::batch_balance;
  const PredictionTensor* pool = nullptr;   // S x N_pool x C
  const LabelMatrix* ref_labels = nullptr;  // S x N_ref hard labels
  EnsemblePairs pairs;                      // edge mask already applied
  double tau = 0.0;
  std::vector<std::size_t> candidates;      // unlabeled pool indices
  SelectionConfig config;
};

namespace detail {

inline Selection ranked(std::span<const std::size_t> candidates, std::span<const double> scores,
                        std::size_t batch, bool power, double beta, bool zero_fallback, Rng& rng) {
  Selection out;
  std::vector<std::size_t> picks;
  if (zero_fallback && std::all_of(scores.begin(), scores.end(), [](double s) { return s == 0.0; })) {
    out.path = SelectionPath::uniform_fallback;
    picks = uniform_subset(candidates.size(), batch, rng);
  } else {
    picks = power ? power_sample(scores, beta, batch, rng) : top_b(scores, batch);
  }
  for (std::size_t pos : picks) {
    out.indices.push_back(candidates[pos]);
    out.scores.push_back(scores[pos]);
  }
  return out;
}

template <typename Score>
std::vector<double> score_all(std::span<const std::size_t> candidates, Score&& score) {
  std::vector<double> out(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t i) { out[i] = score(candidates[i]); });
  return out;
}

/// Greedy BatchBALD with exact joint enumeration at every step.
inline Selection greedy_batchbald(std::span<const std::size_t> candidates, const PredictionTensor& tensor,
                                  std::span<const std::size_t> hyps, std::size_t batch) {
  configuration_count(tensor.num_classes(), batch);
  Selection out;
  std::vector<std::uint8_t> taken(candidates.size(), 0);
  std::vector<double> scores(candidates.size());
  for (std::size_t b = 0; b < batch; ++b) {
    parallel_for(candidates.size(), [&](std::size_t i) {
      if (taken[i]) return;
      std::vector<std::size_t> trial = out.indices;
      trial.push_back(candidates[i]);
      scores[i] = batchbald_exact(trial, tensor, hyps);
    });
    std::size_t best = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!taken[i] && (best == candidates.size() || scores[i] > scores[best])) best = i;
    }
    taken[best] = 1;
    out.indices.push_back(candidates[best]);
    out.scores.push_back(scores[best]);
  }
  return out;
}

}  // namespace detail

inline Selection acquire(const AcquisitionRequest& request, Rng& rng) {
  const PredictionTensor& tensor = *request.pool;
  const auto& candidates = request.candidates;
  const std::size_t batch = request.config.batch_size;
  const double beta = request.config.coldness;
  request.config.validate();
  if (candidates.empty()) throw ConfigError("no unlabeled candidates left");
  if (batch > candidates.size()) {
    throw ConfigError("batch size " + std::to_string(batch) + " exceeds pool size " +
                      std::to_string(candidates.size()));
  }
  const auto hyps = request.pairs.hypotheses();
  const auto delta = [&](std::size_t x) { return balance_point(x, request.pairs, tensor); };

  switch (request.algorithm) {
    case Algorithm::balance:
      return detail::ranked(candidates, detail::score_all(candidates, delta), batch, false, beta, true, rng);
    case Algorithm::batch_balance:
      return select_batch(candidates, request.pairs, tensor, request.config, rng);
    case Algorithm::power_balance:
      return detail::ranked(candidates, detail::score_all(candidates, delta), batch, true, beta, false, rng);
    case Algorithm::bald:
    case Algorithm::power_bald: {
      const auto scores = detail::score_all(candidates, [&](std::size_t x) { return bald_point(x, tensor, hyps); });
      return detail::ranked(candidates, scores, batch, request.algorithm == Algorithm::power_bald, beta, false, rng);
    }
    case Algorithm::batch_bald:
      return detail::greedy_batchbald(candidates, tensor, hyps, batch);
    case Algorithm::mean_std: {
      const auto scores = detail::score_all(candidates, [&](std::size_t x) { return mean_std(x, tensor, hyps); });
      return detail::ranked(candidates, scores, batch, false, beta, false, rng);
    }
    case Algorithm::variation_ratio: {
      const auto scores =
          detail::score_all(candidates, [&](std::size_t x) { return variation_ratio(x, tensor, hyps); });
      return detail::ranked(candidates, scores, batch, false, beta, false, rng);
    }
    case Algorithm::random: {
      const std::vector<double> zeros(candidates.size(), 0.0);
      return detail::ranked(candidates, zeros, batch, false, beta, true, rng);
    }
    case Algorithm::balance_partition: {
      if (request.ref_labels == nullptr) throw ConfigError("balance-partition needs reference labels");
      const Partition partition = fft_cluster(*request.ref_labels, hyps, request.tau);
      const EdgeSet edges = induced_edges(partition);
      const auto scores = detail::score_all(
          candidates, [&](std::size_t x) { return partition_delta(x, edges, hyps, tensor); });
      return detail::ranked(candidates, scores, batch, false, beta, true, rng);
    }
  }
  throw ConfigError("unhandled algorithm");
}

}  // namespace balance
