#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "balance/random.hpp"
#include "balance/tensor.hpp"

namespace balance {

struct HypothesisPair {
  std::size_t first = 0;
  std::size_t second = 0;
  friend bool operator==(const HypothesisPair&, const HypothesisPair&) = default;
};

/// K pairs of posterior samples plus the per-pair edge indicator
/// 1[d_H(first, second) > tau]. A freshly drawn set has every edge active.
struct EnsemblePairs {
  std::vector<HypothesisPair> pairs;
  std::vector<std::uint8_t> edge_active;

  std::size_t size() const noexcept { return pairs.size(); }

  std::size_t active_count() const noexcept {
    return static_cast<std::size_t>(std::count(edge_active.begin(), edge_active.end(), 1));
  }

  /// The 2K hypothesis indices, pair members interleaved.
  std::vector<std::size_t> hypotheses() const {
    std::vector<std::size_t> out;
    out.reserve(2 * pairs.size());
    for (const auto& p : pairs) {
      out.push_back(p.first);
      out.push_back(p.second);
    }
    return out;
  }

  void validate(std::size_t num_hypotheses) const {
    if (edge_active.size() != pairs.size()) {
      throw std::invalid_argument("EnsemblePairs: edge mask length differs from pair count");
    }
    std::vector<std::uint8_t> seen(num_hypotheses, 0);
    for (const auto& p : pairs) {
      if (p.first >= num_hypotheses || p.second >= num_hypotheses) {
        throw std::invalid_argument("EnsemblePairs: hypothesis index out of range");
      }
      if (p.first == p.second) throw std::invalid_argument("EnsemblePairs: self pair");
      if (seen[p.first]++ || seen[p.second]++) {
        throw std::invalid_argument("EnsemblePairs: hypothesis used twice");
      }
    }
  }
};

/// Draw 2K distinct indices uniformly from [0, S) and pair them consecutively.
inline EnsemblePairs pair_hypotheses(std::size_t num_hypotheses, std::size_t num_pairs, Rng& rng) {
  if (2 * num_pairs > num_hypotheses) {
    throw std::invalid_argument("pair_hypotheses: need 2K <= S");
  }
  const auto draws = sample_without_replacement(num_hypotheses, 2 * num_pairs, rng);
  EnsemblePairs out;
  out.pairs.reserve(num_pairs);
  for (std::size_t k = 0; k < num_pairs; ++k) out.pairs.push_back({draws[2 * k], draws[2 * k + 1]});
  out.edge_active.assign(num_pairs, 1);
  return out;
}

/// Entry k is true iff the pair's Hamming distance on the reference labels
/// strictly exceeds tau.
inline std::vector<std::uint8_t> edge_mask(const EnsemblePairs& pairs, const LabelMatrix& ref_labels,
                                           double tau) {
  std::vector<std::uint8_t> mask;
  mask.reserve(pairs.size());
  for (const auto& p : pairs.pairs) {
    const double d = hamming_distance(ref_labels.row(p.first), ref_labels.row(p.second));
    mask.push_back(d > tau ? 1 : 0);
  }
  return mask;
}

inline EnsemblePairs with_edge_mask(EnsemblePairs pairs, const LabelMatrix& ref_labels, double tau) {
  pairs.edge_active = edge_mask(pairs, ref_labels, tau);
  return pairs;
}

struct TauSchedule {
  enum class Mode { fixed, annealed };
  Mode mode = Mode::annealed;
  double fixed_value = 0.0;
  double divisor = 4.0;
};

/// Threshold for the current round given the validation error rate.
inline double anneal_tau(const TauSchedule& schedule, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("anneal_tau: epsilon outside [0,1]");
  if (schedule.mode == TauSchedule::Mode::fixed) return std::clamp(schedule.fixed_value, 0.0, 1.0);
  if (!(schedule.divisor > 0.0)) throw std::invalid_argument("anneal_tau: divisor must be > 0");
  return std::clamp(epsilon / schedule.divisor, 0.0, 1.0);
}

}  // namespace balance
