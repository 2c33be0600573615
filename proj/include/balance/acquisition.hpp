#pragma once

// Point-wise and exact batch acquisition scores over posterior ensembles.
//
// All batch scores assume labels are conditionally independent given a
// hypothesis: p(y_1..y_b | w) = prod_t p(y_t | w), duplicated points included.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "balance/ensemble.hpp"
#include "balance/error.hpp"
#include "balance/tensor.hpp"

namespace balance {

/// Exact enumeration refuses more label configurations than this.
inline constexpr std::size_t kEnumerationCap = 1'000'000;

/// C^b, or throws CapacityError once it passes `cap`.
inline std::size_t configuration_count(std::size_t num_classes, std::size_t batch,
                                       std::size_t cap = kEnumerationCap) {
  std::size_t count = 1;
  for (std::size_t t = 0; t < batch; ++t) {
    if (count > cap / num_classes) {
      throw CapacityError("exact enumeration of " + std::to_string(num_classes) + "^" +
                          std::to_string(batch) + " label configurations exceeds the cap of " +
                          std::to_string(cap));
    }
    count *= num_classes;
  }
  return count;
}

/// lambda_y = p(y) / max_y' p(y').
inline std::vector<double> likelihood_ratio(std::span<const double> row) {
  const double peak = row.empty() ? 0.0 : *std::max_element(row.begin(), row.end());
  if (!(peak > 0.0)) throw std::invalid_argument("likelihood_ratio: all-zero row");
  std::vector<double> out(row.size());
  std::transform(row.begin(), row.end(), out.begin(), [peak](double p) { return p / peak; });
  return out;
}

namespace detail {

/// Joint p(y_1..y_b | hypothesis) for every configuration, first point as the
/// most significant digit.
inline std::vector<double> joint_likelihoods(const PredictionTensor& tensor, std::size_t hypothesis,
                                             std::span<const std::size_t> points) {
  std::vector<double> joint{1.0};
  const std::size_t classes = tensor.num_classes();
  for (std::size_t x : points) {
    const auto row = tensor.row(hypothesis, x);
    std::vector<double> next(joint.size() * classes);
    for (std::size_t j = 0; j < joint.size(); ++j) {
      for (std::size_t c = 0; c < classes; ++c) next[j * classes + c] = joint[j] * row[c];
    }
    joint = std::move(next);
  }
  return joint;
}

inline double peak_product(const PredictionTensor& tensor, std::size_t hypothesis,
                           std::span<const std::size_t> points) {
  double peak = 1.0;
  for (std::size_t x : points) {
    const auto row = tensor.row(hypothesis, x);
    peak *= *std::max_element(row.begin(), row.end());
  }
  return peak;
}

inline std::vector<std::size_t> all_hypotheses(const PredictionTensor& tensor,
                                               std::span<const std::size_t> hyps) {
  if (!hyps.empty()) return {hyps.begin(), hyps.end()};
  std::vector<std::size_t> out(tensor.num_hypotheses());
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

}  // namespace detail

/// Delta_BALanCe of a batch by full enumeration of its label configurations:
///
///   sum_y [ 1/(2K) sum_k p(y|w_k) + p(y|w'_k) ] * [ 1/K sum_k 1_k (1 - lam_k(y) lam'_k(y)) ]
///
/// where lam(y) = p(y|w) / max_y' p(y'|w). Result lies in [0, 1].
inline double balance_exact(std::span<const std::size_t> points, const EnsemblePairs& pairs,
                            const PredictionTensor& tensor, std::size_t cap = kEnumerationCap) {
  if (points.empty()) throw std::invalid_argument("balance_exact: empty batch");
  if (pairs.size() == 0) throw std::invalid_argument("balance_exact: no hypothesis pairs");
  const std::size_t configs = configuration_count(tensor.num_classes(), points.size(), cap);
  const std::size_t num_pairs = pairs.size();
  if (pairs.active_count() == 0) return 0.0;

  std::vector<double> mixture(configs, 0.0);
  std::vector<double> discount(configs, 0.0);
  for (std::size_t k = 0; k < num_pairs; ++k) {
    const auto& pair = pairs.pairs[k];
    const auto first = detail::joint_likelihoods(tensor, pair.first, points);
    const auto second = detail::joint_likelihoods(tensor, pair.second, points);
    for (std::size_t j = 0; j < configs; ++j) mixture[j] += first[j] + second[j];
    if (!pairs.edge_active[k]) continue;
    const double peak_first = detail::peak_product(tensor, pair.first, points);
    const double peak_second = detail::peak_product(tensor, pair.second, points);
    for (std::size_t j = 0; j < configs; ++j) {
      discount[j] += 1.0 - (first[j] / peak_first) * (second[j] / peak_second);
    }
  }
  double total = 0.0;
  const double k = static_cast<double>(num_pairs);
  for (std::size_t j = 0; j < configs; ++j) total += (mixture[j] / (2.0 * k)) * (discount[j] / k);
  return std::clamp(total, 0.0, 1.0);
}

inline double balance_point(std::size_t x, const EnsemblePairs& pairs, const PredictionTensor& tensor) {
  const std::size_t points[] = {x};
  return balance_exact(points, pairs, tensor);
}

/// Shannon entropy in bits; 0 log 0 = 0.
inline double entropy_bits(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

/// BatchBALD: I(y_1..y_b ; w) by exact enumeration over the given
/// hypotheses (all hypotheses when `hyps` is empty), uniformly weighted. Bits.
inline double batchbald_exact(std::span<const std::size_t> points, const PredictionTensor& tensor,
                              std::span<const std::size_t> hyps = {},
                              std::size_t cap = kEnumerationCap) {
  if (points.empty()) throw std::invalid_argument("batchbald_exact: empty batch");
  const std::size_t configs = configuration_count(tensor.num_classes(), points.size(), cap);
  const auto members = detail::all_hypotheses(tensor, hyps);
  std::vector<double> mixture(configs, 0.0);
  double conditional = 0.0;
  for (std::size_t h : members) {
    const auto joint = detail::joint_likelihoods(tensor, h, points);
    for (std::size_t j = 0; j < configs; ++j) mixture[j] += joint[j];
    conditional += entropy_bits(joint);
  }
  const double n = static_cast<double>(members.size());
  for (double& m : mixture) m /= n;
  return std::max(0.0, entropy_bits(mixture) - conditional / n);
}

/// BALD for a single point: H(mean predictive) - mean per-hypothesis entropy.
inline double bald_point(std::size_t x, const PredictionTensor& tensor,
                         std::span<const std::size_t> hyps = {}) {
  const auto members = detail::all_hypotheses(tensor, hyps);
  std::vector<double> mean(tensor.num_classes(), 0.0);
  double conditional = 0.0;
  for (std::size_t h : members) {
    const auto row = tensor.row(h, x);
    for (std::size_t c = 0; c < row.size(); ++c) mean[c] += row[c];
    conditional += entropy_bits(row);
  }
  const double n = static_cast<double>(members.size());
  for (double& m : mean) m /= n;
  return std::max(0.0, entropy_bits(mean) - conditional / n);
}

/// Mean over classes of the (population) standard deviation over hypotheses.
inline double mean_std(std::size_t x, const PredictionTensor& tensor,
                       std::span<const std::size_t> hyps = {}) {
  const auto members = detail::all_hypotheses(tensor, hyps);
  const std::size_t classes = tensor.num_classes();
  const double n = static_cast<double>(members.size());
  double total = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    double mean = 0.0;
    for (std::size_t h : members) mean += tensor.prob(h, x, c);
    mean /= n;
    double var = 0.0;
    for (std::size_t h : members) {
      const double d = tensor.prob(h, x, c) - mean;
      var += d * d;
    }
    total += std::sqrt(var / n);
  }
  return total / static_cast<double>(classes);
}

/// 1 - max_c mean_w p(c | x, w).
inline double variation_ratio(std::size_t x, const PredictionTensor& tensor,
                              std::span<const std::size_t> hyps = {}) {
  const auto members = detail::all_hypotheses(tensor, hyps);
  std::vector<double> mean(tensor.num_classes(), 0.0);
  for (std::size_t h : members) {
    const auto row = tensor.row(h, x);
    for (std::size_t c = 0; c < row.size(); ++c) mean[c] += row[c];
  }
  const double peak = *std::max_element(mean.begin(), mean.end()) / static_cast<double>(members.size());
  return std::max(0.0, 1.0 - peak);
}

}  // namespace balance
