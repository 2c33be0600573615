#pragma once

// Explicit equivalence classes over hypothesis samples: farthest-first
// traversal under d_H, the induced cross-class edge set, and the
// partition-based acquisition score.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "balance/acquisition.hpp"
#include "balance/tensor.hpp"

namespace balance {

struct Partition {
  std::vector<std::size_t> centers;     // member ordinals, in selection order
  std::vector<std::size_t> assignment;  // member ordinal -> center ordinal
  double radius = 0.0;

  std::size_t size() const noexcept { return assignment.size(); }
  std::size_t num_classes() const noexcept { return centers.size(); }
};

/// Unordered member pairs (first < second) whose classes differ.
using EdgeSet = std::vector<std::pair<std::size_t, std::size_t>>;

/// Farthest-first traversal over n items with metric `dist(i, j)`: starting
/// from `start`, keep adding the item farthest from the current centers while
/// that distance exceeds tau, then assign each item to its nearest center
/// (earliest center on ties).
template <typename Distance>
Partition fft_cluster(std::size_t n, Distance&& dist, double tau, std::size_t start = 0) {
  if (n == 0) throw std::invalid_argument("fft_cluster: no hypotheses");
  if (start >= n) throw std::invalid_argument("fft_cluster: start index out of range");
  Partition out;
  out.centers.push_back(start);
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = dist(i, start);
  for (;;) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (nearest[i] > nearest[far]) far = i;
    }
    if (nearest[far] <= tau) break;
    out.centers.push_back(far);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], dist(i, far));
  }
  out.assignment.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = dist(i, out.centers[0]);
    for (std::size_t c = 1; c < out.centers.size(); ++c) {
      const double d = dist(i, out.centers[c]);
      if (d < best) {
        best = d;
        out.assignment[i] = c;
      }
    }
    out.radius = std::max(out.radius, best);
  }
  return out;
}

/// FFT over hard-label rows under the normalized Hamming distance.
inline Partition fft_cluster(std::span<const std::span<const Label>> rows, double tau, std::size_t start = 0) {
  return fft_cluster(
      rows.size(), [&](std::size_t i, std::size_t j) { return hamming_distance(rows[i], rows[j]); }, tau,
      start);
}

/// FFT over the rows of a label matrix restricted to `members`.
inline Partition fft_cluster(const LabelMatrix& labels, std::span<const std::size_t> members, double tau,
                             std::size_t start = 0) {
  std::vector<std::span<const Label>> rows;
  rows.reserve(members.size());
  for (std::size_t h : members) rows.push_back(labels.row(h));
  return fft_cluster(std::span<const std::span<const Label>>(rows), tau, start);
}

inline EdgeSet induced_edges(const Partition& partition) {
  EdgeSet edges;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    for (std::size_t j = i + 1; j < partition.size(); ++j) {
      if (partition.assignment[i] != partition.assignment[j]) edges.emplace_back(i, j);
    }
  }
  return edges;
}

/// E_y[ sum_{(h,h') in E} w_h w_h' (1 - lam_{h,y} lam_{h',y}) ] with y drawn
/// from the uniform mixture of the members' predictions. `members` maps member
/// ordinals to tensor hypotheses; empty weights mean uniform 1/n.
inline double partition_delta(std::size_t x, const EdgeSet& edges, std::span<const std::size_t> members,
                              const PredictionTensor& tensor, std::span<const double> weights = {}) {
  const std::size_t n = members.size();
  if (n == 0) throw std::invalid_argument("partition_delta: no members");
  if (!weights.empty() && weights.size() != n) throw std::invalid_argument("partition_delta: weight count");
  const std::size_t classes = tensor.num_classes();
  std::vector<double> mixture(classes, 0.0);
  std::vector<std::vector<double>> ratios(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = tensor.row(members[i], x);
    for (std::size_t c = 0; c < classes; ++c) mixture[c] += row[c] / static_cast<double>(n);
    ratios[i] = likelihood_ratio(row);
  }
  const auto weight = [&](std::size_t i) { return weights.empty() ? 1.0 / static_cast<double>(n) : weights[i]; };
  double total = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (mixture[c] == 0.0) continue;
    double discounted = 0.0;
    for (const auto& [h, hp] : edges) discounted += weight(h) * weight(hp) * (1.0 - ratios[h][c] * ratios[hp][c]);
    total += mixture[c] * discounted;
  }
  return std::max(0.0, total);
}

}  // namespace balance
