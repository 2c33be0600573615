#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "balance/random.hpp"
#include "balance/tensor.hpp"

namespace balance {

/// Dirichlet draw with concentration vector `alpha` (all entries > 0).
inline std::vector<double> dirichlet(std::span<const double> alpha, Rng& rng) {
  std::vector<double> out(alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    out[i] = gamma_variate(alpha[i], rng);
    total += out[i];
  }
  if (!(total > 0.0)) {
    // every gamma underflowed; fall back to the normalized concentration
    total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) total += (out[i] = alpha[i]);
  }
  for (double& v : out) v /= total;
  return out;
}

/// Concentration floor so zero base probabilities still give a valid Dirichlet.
inline constexpr double kMinConcentration = 1e-3;

/// S hypotheses whose rows are Dirichlet(kappa * base_row) perturbations of
/// an N x C base predictor. Larger kappa means less dispersion.
inline PredictionTensor synthesize_ensemble(std::span<const double> base_rows, std::size_t num_classes,
                                            double kappa, std::size_t num_hypotheses, Rng& rng) {
  if (!(kappa > 0.0)) throw std::invalid_argument("synthesize_ensemble: kappa must be > 0");
  if (num_classes < 2 || base_rows.size() % num_classes != 0 || base_rows.empty()) {
    throw std::invalid_argument("synthesize_ensemble: base rows must be N x C with C >= 2");
  }
  const std::size_t num_points = base_rows.size() / num_classes;
  std::vector<double> probs;
  probs.reserve(num_hypotheses * base_rows.size());
  std::vector<double> alpha(num_classes);
  for (std::size_t s = 0; s < num_hypotheses; ++s) {
    for (std::size_t n = 0; n < num_points; ++n) {
      for (std::size_t c = 0; c < num_classes; ++c) {
        alpha[c] = std::max(kappa * base_rows[n * num_classes + c], kMinConcentration);
      }
      const auto row = dirichlet(alpha, rng);
      probs.insert(probs.end(), row.begin(), row.end());
    }
  }
  return {num_hypotheses, num_points, num_classes, std::move(probs)};
}

/// N base rows, each a Dirichlet(alpha) draw.
inline std::vector<double> random_base_rows(std::size_t num_points, std::span<const double> alpha, Rng& rng) {
  std::vector<double> rows;
  rows.reserve(num_points * alpha.size());
  for (std::size_t n = 0; n < num_points; ++n) {
    const auto row = dirichlet(alpha, rng);
    rows.insert(rows.end(), row.begin(), row.end());
  }
  return rows;
}

}  // namespace balance
