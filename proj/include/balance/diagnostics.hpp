#pragma once

// Coefficient of variation of point scores across independent re-pairings of
// the posterior samples.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "balance/acquisition.hpp"
#include "balance/ensemble.hpp"
#include "balance/error.hpp"
#include "balance/parallel.hpp"
#include "balance/random.hpp"
#include "balance/report.hpp"
#include "balance/tensor.hpp"

namespace balance {

struct ScoreSpread {
  double mean = 0.0;
  double std = 0.0;
  double cv = 0.0;  // std / mean, 0 when mean == 0
};

struct PointVariation {
  std::size_t point = 0;
  ScoreSpread delta;
  ScoreSpread bald;
};

inline ScoreSpread spread(const std::vector<double>& values) {
  ScoreSpread s;
  const double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.cv = s.mean == 0.0 ? 0.0 : s.std / s.mean;
  return s;
}

/// R independent pairings of the S samples; each scores every pool point with
/// Delta and with BALD over the paired samples.
inline std::vector<PointVariation> coefficient_of_variation(const PredictionTensor& pool, const LabelMatrix& ref_labels,
                                                            std::size_t num_pairs, double tau, std::size_t repeats,
                                                            Rng& rng) {
  if (repeats < 2) throw ConfigError("coefficient of variation needs R >= 2 repeats");
  if (ref_labels.rows() != pool.num_hypotheses()) {
    throw FormatError("reference tensor has a different hypothesis count than the pool tensor");
  }
  const std::size_t n = pool.num_points();
  std::vector<std::vector<double>> delta(n, std::vector<double>(repeats));
  std::vector<std::vector<double>> bald(n, std::vector<double>(repeats));
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto pairs = with_edge_mask(pair_hypotheses(pool.num_hypotheses(), num_pairs, rng), ref_labels, tau);
    const auto hyps = pairs.hypotheses();
    parallel_for(n, [&](std::size_t x) {
      delta[x][r] = balance_point(x, pairs, pool);
      bald[x][r] = bald_point(x, pool, hyps);
    });
  }
  std::vector<PointVariation> out(n);
  for (std::size_t x = 0; x < n; ++x) out[x] = {x, spread(delta[x]), spread(bald[x])};
  return out;
}

inline std::string variation_to_csv(const std::vector<PointVariation>& rows) {
  std::string out = "point,delta_mean,delta_std,delta_cv,bald_mean,bald_std,bald_cv\n";
  for (const auto& r : rows) {
    out += std::to_string(r.point) + "," + format_double(r.delta.mean) + "," + format_double(r.delta.std) + "," +
           format_double(r.delta.cv) + "," + format_double(r.bald.mean) + "," + format_double(r.bald.std) + "," +
           format_double(r.bald.cv) + "\n";
  }
  return out;
}

}  // namespace balance
