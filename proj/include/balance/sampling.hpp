#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "balance/random.hpp"

namespace balance {

namespace detail {

struct Keyed {
  double key;
  std::size_t index;
};

/// Sorts by key descending, index ascending on ties, and keeps the first `count`.
inline std::vector<std::size_t> top_keys(std::vector<Keyed> keyed, std::size_t count) {
  count = std::min(count, keyed.size());
  std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(count), keyed.end(),
                    [](const Keyed& a, const Keyed& b) {
                      return a.key > b.key || (a.key == b.key && a.index < b.index);
                    });
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = keyed[i].index;
  return out;
}

}  // namespace detail

/// Positions of the B largest scores; ties go to the lower position.
inline std::vector<std::size_t> top_b(std::span<const double> scores, std::size_t batch) {
  std::vector<detail::Keyed> keyed(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) keyed[i] = {scores[i], i};
  return detail::top_keys(std::move(keyed), batch);
}

/// B distinct positions drawn without replacement with p(i) proportional to
/// score_i^beta: the top-B of beta * log(score) + Gumbel noise. Positions with
/// zero score never enter the weighted phase; if fewer than B scores are
/// positive the remainder is filled uniformly from the zero-score positions.
inline std::vector<std::size_t> power_sample(std::span<const double> scores, double beta,
                                             std::size_t batch, Rng& rng) {
  if (batch > scores.size()) throw std::invalid_argument("power_sample: B exceeds pool size");
  if (beta < 0.0) throw std::invalid_argument("power_sample: beta must be >= 0");
  std::vector<detail::Keyed> weighted;
  std::vector<detail::Keyed> rest;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] < 0.0 || std::isnan(scores[i])) {
      throw std::invalid_argument("power_sample: scores must be non-negative");
    }
    if (scores[i] > 0.0) {
      weighted.push_back({beta * std::log(scores[i]) + gumbel(rng), i});
    } else {
      rest.push_back({0.0, i});
    }
  }
  auto chosen = detail::top_keys(std::move(weighted), batch);
  if (chosen.size() < batch) {
    for (auto& r : rest) r.key = gumbel(rng);
    const auto fill = detail::top_keys(std::move(rest), batch - chosen.size());
    chosen.insert(chosen.end(), fill.begin(), fill.end());
  }
  return chosen;
}

/// Uniform random B-subset of [0, n) positions.
inline std::vector<std::size_t> uniform_subset(std::size_t n, std::size_t batch, Rng& rng) {
  return sample_without_replacement(n, batch, rng);
}

}  // namespace balance
