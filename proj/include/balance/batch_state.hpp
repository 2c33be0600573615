#pragma once

// Incremental caches for greedy batch construction.
//
// For the K pairs the state holds P and P' (K x m), the likelihood of each of
// m label configurations of the already-selected points under w_k and w'_k,
// the running peaks A and A' (K), and the mixture mass of each configuration.
// In exact mode the m = C^(b-1) configurations are enumerated (first selected
// point is the most significant digit); in sampled mode they are M rows drawn
// from the running mixture and stored explicitly.
//
// Scoring a candidate x never materializes the extension: for configuration j
// and label c of x,
//
//   mix(j, c)  = 1/(2K) sum_k P[k,j] p_k(c) + P'[k,j] p'_k(c)
//   disc(j, c) = 1/K sum_k 1_k (1 - P[k,j] p_k(c) / (A_k a_k) * P'[k,j] p'_k(c) / (A'_k a'_k))
//
// and the score is sum_j weight_j sum_c mix(j, c) disc(j, c) with weight 1 in
// exact mode and 1 / (M * mass_j) in sampled mode (self-normalized importance
// weights with the running mixture as proposal).

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "balance/acquisition.hpp"
#include "balance/ensemble.hpp"
#include "balance/random.hpp"
#include "balance/tensor.hpp"

namespace balance {

/// Floor applied to proposal masses before dividing by them.
inline constexpr double kProbabilityFloor = 1e-12;

enum class StateMode { exact, sampled };

struct BatchState {
  StateMode mode = StateMode::exact;
  std::size_t num_pairs = 0;
  std::size_t num_classes = 0;
  std::size_t num_configs = 1;
  std::vector<std::size_t> selected;
  std::vector<double> P;   // K x m, row-major
  std::vector<double> Pp;  // K x m
  std::vector<double> A;   // K
  std::vector<double> Ap;  // K
  std::vector<double> proposal_mass;  // m
  std::vector<Label> configs;  // sampled mode only: m x selected.size()

  double p(std::size_t k, std::size_t j) const noexcept { return P[k * num_configs + j]; }
  double pp(std::size_t k, std::size_t j) const noexcept { return Pp[k * num_configs + j]; }

  std::span<const Label> config(std::size_t j) const noexcept {
    return {configs.data() + j * selected.size(), selected.size()};
  }
};

namespace detail {

inline void refresh_proposal(BatchState& state) {
  state.proposal_mass.assign(state.num_configs, 0.0);
  const double scale = 1.0 / (2.0 * static_cast<double>(state.num_pairs));
  for (std::size_t k = 0; k < state.num_pairs; ++k) {
    for (std::size_t j = 0; j < state.num_configs; ++j) {
      state.proposal_mass[j] += state.p(k, j) + state.pp(k, j);
    }
  }
  for (double& m : state.proposal_mass) m *= scale;
}

inline double row_peak(std::span<const double> row) { return *std::max_element(row.begin(), row.end()); }

}  // namespace detail

/// Exact-mode state with no selected points: one empty configuration.
inline BatchState empty_state(const EnsemblePairs& pairs, std::size_t num_classes) {
  if (pairs.size() == 0) throw std::invalid_argument("empty_state: no hypothesis pairs");
  BatchState state;
  state.num_pairs = pairs.size();
  state.num_classes = num_classes;
  state.num_configs = 1;
  state.P.assign(pairs.size(), 1.0);
  state.Pp.assign(pairs.size(), 1.0);
  state.A.assign(pairs.size(), 1.0);
  state.Ap.assign(pairs.size(), 1.0);
  state.proposal_mass.assign(1, 1.0);
  return state;
}

/// Sampled-mode state holding M empty configuration rows.
inline BatchState sampled_root(const EnsemblePairs& pairs, std::size_t num_classes,
                               std::size_t num_samples) {
  if (num_samples == 0) throw std::invalid_argument("sampled_root: M must be >= 1");
  BatchState state = empty_state(pairs, num_classes);
  state.mode = StateMode::sampled;
  state.num_configs = num_samples;
  state.P.assign(pairs.size() * num_samples, 1.0);
  state.Pp.assign(pairs.size() * num_samples, 1.0);
  state.proposal_mass.assign(num_samples, 1.0);
  return state;
}

/// Exact-mode extension: P <- P (x) P_b flattened, A <- A * max_y P_b.
inline BatchState extend_state(const BatchState& state, std::size_t x, const EnsemblePairs& pairs,
                               const PredictionTensor& tensor, std::size_t cap = kEnumerationCap) {
  if (state.mode != StateMode::exact) {
    throw std::logic_error("extend_state: sampled states are extended with sample_configs");
  }
  const std::size_t classes = tensor.num_classes();
  if (state.num_configs > cap / classes) {
    throw CapacityError("extend_state: exact configuration count would exceed the enumeration cap");
  }
  BatchState next;
  next.mode = StateMode::exact;
  next.num_pairs = state.num_pairs;
  next.num_classes = classes;
  next.num_configs = state.num_configs * classes;
  next.selected = state.selected;
  next.selected.push_back(x);
  next.P.resize(next.num_pairs * next.num_configs);
  next.Pp.resize(next.num_pairs * next.num_configs);
  next.A.resize(next.num_pairs);
  next.Ap.resize(next.num_pairs);
  for (std::size_t k = 0; k < state.num_pairs; ++k) {
    const auto row = tensor.row(pairs.pairs[k].first, x);
    const auto row_p = tensor.row(pairs.pairs[k].second, x);
    for (std::size_t j = 0; j < state.num_configs; ++j) {
      for (std::size_t c = 0; c < classes; ++c) {
        next.P[k * next.num_configs + j * classes + c] = state.p(k, j) * row[c];
        next.Pp[k * next.num_configs + j * classes + c] = state.pp(k, j) * row_p[c];
      }
    }
    next.A[k] = state.A[k] * detail::row_peak(row);
    next.Ap[k] = state.Ap[k] * detail::row_peak(row_p);
  }
  detail::refresh_proposal(next);
  return next;
}

/// Sampled-mode extension: every configuration row gets one label for x drawn
/// from the mixture conditional p(y_b | y_1..y_{b-1}).
inline BatchState sample_configs(const BatchState& state, std::size_t x, const EnsemblePairs& pairs,
                                 const PredictionTensor& tensor, Rng& rng) {
  if (state.mode != StateMode::sampled) {
    throw std::logic_error("sample_configs: state is not in sampled mode");
  }
  const std::size_t classes = tensor.num_classes();
  const std::size_t m = state.num_configs;
  const std::size_t width = state.selected.size();
  BatchState next = state;
  next.selected.push_back(x);
  next.configs.resize(m * (width + 1));
  std::vector<double> conditional(classes);
  for (std::size_t j = 0; j < m; ++j) {
    std::fill(conditional.begin(), conditional.end(), 0.0);
    for (std::size_t k = 0; k < state.num_pairs; ++k) {
      const auto row = tensor.row(pairs.pairs[k].first, x);
      const auto row_p = tensor.row(pairs.pairs[k].second, x);
      for (std::size_t c = 0; c < classes; ++c) {
        conditional[c] += state.p(k, j) * row[c] + state.pp(k, j) * row_p[c];
      }
    }
    const Label y = static_cast<Label>(categorical(conditional, rng));
    std::copy_n(state.configs.begin() + static_cast<std::ptrdiff_t>(j * width), width,
                next.configs.begin() + static_cast<std::ptrdiff_t>(j * (width + 1)));
    next.configs[j * (width + 1) + width] = y;
    for (std::size_t k = 0; k < state.num_pairs; ++k) {
      next.P[k * m + j] = state.p(k, j) * tensor.prob(pairs.pairs[k].first, x, y);
      next.Pp[k * m + j] = state.pp(k, j) * tensor.prob(pairs.pairs[k].second, x, y);
    }
  }
  for (std::size_t k = 0; k < state.num_pairs; ++k) {
    next.A[k] = state.A[k] * detail::row_peak(tensor.row(pairs.pairs[k].first, x));
    next.Ap[k] = state.Ap[k] * detail::row_peak(tensor.row(pairs.pairs[k].second, x));
  }
  detail::refresh_proposal(next);
  return next;
}

/// Draws M configurations from an exact state's mixture distribution and
/// returns the equivalent sampled-mode state.
inline BatchState to_sampled(const BatchState& state, std::size_t num_samples, Rng& rng) {
  if (state.mode != StateMode::exact) throw std::logic_error("to_sampled: state already sampled");
  if (num_samples == 0) throw std::invalid_argument("to_sampled: M must be >= 1");
  const std::size_t classes = state.num_classes;
  const std::size_t width = state.selected.size();
  BatchState next;
  next.mode = StateMode::sampled;
  next.num_pairs = state.num_pairs;
  next.num_classes = classes;
  next.num_configs = num_samples;
  next.selected = state.selected;
  next.A = state.A;
  next.Ap = state.Ap;
  next.P.resize(state.num_pairs * num_samples);
  next.Pp.resize(state.num_pairs * num_samples);
  next.configs.resize(num_samples * width);
  for (std::size_t i = 0; i < num_samples; ++i) {
    std::size_t flat = categorical(state.proposal_mass, rng);
    for (std::size_t k = 0; k < state.num_pairs; ++k) {
      next.P[k * num_samples + i] = state.p(k, flat);
      next.Pp[k * num_samples + i] = state.pp(k, flat);
    }
    for (std::size_t t = width; t-- > 0;) {
      next.configs[i * width + t] = static_cast<Label>(flat % classes);
      flat /= classes;
    }
  }
  detail::refresh_proposal(next);
  return next;
}

/// Delta of selected + {x} from the state (exact or importance-sampled).
inline double state_delta(const BatchState& state, std::size_t x, const EnsemblePairs& pairs,
                          const PredictionTensor& tensor) {
  const std::size_t classes = tensor.num_classes();
  const std::size_t num_pairs = state.num_pairs;
  const std::size_t m = state.num_configs;
  if (pairs.active_count() == 0) return 0.0;

  std::vector<double> row(num_pairs * classes), row_p(num_pairs * classes);
  std::vector<double> inv_peak(num_pairs), inv_peak_p(num_pairs);
  for (std::size_t k = 0; k < num_pairs; ++k) {
    const auto r = tensor.row(pairs.pairs[k].first, x);
    const auto rp = tensor.row(pairs.pairs[k].second, x);
    std::copy(r.begin(), r.end(), row.begin() + static_cast<std::ptrdiff_t>(k * classes));
    std::copy(rp.begin(), rp.end(), row_p.begin() + static_cast<std::ptrdiff_t>(k * classes));
    inv_peak[k] = 1.0 / (state.A[k] * detail::row_peak(r));
    inv_peak_p[k] = 1.0 / (state.Ap[k] * detail::row_peak(rp));
  }

  const double kk = static_cast<double>(num_pairs);
  const double mix_scale = 1.0 / (2.0 * kk);
  std::vector<double> mix(classes), disc(classes);
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    std::fill(mix.begin(), mix.end(), 0.0);
    std::fill(disc.begin(), disc.end(), 0.0);
    for (std::size_t k = 0; k < num_pairs; ++k) {
      const double pj = state.p(k, j);
      const double ppj = state.pp(k, j);
      const bool active = pairs.edge_active[k] != 0;
      for (std::size_t c = 0; c < classes; ++c) {
        const double joint = pj * row[k * classes + c];
        const double joint_p = ppj * row_p[k * classes + c];
        mix[c] += joint + joint_p;
        if (active) disc[c] += 1.0 - (joint * inv_peak[k]) * (joint_p * inv_peak_p[k]);
      }
    }
    double inner = 0.0;
    for (std::size_t c = 0; c < classes; ++c) inner += (mix[c] * mix_scale) * (disc[c] / kk);
    if (state.mode == StateMode::sampled) {
      inner /= static_cast<double>(m) * std::max(state.proposal_mass[j], kProbabilityFloor);
    }
    total += inner;
  }
  return std::max(0.0, total);
}

/// Importance-sampled Delta for a sampled-mode state.
inline double importance_delta(const BatchState& state, std::size_t x, const EnsemblePairs& pairs,
                               const PredictionTensor& tensor) {
  if (state.mode != StateMode::sampled) throw std::logic_error("importance_delta: state is exact");
  return state_delta(state, x, pairs, tensor);
}

}  // namespace balance
