#pragma once

// Ground truth over enumerable hypothesis spaces: exact Bayes updates, EC2,
// ECED, exact BALD, the stylized prefix-hypothesis example, noise-free policy
// simulation, and a literal nested-loop evaluation of the sampled-pair
// Delta estimator used to verify the fast paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "balance/acquisition.hpp"
#include "balance/ensemble.hpp"
#include "balance/error.hpp"
#include "balance/partition.hpp"
#include "balance/random.hpp"
#include "balance/tensor.hpp"

namespace balance::oracle {

struct DiscreteHypothesisSpace {
  std::size_t num_hypotheses = 0;
  std::size_t num_points = 0;
  std::size_t num_classes = 0;
  std::vector<double> prior;       // n
  std::vector<double> likelihood;  // point-major: [x][h][y]
  std::vector<double> distance;    // n x n

  double lik(std::size_t x, std::size_t h, std::size_t y) const noexcept {
    return likelihood[(x * num_hypotheses + h) * num_classes + y];
  }
  std::span<const double> row(std::size_t x, std::size_t h) const noexcept {
    return {likelihood.data() + (x * num_hypotheses + h) * num_classes, num_classes};
  }
  double dist(std::size_t i, std::size_t j) const noexcept { return distance[i * num_hypotheses + j]; }

  bool deterministic() const noexcept {
    return std::all_of(likelihood.begin(), likelihood.end(), [](double p) { return p == 0.0 || p == 1.0; });
  }

  void validate() const {
    const std::size_t n = num_hypotheses;
    if (n == 0 || num_classes < 2) throw FormatError("hypothesis space: need n >= 1 and C >= 2");
    if (prior.size() != n) throw FormatError("hypothesis space: prior length");
    if (likelihood.size() != num_points * n * num_classes) throw FormatError("hypothesis space: likelihood size");
    if (distance.size() != n * n) throw FormatError("hypothesis space: distance matrix size");
    double total = 0.0;
    for (double p : prior) {
      if (!(p >= 0.0)) throw FormatError("hypothesis space: negative prior");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw FormatError("hypothesis space: prior does not sum to 1");
    for (std::size_t x = 0; x < num_points; ++x) {
      for (std::size_t h = 0; h < n; ++h) {
        double s = 0.0;
        for (double p : row(x, h)) {
          if (!(p >= 0.0 && p <= 1.0)) throw FormatError("hypothesis space: likelihood outside [0,1]");
          s += p;
        }
        if (std::abs(s - 1.0) > kRowSumTolerance) throw FormatError("hypothesis space: likelihood row sum");
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (dist(i, i) != 0.0) throw FormatError("hypothesis space: nonzero distance diagonal");
      for (std::size_t j = 0; j < n; ++j) {
        if (dist(i, j) != dist(j, i)) throw FormatError("hypothesis space: asymmetric distances");
        if (!(dist(i, j) >= 0.0 && dist(i, j) <= 1.0)) throw FormatError("hypothesis space: distance outside [0,1]");
      }
    }
  }
};

/// Hypothesis weights w_h (unnormalized) and edge weights W_{h,h'} (n x n,
/// symmetric, diagonal unused).
struct PosteriorState {
  std::vector<double> weights;
  std::vector<double> edge_weights;

  std::vector<double> normalized() const {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw Error("posterior has no mass left");
    std::vector<double> out(weights);
    for (double& w : out) w /= total;
    return out;
  }
};

inline PosteriorState initial_state(const DiscreteHypothesisSpace& space) {
  const std::size_t n = space.num_hypotheses;
  PosteriorState state;
  state.weights = space.prior;
  state.edge_weights.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) state.edge_weights[i * n + j] = space.prior[i] * space.prior[j];
    }
  }
  return state;
}

/// w_h <- w_h p(y | h, x); normalization is left to readers.
inline PosteriorState bayes_update(const DiscreteHypothesisSpace& space, PosteriorState state, std::size_t x,
                                   Label y) {
  bool any = false;
  for (std::size_t h = 0; h < space.num_hypotheses; ++h) {
    state.weights[h] *= space.lik(x, h, y);
    any = any || state.weights[h] > 0.0;
  }
  if (!any) throw Error("bayes_update: observation is inconsistent with every hypothesis");
  return state;
}

/// bayes_update plus W_{h,h'} <- W_{h,h'} p(y|h,x) p(y|h',x).
inline PosteriorState eced_update(const DiscreteHypothesisSpace& space, PosteriorState state, std::size_t x,
                                  Label y) {
  const std::size_t n = space.num_hypotheses;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) state.edge_weights[i * n + j] *= space.lik(x, i, y) * space.lik(x, j, y);
    }
  }
  return bayes_update(space, std::move(state), x, y);
}

namespace detail {

inline std::vector<double> label_marginal(const DiscreteHypothesisSpace& space, std::span<const double> posterior,
                                          std::size_t x) {
  std::vector<double> marginal(space.num_classes, 0.0);
  for (std::size_t h = 0; h < space.num_hypotheses; ++h) {
    for (std::size_t y = 0; y < space.num_classes; ++y) marginal[y] += posterior[h] * space.lik(x, h, y);
  }
  return marginal;
}

}  // namespace detail

/// Expected weight of newly cut cross-class edges. An edge is cut by label y
/// when at least one endpoint assigns y zero likelihood. Noise-free spaces only.
inline double ec2_score(const DiscreteHypothesisSpace& space, const PosteriorState& state, const Partition& partition,
                        std::size_t x) {
  if (!space.deterministic()) throw std::invalid_argument("ec2_score: requires noise-free likelihoods");
  const std::size_t n = space.num_hypotheses;
  const auto marginal = detail::label_marginal(space, state.normalized(), x);
  const auto edges = induced_edges(partition);
  double total = 0.0;
  for (std::size_t y = 0; y < space.num_classes; ++y) {
    if (marginal[y] == 0.0) continue;
    double cut = 0.0;
    for (const auto& [h, hp] : edges) {
      if (space.lik(x, h, y) == 0.0 || space.lik(x, hp, y) == 0.0) cut += state.edge_weights[h * n + hp];
    }
    total += marginal[y] * cut;
  }
  return total;
}

/// E_y[delta(x,y) - nu(x,y)]: edge discounting minus the offset that zeroes out
/// non-informative tests.
inline double eced_score(const DiscreteHypothesisSpace& space, const PosteriorState& state,
                         const Partition& partition, std::size_t x) {
  const std::size_t n = space.num_hypotheses;
  const auto marginal = detail::label_marginal(space, state.normalized(), x);
  const auto edges = induced_edges(partition);
  std::vector<std::vector<double>> ratio(n);
  for (std::size_t h = 0; h < n; ++h) ratio[h] = likelihood_ratio(space.row(x, h));
  double total = 0.0;
  for (std::size_t y = 0; y < space.num_classes; ++y) {
    if (marginal[y] == 0.0) continue;
    double peak = 0.0;
    for (std::size_t h = 0; h < n; ++h) peak = std::max(peak, ratio[h][y]);
    double value = 0.0;
    for (const auto& [h, hp] : edges) {
      value += state.edge_weights[h * n + hp] * ((1.0 - ratio[h][y] * ratio[hp][y]) - (1.0 - peak * peak));
    }
    total += marginal[y] * value;
  }
  return total;
}

/// Mutual information between y and the hypothesis under the normalized posterior, bits.
inline double bald_exact(const DiscreteHypothesisSpace& space, const PosteriorState& state, std::size_t x) {
  const auto posterior = state.normalized();
  const auto marginal = detail::label_marginal(space, posterior, x);
  double conditional = 0.0;
  for (std::size_t h = 0; h < space.num_hypotheses; ++h) {
    if (posterior[h] > 0.0) conditional += posterior[h] * entropy_bits(space.row(x, h));
  }
  return std::max(0.0, entropy_bits(marginal) - conditional);
}

/// h_1..h_n with binary points x_1..x_{n-1}, h_j(x_i) = 1 iff j <= i, uniform
/// prior, and d(h_i, h_j) = 2^(1-i) - 2^(1-j) for i < j (1-based).
inline DiscreteHypothesisSpace stylized_space(std::size_t n) {
  if (n < 2) throw std::invalid_argument("stylized_space: need n >= 2");
  DiscreteHypothesisSpace space;
  space.num_hypotheses = n;
  space.num_points = n - 1;
  space.num_classes = 2;
  space.prior.assign(n, 1.0 / static_cast<double>(n));
  space.likelihood.assign(space.num_points * n * 2, 0.0);
  for (std::size_t x = 0; x < space.num_points; ++x) {
    for (std::size_t h = 0; h < n; ++h) {
      const std::size_t label = h <= x ? 1 : 0;
      space.likelihood[(x * n + h) * 2 + label] = 1.0;
    }
  }
  space.distance.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::ldexp(1.0, -static_cast<int>(i)) - std::ldexp(1.0, -static_cast<int>(j));
      space.distance[i * n + j] = d;
      space.distance[j * n + i] = d;
    }
  }
  return space;
}

enum class Policy { bald, ec_aware, ec2, eced, random };

inline Policy parse_policy(const std::string& name) {
  if (name == "bald") return Policy::bald;
  if (name == "ec-aware") return Policy::ec_aware;
  if (name == "ec2") return Policy::ec2;
  if (name == "eced") return Policy::eced;
  if (name == "random") return Policy::random;
  throw ConfigError("unknown policy '" + name + "'");
}

struct PolicyStep {
  std::size_t point = 0;
  Label label = 0;
  double error_proxy = 0.0;  // posterior-expected distance to the target after the query
};

struct PolicyTrace {
  std::size_t target = 0;
  double sigma = 0.0;
  double initial_error_proxy = 0.0;
  std::vector<PolicyStep> steps;

  std::size_t cost() const noexcept { return steps.size(); }
};

/// Largest pairwise distance among hypotheses with positive weight.
inline double support_diameter(const DiscreteHypothesisSpace& space, const PosteriorState& state) {
  double diameter = 0.0;
  for (std::size_t i = 0; i < space.num_hypotheses; ++i) {
    if (state.weights[i] <= 0.0) continue;
    for (std::size_t j = i + 1; j < space.num_hypotheses; ++j) {
      if (state.weights[j] > 0.0) diameter = std::max(diameter, space.dist(i, j));
    }
  }
  return diameter;
}

inline double expected_distance(const DiscreteHypothesisSpace& space, const PosteriorState& state,
                                std::size_t target) {
  const auto posterior = state.normalized();
  double e = 0.0;
  for (std::size_t h = 0; h < space.num_hypotheses; ++h) e += posterior[h] * space.dist(h, target);
  return e;
}

/// Equivalence classes for the edge-based policies: FFT over the declared
/// distances with radius sigma / 2, so every class has diameter <= sigma.
inline Partition policy_partition(const DiscreteHypothesisSpace& space, double sigma) {
  return fft_cluster(space.num_hypotheses, [&](std::size_t i, std::size_t j) { return space.dist(i, j); },
                     sigma / 2.0);
}

/// Queries until the positive-posterior hypotheses have pairwise distance at
/// most sigma. Labels come from `target`; noisy likelihood rows are sampled.
inline PolicyTrace run_policy(const DiscreteHypothesisSpace& space, Policy policy, double sigma, std::size_t target,
                              Rng& rng) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("run_policy: sigma must lie in (0,1)");
  if (target >= space.num_hypotheses) throw std::invalid_argument("run_policy: target out of range");
  const std::size_t budget = space.num_hypotheses;
  const Partition partition = policy_partition(space, sigma);
  PosteriorState state = initial_state(space);
  std::vector<std::uint8_t> queried(space.num_points, 0);
  PolicyTrace trace;
  trace.target = target;
  trace.sigma = sigma;
  trace.initial_error_proxy = expected_distance(space, state, target);

  while (support_diameter(space, state) > sigma) {
    if (trace.cost() >= budget) throw Error("run_policy: query budget exhausted");
    std::vector<std::size_t> open;
    for (std::size_t x = 0; x < space.num_points; ++x) {
      if (!queried[x]) open.push_back(x);
    }
    if (open.empty()) throw Error("run_policy: no points left to query");

    std::size_t pick = open.front();
    if (policy == Policy::random) {
      pick = open[uniform_index(rng, open.size())];
    } else if (policy != Policy::ec_aware) {
      double best = -INFINITY;
      for (std::size_t x : open) {
        const double score = policy == Policy::bald  ? bald_exact(space, state, x)
                             : policy == Policy::ec2 ? ec2_score(space, state, partition, x)
                                                     : eced_score(space, state, partition, x);
        if (score > best) {
          best = score;
          pick = x;
        }
      }
    }
    const auto target_row = space.row(pick, target);
    const Label y = space.deterministic() ? argmax_label(target_row)
                                          : static_cast<Label>(categorical(target_row, rng));
    queried[pick] = 1;
    state = eced_update(space, std::move(state), pick, y);
    trace.steps.push_back({pick, y, expected_distance(space, state, target)});
  }
  return trace;
}

struct WorstCase {
  std::size_t cost = 0;
  std::size_t target = 0;  // first target attaining the cost
};

inline WorstCase worst_case_cost(const DiscreteHypothesisSpace& space, Policy policy, double sigma, Rng& rng) {
  WorstCase worst;
  for (std::size_t t = 0; t < space.num_hypotheses; ++t) {
    const auto cost = run_policy(space, policy, sigma, t, rng).cost();
    if (cost > worst.cost) worst = {cost, t};
  }
  return worst;
}

/// Literal evaluation of the sampled-pair Delta: for every configuration,
/// loop over pairs for the mixture, loop over pairs again for the discounts,
/// and find each hypothesis's peak by enumerating all configurations. No
/// caching and no shared code with the fast paths.
inline double brute_force_delta(const EnsemblePairs& pairs, const PredictionTensor& tensor,
                                std::span<const std::size_t> points) {
  const std::size_t num_pairs = pairs.pairs.size();
  const std::size_t classes = tensor.num_classes();
  const std::size_t b = points.size();
  if (num_pairs == 0 || num_pairs > 8) throw CapacityError("brute_force_delta: need 1 <= K <= 8");
  if (b == 0) throw std::invalid_argument("brute_force_delta: empty batch");
  std::size_t configs = 1;
  for (std::size_t t = 0; t < b; ++t) {
    configs *= classes;
    if (configs > 10000) throw CapacityError("brute_force_delta: C^b exceeds 10^4");
  }

  const auto likelihood = [&](std::size_t h, std::size_t config) {
    double p = 1.0;
    for (std::size_t t = b; t-- > 0;) {
      p *= tensor.prob(h, points[t], config % classes);
      config /= classes;
    }
    return p;
  };
  const auto peak = [&](std::size_t h) {
    double best = 0.0;
    for (std::size_t j = 0; j < configs; ++j) best = std::max(best, likelihood(h, j));
    return best;
  };

  double total = 0.0;
  for (std::size_t j = 0; j < configs; ++j) {
    double mixture = 0.0;
    for (std::size_t k = 0; k < num_pairs; ++k) {
      mixture += likelihood(pairs.pairs[k].first, j) + likelihood(pairs.pairs[k].second, j);
    }
    mixture /= 2.0 * static_cast<double>(num_pairs);
    double discount = 0.0;
    for (std::size_t k = 0; k < num_pairs; ++k) {
      if (!pairs.edge_active[k]) continue;
      const std::size_t h = pairs.pairs[k].first;
      const std::size_t hp = pairs.pairs[k].second;
      discount += 1.0 - (likelihood(h, j) / peak(h)) * (likelihood(hp, j) / peak(hp));
    }
    discount /= static_cast<double>(num_pairs);
    total += mixture * discount;
  }
  return total;
}

/// Same, with the edge mask recomputed from reference labels and tau.
inline double brute_force_delta(EnsemblePairs pairs, const LabelMatrix& ref_labels, double tau,
                                const PredictionTensor& tensor, std::span<const std::size_t> points) {
  for (std::size_t k = 0; k < pairs.pairs.size(); ++k) {
    const auto a = ref_labels.row(pairs.pairs[k].first);
    const auto b = ref_labels.row(pairs.pairs[k].second);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < a.size(); ++i) differ += a[i] != b[i];
    pairs.edge_active[k] = static_cast<double>(differ) / static_cast<double>(a.size()) > tau;
  }
  return brute_force_delta(pairs, tensor, points);
}

inline nlohmann::json space_to_json(const DiscreteHypothesisSpace& space) {
  nlohmann::json lik = nlohmann::json::array();
  for (std::size_t x = 0; x < space.num_points; ++x) {
    nlohmann::json per_point = nlohmann::json::array();
    for (std::size_t h = 0; h < space.num_hypotheses; ++h) {
      const auto r = space.row(x, h);
      per_point.push_back(std::vector<double>(r.begin(), r.end()));
    }
    lik.push_back(std::move(per_point));
  }
  nlohmann::json dist = nlohmann::json::array();
  for (std::size_t i = 0; i < space.num_hypotheses; ++i) {
    dist.push_back(std::vector<double>(space.distance.begin() + static_cast<std::ptrdiff_t>(i * space.num_hypotheses),
                                       space.distance.begin() + static_cast<std::ptrdiff_t>((i + 1) * space.num_hypotheses)));
  }
  return {{"prior", space.prior}, {"likelihoods", lik}, {"distances", dist}};
}

inline DiscreteHypothesisSpace space_from_json(const nlohmann::json& j) {
  DiscreteHypothesisSpace space;
  try {
    space.prior = j.at("prior").get<std::vector<double>>();
    space.num_hypotheses = space.prior.size();
    const auto lik = j.at("likelihoods").get<std::vector<std::vector<std::vector<double>>>>();
    space.num_points = lik.size();
    space.num_classes = (lik.empty() || lik[0].empty()) ? 2 : lik[0][0].size();
    for (const auto& per_point : lik) {
      if (per_point.size() != space.num_hypotheses) throw FormatError("space JSON: likelihood table shape");
      for (const auto& r : per_point) {
        if (r.size() != space.num_classes) throw FormatError("space JSON: likelihood row width");
        space.likelihood.insert(space.likelihood.end(), r.begin(), r.end());
      }
    }
    for (const auto& r : j.at("distances").get<std::vector<std::vector<double>>>()) {
      if (r.size() != space.num_hypotheses) throw FormatError("space JSON: distance row width");
      space.distance.insert(space.distance.end(), r.begin(), r.end());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("space JSON: ") + e.what());
  }
  space.validate();
  return space;
}

}  // namespace balance::oracle
