#pragma once

// Desk-scale active-learning loops.
//
// The synthetic scenarios model the Bayesian posterior as a weighted
// population of hypotheses (Dirichlet perturbations of a base predictor).
// Ground-truth labels are the hard predictions of one population member, each
// round draws 2K posterior samples to feed the acquisition strategy, and
// observed labels reweight the population by exact Bayes updates.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "balance/algorithms.hpp"
#include "balance/batch_state.hpp"
#include "balance/error.hpp"
#include "balance/oracle.hpp"
#include "balance/random.hpp"
#include "balance/report.hpp"
#include "balance/run_config.hpp"
#include "balance/synthetic.hpp"
#include "balance/tensor.hpp"

namespace balance::sim {

enum class Scenario { stylized_n64, synthetic_dirichlet, imbalanced_synthetic };

inline Scenario parse_scenario(const std::string& name) {
  if (name == "stylized-n64") return Scenario::stylized_n64;
  if (name == "synthetic-dirichlet") return Scenario::synthetic_dirichlet;
  if (name == "imbalanced-synthetic") return Scenario::imbalanced_synthetic;
  throw ConfigError("unknown scenario '" + name + "'");
}

struct WorldShape {
  std::size_t num_classes = 3;
  std::size_t num_pool = 120;
  std::size_t num_ref = 60;
  std::size_t num_test = 120;
  std::size_t population = 200;
};

struct SyntheticWorld {
  WorldShape shape;
  PredictionTensor population;  // H x (pool + ref + test) x C
  std::vector<Label> truth;     // per point
  std::size_t target = 0;

  std::size_t ref_offset() const noexcept { return shape.num_pool; }
  std::size_t test_offset() const noexcept { return shape.num_pool + shape.num_ref; }
};

inline SyntheticWorld make_world(Scenario scenario, double kappa, Rng& rng, WorldShape shape = {}) {
  if (scenario == Scenario::stylized_n64) throw ConfigError("stylized scenario has no synthetic world");
  std::vector<double> alpha(shape.num_classes, 1.0);
  if (scenario == Scenario::imbalanced_synthetic) {
    // class 0 dominates, the last class is rare
    for (std::size_t c = 0; c < shape.num_classes; ++c) alpha[c] = 4.0 / std::pow(4.0, static_cast<double>(c));
  }
  const std::size_t total = shape.num_pool + shape.num_ref + shape.num_test;
  const auto base = random_base_rows(total, alpha, rng);
  SyntheticWorld world{shape, synthesize_ensemble(base, shape.num_classes, kappa, shape.population, rng), {}, 0};
  world.truth.reserve(total);
  for (std::size_t n = 0; n < total; ++n) world.truth.push_back(argmax_label(world.population.row(world.target, n)));
  return world;
}

namespace detail {

inline std::vector<double> normalized_weights(const std::vector<double>& log_weights) {
  const double peak = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> w(log_weights.size());
  double total = 0.0;
  for (std::size_t h = 0; h < w.size(); ++h) total += (w[h] = std::exp(log_weights[h] - peak));
  for (double& v : w) v /= total;
  return w;
}

/// Error rate of the posterior-mean predictor on the held-out points.
inline double posterior_error(const SyntheticWorld& world, const std::vector<double>& weights) {
  const std::size_t classes = world.shape.num_classes;
  std::size_t wrong = 0;
  std::vector<double> mean(classes);
  for (std::size_t n = world.test_offset(); n < world.test_offset() + world.shape.num_test; ++n) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t h = 0; h < weights.size(); ++h) {
      if (weights[h] == 0.0) continue;
      const auto row = world.population.row(h, n);
      for (std::size_t c = 0; c < classes; ++c) mean[c] += weights[h] * row[c];
    }
    wrong += argmax_label(mean) != world.truth[n];
  }
  return static_cast<double>(wrong) / static_cast<double>(world.shape.num_test);
}

/// Predictions of the sampled hypotheses on points [begin, begin + count).
inline PredictionTensor slice(const SyntheticWorld& world, const std::vector<std::size_t>& hyps,
                              std::size_t begin, std::size_t count) {
  const std::size_t classes = world.shape.num_classes;
  std::vector<double> probs;
  probs.reserve(hyps.size() * count * classes);
  for (std::size_t h : hyps) {
    for (std::size_t n = begin; n < begin + count; ++n) {
      const auto row = world.population.row(h, n);
      probs.insert(probs.end(), row.begin(), row.end());
    }
  }
  return {hyps.size(), count, classes, std::move(probs)};
}

}  // namespace detail

/// Active-learning loop on a synthetic world; one curve row per round,
/// starting with the round-0 row before any query. `ms` stays 0 unless
/// `record_timing` is set, keeping default output reproducible.
inline LearningCurve run_synthetic(const SyntheticWorld& world, const RunConfig& config, Rng& rng,
                                   bool record_timing = false) {
  const std::size_t batch = config.selection.batch_size;
  const std::size_t num_pairs = config.selection.num_pairs;
  const std::size_t rounds = config.budget / batch;
  if (rounds * batch > world.shape.num_pool) throw ConfigError("budget exceeds the synthetic pool size");

  std::vector<double> log_weights(world.shape.population, 0.0);
  std::vector<std::uint8_t> labeled(world.shape.num_pool, 0);
  LearningCurve curve;
  double error = detail::posterior_error(world, detail::normalized_weights(log_weights));
  curve.push_back({0, 0, error, anneal_tau(config.tau, error), 0.0});

  for (std::size_t round = 1; round <= rounds; ++round) {
    const auto started = std::chrono::steady_clock::now();
    const double tau = anneal_tau(config.tau, error);
    const auto weights = detail::normalized_weights(log_weights);
    std::vector<std::size_t> sampled(2 * num_pairs);
    for (auto& h : sampled) h = categorical(weights, rng);

    const PredictionTensor pool = detail::slice(world, sampled, 0, world.shape.num_pool);
    const LabelMatrix ref_labels = hard_labels(detail::slice(world, sampled, world.ref_offset(), world.shape.num_ref));
    AcquisitionRequest request;
    request.algorithm = config.algorithm;
    request.pool = &pool;
    request.ref_labels = &ref_labels;
    request.pairs = with_edge_mask(pair_hypotheses(sampled.size(), num_pairs, rng), ref_labels, tau);
    request.tau = tau;
    request.config = config.selection;
    for (std::size_t x = 0; x < world.shape.num_pool; ++x) {
      if (!labeled[x]) request.candidates.push_back(x);
    }
    const Selection picked = acquire(request, rng);

    for (std::size_t x : picked.indices) {
      if (labeled[x]) throw Error("simulation: pool index queried twice");
      labeled[x] = 1;
      const Label y = world.truth[x];
      for (std::size_t h = 0; h < log_weights.size(); ++h) {
        log_weights[h] += std::log(std::max(world.population.prob(h, x, y), kProbabilityFloor));
      }
    }
    error = detail::posterior_error(world, detail::normalized_weights(log_weights));
    const double ms = record_timing
                          ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count()
                          : 0.0;
    curve.push_back({round, round * batch, error, tau, ms});
  }
  return curve;
}

/// Noise-free policy on stylized_space(64). Rows report the posterior-expected
/// distance to the target; tau carries sigma. The default target is the first
/// worst case for the chosen policy.
inline LearningCurve run_stylized(const RunConfig& config, Rng& rng) {
  const auto space = oracle::stylized_space(64);
  const auto policy = oracle::parse_policy(config.policy);
  std::size_t target = 0;
  if (config.target) {
    target = *config.target;
    if (target >= space.num_hypotheses) throw ConfigError("target must be < 64");
  } else {
    target = oracle::worst_case_cost(space, policy, config.sigma, rng).target;
  }
  const auto trace = oracle::run_policy(space, policy, config.sigma, target, rng);
  LearningCurve curve{{0, 0, trace.initial_error_proxy, config.sigma, 0.0}};
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    curve.push_back({i + 1, i + 1, trace.steps[i].error_proxy, config.sigma, 0.0});
  }
  return curve;
}

inline LearningCurve simulate(Scenario scenario, const RunConfig& config, bool record_timing = false) {
  Rng rng(config.selection.seed);
  if (scenario == Scenario::stylized_n64) return run_stylized(config, rng);
  const SyntheticWorld world = make_world(scenario, config.kappa, rng);
  return run_synthetic(world, config, rng, record_timing);
}

}  // namespace balance::sim
