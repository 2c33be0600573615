#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "balance/oracle.hpp"
#include "support/oracles.hpp"

using namespace balance;
using namespace balance::oracle;

namespace {

/// Deterministic binary space from per-hypothesis label bit patterns over
/// `points` points, uniform prior, Hamming distances on the labels.
DiscreteHypothesisSpace label_space(const std::vector<unsigned>& patterns, std::size_t points) {
  DiscreteHypothesisSpace s;
  const std::size_t n = patterns.size();
  s.num_hypotheses = n;
  s.num_points = points;
  s.num_classes = 2;
  s.prior.assign(n, 1.0 / static_cast<double>(n));
  s.likelihood.assign(points * n * 2, 0.0);
  for (std::size_t x = 0; x < points; ++x) {
    for (std::size_t h = 0; h < n; ++h) s.likelihood[(x * n + h) * 2 + ((patterns[h] >> x) & 1u)] = 1.0;
  }
  s.distance.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      s.distance[i * n + j] = static_cast<double>(__builtin_popcount(patterns[i] ^ patterns[j])) / points;
    }
  }
  return s;
}

Partition classes_of(std::vector<std::size_t> assignment, std::vector<std::size_t> centers) {
  return {std::move(centers), std::move(assignment), 0.0};
}

}  // namespace

TEST(BayesUpdate, Examples) {
  auto s = label_space({0b1, 0b0}, 1);
  auto st = bayes_update(s, initial_state(s), 0, 1);
  EXPECT_EQ(st.normalized(), (std::vector<double>{1.0, 0.0}));
  EXPECT_THROW(bayes_update(s, st, 0, 0), Error);

  DiscreteHypothesisSpace noisy = s;
  noisy.likelihood = {0.1, 0.9, 0.9, 0.1};
  const auto post = bayes_update(noisy, initial_state(noisy), 0, 1).normalized();
  EXPECT_NEAR(post[0], 0.9, 1e-15);
  EXPECT_NEAR(post[1], 0.1, 1e-15);

  noisy.likelihood = {0.3, 0.7, 0.3, 0.7};
  EXPECT_EQ(bayes_update(noisy, initial_state(noisy), 0, 1).normalized(), (std::vector<double>{0.5, 0.5}));
}

TEST(BayesUpdate, OrderInvariantFinalPosterior) {
  std::mt19937_64 gen(71);
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = support::random_tensor(5, 4, 3, gen, 0.0);
    DiscreteHypothesisSpace s;
    s.num_hypotheses = 5;
    s.num_points = 4;
    s.num_classes = 3;
    s.prior.assign(5, 0.2);
    s.distance.assign(25, 0.0);
    for (std::size_t x = 0; x < 4; ++x) {
      for (std::size_t h = 0; h < 5; ++h) {
        const auto r = t.row(h, x);
        s.likelihood.insert(s.likelihood.end(), r.begin(), r.end());
      }
    }
    std::vector<std::pair<std::size_t, Label>> obs{{0, 1}, {2, 0}, {3, 2}, {1, 1}};
    auto forward = initial_state(s);
    for (auto [x, y] : obs) forward = bayes_update(s, forward, x, y);
    std::reverse(obs.begin(), obs.end());
    auto backward = initial_state(s);
    for (auto [x, y] : obs) backward = bayes_update(s, backward, x, y);
    // exact enumeration: prior times product of likelihoods, normalized
    std::vector<double> exact(5);
    for (std::size_t h = 0; h < 5; ++h) {
      exact[h] = 0.2;
      for (auto [x, y] : obs) exact[h] *= s.lik(x, h, y);
    }
    const double z = std::accumulate(exact.begin(), exact.end(), 0.0);
    const auto f = forward.normalized(), b = backward.normalized();
    for (std::size_t h = 0; h < 5; ++h) {
      EXPECT_NEAR(f[h], exact[h] / z, 1e-12);
      EXPECT_NEAR(b[h], exact[h] / z, 1e-12);
    }
  }
}

TEST(EcedUpdate, EdgeWeightFactors) {
  auto s = label_space({0b1, 0b1, 0b0}, 1);
  auto st = eced_update(s, initial_state(s), 0, 1);
  EXPECT_NEAR(st.edge_weights[0 * 3 + 1], 1.0 / 9, 1e-15);
  EXPECT_EQ(st.edge_weights[0 * 3 + 2], 0.0);

  DiscreteHypothesisSpace noisy = label_space({0, 0}, 1);
  noisy.likelihood = {0.1, 0.9, 0.2, 0.8};
  const auto updated = eced_update(noisy, initial_state(noisy), 0, 1);
  EXPECT_NEAR(updated.edge_weights[1], 0.25 * 0.72, 1e-15);
}

TEST(Ec2, Examples) {
  // x labels (0,0,1); classes {h1,h2},{h3}
  const auto s = label_space({0b0, 0b0, 0b1}, 1);
  const auto st = initial_state(s);
  EXPECT_NEAR(ec2_score(s, st, classes_of({0, 0, 1}, {0, 2}), 0), 2.0 / 9, 1e-15);
  const auto same = label_space({0b1, 0b1, 0b1}, 1);
  EXPECT_EQ(ec2_score(same, initial_state(same), classes_of({0, 0, 1}, {0, 2}), 0), 0.0);
  EXPECT_EQ(ec2_score(s, st, classes_of({0, 0, 0}, {0}), 0), 0.0);
  DiscreteHypothesisSpace noisy = s;
  noisy.likelihood = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  EXPECT_THROW(ec2_score(noisy, initial_state(noisy), classes_of({0, 0, 1}, {0, 2}), 0), std::invalid_argument);
}

TEST(Eced, Examples) {
  const auto s = label_space({0b0, 0b0, 0b1}, 1);
  const auto part = classes_of({0, 0, 1}, {0, 2});
  EXPECT_NEAR(eced_score(s, initial_state(s), part, 0), 2.0 / 9, 1e-15);
  EXPECT_EQ(eced_score(s, initial_state(s), classes_of({0, 0, 0}, {0}), 0), 0.0);
  DiscreteHypothesisSpace flat = s;
  flat.likelihood = {0.3, 0.7, 0.3, 0.7, 0.3, 0.7};
  EXPECT_EQ(eced_score(flat, initial_state(flat), part, 0), 0.0);
}

TEST(Eced, EqualsEc2OnSmallDeterministicSpaces) {
  std::mt19937_64 gen(72);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + gen() % 6;
    std::vector<unsigned> patterns(n);
    for (auto& p : patterns) p = gen() % 8;
    const auto s = label_space(patterns, 3);
    const auto part = fft_cluster(n, [&](std::size_t i, std::size_t j) { return s.dist(i, j); }, (gen() % 3) / 3.0);
    auto st = initial_state(s);
    for (std::size_t x = 0; x < 3; ++x) {
      EXPECT_NEAR(ec2_score(s, st, part, x), eced_score(s, st, part, x), 1e-12);
    }
    st = eced_update(s, st, 0, static_cast<Label>(patterns[0] & 1u));
    for (std::size_t x = 1; x < 3; ++x) {
      EXPECT_NEAR(ec2_score(s, st, part, x), eced_score(s, st, part, x), 1e-12);
    }
  }
}

TEST(BaldExact, MirrorsPointExamples) {
  const auto s = label_space({0b1, 0b0}, 1);
  EXPECT_NEAR(bald_exact(s, initial_state(s), 0), 1.0, 1e-15);
  const auto same = label_space({0b1, 0b1}, 1);
  EXPECT_EQ(bald_exact(same, initial_state(same), 0), 0.0);
  DiscreteHypothesisSpace flat = s;
  flat.likelihood = {0.5, 0.5, 0.5, 0.5};
  EXPECT_EQ(bald_exact(flat, initial_state(flat), 0), 0.0);
}

TEST(StylizedSpace, Distances) {
  const auto s = stylized_space(16);
  EXPECT_EQ(s.num_points, 15u);
  EXPECT_EQ(s.dist(0, 1), 0.5);
  EXPECT_EQ(s.dist(0, 15), 1.0 - std::ldexp(1.0, -15));
  EXPECT_TRUE(s.deterministic());
  EXPECT_NO_THROW(s.validate());
  for (std::size_t x = 0; x < s.num_points; ++x) {
    for (std::size_t h = x + 1; h < 16; ++h) EXPECT_EQ(s.lik(x, h, 0), 1.0);
    for (std::size_t h = 0; h <= x; ++h) EXPECT_EQ(s.lik(x, h, 1), 1.0);
  }
  EXPECT_THROW(stylized_space(1), std::invalid_argument);
}

TEST(RunPolicy, StylizedExamples) {
  Rng rng(0);
  const auto s16 = stylized_space(16);
  EXPECT_EQ(run_policy(s16, Policy::ec_aware, 0.125, 15, rng).cost(), 3u);
  EXPECT_EQ(run_policy(s16, Policy::bald, 0.125, 15, rng).cost(), 1u);
  EXPECT_EQ(worst_case_cost(s16, Policy::bald, 0.125, rng).cost, 4u);
  const auto s256 = stylized_space(256);
  EXPECT_EQ(worst_case_cost(s256, Policy::ec_aware, 0.125, rng).cost, 3u);
  EXPECT_EQ(worst_case_cost(s256, Policy::bald, 0.125, rng).cost, 8u);
  EXPECT_EQ(run_policy(s16, Policy::bald, 0.9999999, 3, rng).cost(), 0u);
}

TEST(RunPolicy, EcAwareWorstCaseIsLogInverseSigma) {
  Rng rng(0);
  for (std::size_t n : {8u, 16u, 32u, 64u}) {
    const auto s = stylized_space(n);
    for (int m = 1; (1u << m) < n; ++m) {
      EXPECT_EQ(worst_case_cost(s, Policy::ec_aware, std::ldexp(1.0, -m), rng).cost, static_cast<std::size_t>(m))
          << "n=" << n << " m=" << m;
    }
  }
}

TEST(RunPolicy, TraceIsReplayable) {
  Rng rng(3);
  const auto s = stylized_space(32);
  const auto trace = run_policy(s, Policy::random, 0.125, 20, rng);
  auto st = initial_state(s);
  for (const auto& step : trace.steps) {
    EXPECT_EQ(step.label, argmax_label(s.row(step.point, 20)));
    st = eced_update(s, st, step.point, step.label);
    EXPECT_NEAR(expected_distance(s, st, 20), step.error_proxy, 1e-15);
  }
  EXPECT_LE(support_diameter(s, st), 0.125);
  EXPECT_THROW(run_policy(s, Policy::bald, 0.0, 0, rng), std::invalid_argument);
  EXPECT_THROW(parse_policy("greedy"), ConfigError);
}

TEST(BruteForceDelta, ExamplesAndCaps) {
  const PredictionTensor opposed(2, 1, 2, {0.8, 0.2, 0.2, 0.8});
  const EnsemblePairs pairs{{{0, 1}}, {1}};
  const std::size_t x[] = {0};
  EXPECT_NEAR(brute_force_delta(pairs, opposed, x), 0.75, 1e-15);
  EXPECT_EQ(brute_force_delta(pairs, support::constant_tensor(2, 1, {0.5, 0.5}), x), 0.0);
  const std::vector<std::size_t> many(14, 0);  // 2^14 > 10^4
  EXPECT_THROW(brute_force_delta(pairs, opposed, many), CapacityError);
  const LabelMatrix ref(2, 2, {0, 1, 0, 0});
  EXPECT_NEAR(brute_force_delta(pairs, ref, 0.4, opposed, x), 0.75, 1e-15);
  EXPECT_EQ(brute_force_delta(pairs, ref, 0.5, opposed, x), 0.0);
}

TEST(SpaceJson, RoundTrip) {
  const auto s = stylized_space(8);
  const auto back = space_from_json(space_to_json(s));
  EXPECT_EQ(back.prior, s.prior);
  EXPECT_EQ(back.likelihood, s.likelihood);
  EXPECT_EQ(back.distance, s.distance);
  auto j = space_to_json(s);
  j["prior"][0] = 0.9;
  EXPECT_THROW(space_from_json(j), FormatError);
}
