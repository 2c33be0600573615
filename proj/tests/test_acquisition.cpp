#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "balance/acquisition.hpp"
#include "balance/oracle.hpp"
#include "support/oracles.hpp"

using namespace balance;

namespace {

const EnsemblePairs kOnePair{{{0, 1}}, {1}};

PredictionTensor two_rows(std::vector<double> a, std::vector<double> b) {
  std::vector<double> data = a;
  data.insert(data.end(), b.begin(), b.end());
  return {2, 1, a.size(), data};
}

}  // namespace

TEST(LikelihoodRatio, Examples) {
  EXPECT_EQ(likelihood_ratio(std::vector<double>{0.5, 0.5}), (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(likelihood_ratio(std::vector<double>{0.8, 0.2}), (std::vector<double>{1.0, 0.25}));
  EXPECT_EQ(likelihood_ratio(std::vector<double>{1.0, 0.0}), (std::vector<double>{1.0, 0.0}));
  EXPECT_THROW(likelihood_ratio(std::vector<double>{0.0, 0.0}), std::invalid_argument);
}

TEST(BalanceExact, UniformRowsScoreZero) {
  EXPECT_EQ(balance_point(0, kOnePair, two_rows({0.5, 0.5}, {0.5, 0.5})), 0.0);
}

TEST(BalanceExact, OpposedRowsHandValue) {
  EXPECT_NEAR(balance_point(0, kOnePair, two_rows({0.8, 0.2}, {0.2, 0.8})), 0.75, 1e-15);
}

TEST(BalanceExact, InactiveEdgesScoreZero) {
  const EnsemblePairs off{{{0, 1}}, {0}};
  EXPECT_EQ(balance_point(0, off, two_rows({0.8, 0.2}, {0.2, 0.8})), 0.0);
}

TEST(BalanceExact, DuplicatedPointHandValue) {
  const auto t = two_rows({0.8, 0.2}, {0.2, 0.8});
  const std::size_t twice[] = {0, 0};
  EXPECT_NEAR(balance_exact(twice, kOnePair, t), 0.9375, 1e-15);
}

TEST(BalanceExact, EnumerationCap) {
  const auto t = two_rows({0.8, 0.2}, {0.2, 0.8});
  const std::vector<std::size_t> many(21, 0);  // 2^21 > 1e6
  EXPECT_THROW(balance_exact(many, kOnePair, t), CapacityError);
  const std::vector<std::size_t> three(3, 0);
  EXPECT_THROW(balance_exact(three, kOnePair, t, 7), CapacityError);
  EXPECT_NO_THROW(balance_exact(three, kOnePair, t, 8));
}

TEST(BalanceExact, MatchesBruteForceAndBounds) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t k = 1 + rng() % 4, c = 2 + rng() % 2, b = 1 + rng() % 3;
    const auto t = support::random_tensor(2 * k, 4, c, rng, trial % 3 == 0 ? 0.3 : 0.0);
    const auto pairs = support::random_pairs(k, rng, 0.7);
    std::vector<std::size_t> points(b);
    for (auto& x : points) x = rng() % 4;
    const double fast = balance_exact(points, pairs, t);
    EXPECT_NEAR(fast, oracle::brute_force_delta(pairs, t, points), 1e-9);
    EXPECT_GE(fast, 0.0);
    EXPECT_LE(fast, 1.0);
  }
}

TEST(BalanceExact, PermutationInvariant) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = support::random_tensor(6, 5, 3, rng);
    const auto pairs = support::random_pairs(3, rng, 0.8);
    std::vector<std::size_t> points{0, 2, 4};
    const double base = balance_exact(points, pairs, t);
    const double base_bb = batchbald_exact(points, t);
    while (std::next_permutation(points.begin(), points.end())) {
      EXPECT_NEAR(balance_exact(points, pairs, t), base, 1e-9);
      EXPECT_NEAR(batchbald_exact(points, t), base_bb, 1e-9);
    }
  }
}

TEST(BalanceExact, BatchExtensionMonotone) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng() % 3, c = 2 + rng() % 2;
    const auto t = support::random_tensor(2 * k, 5, c, rng, 0.2);
    const auto pairs = support::random_pairs(k, rng, 0.8);
    std::vector<std::size_t> points{rng() % 5};
    double previous = balance_exact(points, pairs, t);
    for (int step = 0; step < 3; ++step) {
      points.push_back(rng() % 5);
      const double next = balance_exact(points, pairs, t);
      EXPECT_GE(next, previous - 1e-9);
      previous = next;
    }
  }
}

TEST(Bald, Examples) {
  EXPECT_NEAR(bald_point(0, two_rows({1.0, 0.0}, {0.0, 1.0})), 1.0, 1e-15);
  EXPECT_EQ(bald_point(0, two_rows({0.7, 0.3}, {0.7, 0.3})), 0.0);
  EXPECT_EQ(bald_point(0, two_rows({0.5, 0.5}, {0.5, 0.5})), 0.0);
}

TEST(BatchBald, Examples) {
  std::mt19937_64 rng(24);
  const auto t = support::random_tensor(5, 3, 3, rng);
  for (std::size_t x = 0; x < 3; ++x) {
    const std::size_t one[] = {x};
    EXPECT_NEAR(batchbald_exact(one, t), bald_point(x, t), 1e-12);
  }
  const std::size_t twice[] = {0, 0};
  EXPECT_NEAR(batchbald_exact(twice, two_rows({1.0, 0.0}, {0.0, 1.0})), 1.0, 1e-12);
  EXPECT_EQ(batchbald_exact(twice, two_rows({0.6, 0.4}, {0.6, 0.4})), 0.0);
}

TEST(MeanStd, Examples) {
  EXPECT_EQ(mean_std(0, two_rows({0.6, 0.4}, {0.6, 0.4})), 0.0);
  EXPECT_NEAR(mean_std(0, two_rows({1.0, 0.0}, {0.0, 1.0})), 0.5, 1e-15);
  EXPECT_EQ(mean_std(0, PredictionTensor(1, 1, 2, {0.3, 0.7})), 0.0);
}

TEST(VariationRatio, Examples) {
  EXPECT_EQ(variation_ratio(0, two_rows({1.0, 0.0}, {1.0, 0.0})), 0.0);
  EXPECT_NEAR(variation_ratio(0, two_rows({1.0, 0.0}, {0.0, 1.0})), 0.5, 1e-15);
  EXPECT_NEAR(variation_ratio(0, two_rows({0.7, 0.3}, {0.7, 0.3})), 0.3, 1e-15);
}

TEST(NonInformative, ConstantRowsScoreZeroEverywhere) {
  // rows identical across hypotheses and constant over labels
  const auto t = support::constant_tensor(6, 2, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  const EnsemblePairs pairs{{{0, 1}, {2, 3}, {4, 5}}, {1, 1, 1}};
  EXPECT_EQ(balance_point(0, pairs, t), 0.0);
  EXPECT_EQ(bald_point(0, t), 0.0);
  EXPECT_EQ(mean_std(0, t), 0.0);
}

TEST(NonInformative, IdenticalNonUniformRowsDisagreementOnlyScoresZero) {
  // identical rows: the disagreement measures vanish; Delta keeps the
  // within-hypothesis label uncertainty and is positive
  const auto t = support::constant_tensor(2, 1, {0.7, 0.3});
  EXPECT_EQ(bald_point(0, t), 0.0);
  EXPECT_EQ(mean_std(0, t), 0.0);
  EXPECT_NEAR(balance_point(0, kOnePair, t), 0.3 * (1.0 - 9.0 / 49.0), 1e-15);
}

TEST(NonInformative, ConsensusOneHotScoresZero) {
  const auto t = support::constant_tensor(4, 1, {0.0, 1.0, 0.0});
  const EnsemblePairs pairs{{{0, 1}, {2, 3}}, {1, 1}};
  EXPECT_EQ(balance_point(0, pairs, t), 0.0);
  EXPECT_EQ(variation_ratio(0, t), 0.0);
}
