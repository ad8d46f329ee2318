#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "autoalpha/bandit_core.hpp"
#include "../oracles.hpp"

using namespace autoalpha;

TEST(ArgmaxTiebreak, FirstMaximumInLowestIndexMode) {
  const std::vector<double> s{0.2, 0.9, 0.9};
  EXPECT_EQ(argmax_tiebreak(s, TieBreak::lowest_index), 1u);
}

TEST(ArgmaxTiebreak, Singleton) {
  const std::vector<double> s{5.0};
  EXPECT_EQ(argmax_tiebreak(s, TieBreak::lowest_index), 0u);
  EXPECT_EQ(argmax_tiebreak(s, TieBreak::seeded_random, 9), 0u);
}

TEST(ArgmaxTiebreak, SeededRandomIsReproducible) {
  const std::vector<double> s{1.0, 1.0, 1.0};
  EXPECT_EQ(argmax_tiebreak(s, TieBreak::seeded_random, 42), argmax_tiebreak(s, TieBreak::seeded_random, 42));
}

TEST(ArgmaxTiebreak, SeededRandomReachesEveryMaximum) {
  const std::vector<double> s{1.0, 0.0, 1.0, 1.0};
  std::vector<int> hits(4, 0);
  for (std::uint64_t seed = 0; seed < 300; ++seed) ++hits[argmax_tiebreak(s, TieBreak::seeded_random, seed)];
  EXPECT_EQ(hits[1], 0);
  EXPECT_GT(hits[0], 50);
  EXPECT_GT(hits[2], 50);
  EXPECT_GT(hits[3], 50);
}

TEST(ArgmaxTiebreak, RejectsEmptyAndNan) {
  EXPECT_THROW(argmax_tiebreak(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(argmax_tiebreak(std::vector<double>{1.0, std::nan("")}), std::invalid_argument);
}

TEST(ArgmaxTiebreak, AttainsMaximumAndIsAffineInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  std::uniform_int_distribution<int> len(1, 12);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> s(static_cast<std::size_t>(len(rng)));
    // Coarse values so ties occur.
    for (auto& v : s) v = std::round(u(rng));
    const auto i = argmax_tiebreak(s);
    for (double v : s) ASSERT_GE(s[i], v);
    std::vector<double> shifted = s, scaled = s;
    for (auto& v : shifted) v += 7.0;
    for (auto& v : scaled) v *= 4.0;
    ASSERT_EQ(argmax_tiebreak(shifted), i);
    ASSERT_EQ(argmax_tiebreak(scaled), i);
    ASSERT_EQ(argmax_tiebreak(shifted, TieBreak::seeded_random, trial),
              argmax_tiebreak(s, TieBreak::seeded_random, trial));
  }
}

namespace {

RoundRecord rec(std::int64_t t, double r, std::optional<double> opt) {
  RoundRecord out;
  out.t = t;
  out.reward = r;
  out.optimal_reward = opt;
  return out;
}

}  // namespace

TEST(ComputeRegret, OptimalPlayGivesZeros) {
  std::vector<RoundRecord> log{rec(1, 1, 1), rec(2, 0, 0), rec(3, 1, 1)};
  const auto c = compute_regret(log);
  EXPECT_EQ(c.cumulative, (std::vector<double>{0, 0, 0}));
}

TEST(ComputeRegret, DirectSum) {
  std::vector<RoundRecord> log{rec(1, 0, 1), rec(2, 1, 1), rec(3, 0, 1)};
  EXPECT_EQ(compute_regret(log).cumulative, (std::vector<double>{1, 1, 2}));
  EXPECT_EQ(compute_regret(log).final_value(), 2.0);
}

TEST(ComputeRegret, MissingCounterfactual) {
  std::vector<RoundRecord> log{rec(1, 0, 1), rec(2, 1, std::nullopt)};
  EXPECT_THROW(compute_regret(log), UnsupportedEnvironmentError);
}

TEST(ComputeRegret, MatchesPrefixSumOracleAndIsMonotone) {
  std::mt19937_64 rng(11);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RoundRecord> log;
    std::vector<double> gaps;
    for (int t = 1; t <= 20; ++t) {
      const double opt = coin(rng) ? 1.0 : 0.0;
      const double r = opt > 0 && coin(rng) ? 1.0 : 0.0;
      log.push_back(rec(t, r, opt));
      gaps.push_back(opt - r);
    }
    const auto c = compute_regret(log).cumulative;
    const auto expect = oracle::prefix_sums(gaps);
    ASSERT_EQ(c, expect);
    for (std::size_t i = 1; i < c.size(); ++i) ASSERT_GE(c[i], c[i - 1]);
  }
}

TEST(DeriveSeed, OrderSensitiveAndStable) {
  EXPECT_EQ(derive_seed({1, 2, 3}), derive_seed({1, 2, 3}));
  EXPECT_NE(derive_seed({1, 2, 3}), derive_seed({3, 2, 1}));
  EXPECT_NE(derive_seed({1}), derive_seed({1, 0}));
}
