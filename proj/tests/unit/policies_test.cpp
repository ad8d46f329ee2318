#include <gtest/gtest.h>

#include <random>

#include <boost/math/distributions/chi_squared.hpp>

#include "autoalpha/policies.hpp"
#include "../oracles.hpp"

using namespace autoalpha;

namespace {

PolicyOptions options(Eigen::Index dim, std::uint64_t seed, std::size_t arms = 2) {
  PolicyOptions o;
  o.num_arms = arms;
  o.dim = dim;
  o.seed = seed;
  return o;
}

struct Trace {
  std::vector<std::size_t> arms;
  std::vector<std::size_t> alpha_index;
  std::vector<double> rewards;

  friend bool operator==(const Trace&, const Trace&) = default;
};

Trace play(Policy& p, Environment& env, std::size_t rounds) {
  Trace tr;
  for (std::size_t t = 0; t < rounds; ++t) {
    const Context x = env.current_context();
    const Choice c = p.choose(x);
    const double r = env.step(c.arm).reward;
    p.learn(x, c.arm, r);
    tr.arms.push_back(c.arm.index);
    tr.alpha_index.push_back(c.alpha_index);
    tr.rewards.push_back(r);
  }
  return tr;
}

Trace from_ref(const std::vector<oracle::RefStep>& steps) {
  Trace tr;
  for (const auto& s : steps) {
    tr.arms.push_back(s.arm);
    tr.alpha_index.push_back(s.alpha_index);
    tr.rewards.push_back(s.reward);
  }
  return tr;
}

DoplinucbOptions small_doplinucb() {
  DoplinucbOptions d;
  d.warmup_rounds = 200;
  d.window_size = 150;
  d.refit_period = 100;
  d.tree.min_leaf_weight = 10;
  return d;
}

}  // namespace

TEST(FixedAlphaPolicy, GreedyMatchesReference) {
  auto env = make_synthetic(4, 3, 21);
  auto ref_env = env;
  FixedAlphaPolicy p(options(4, 1, 3), 0.0);
  const auto tr = play(p, env, 300);
  EXPECT_EQ(tr, from_ref(oracle::reference_fixed(ref_env, 0.0, 300)));
  EXPECT_EQ(p.rounds(), 300u);
}

TEST(FixedAlphaPolicy, RoundRecordCarriesAlpha) {
  auto env = make_synthetic(3, 2, 2);
  FixedAlphaPolicy p(options(3, 1), 0.37);
  const auto rec = play_round(p, env);
  EXPECT_EQ(rec.t, 1);
  EXPECT_EQ(rec.alpha, 0.37);
  ASSERT_TRUE(rec.optimal_reward);
  EXPECT_THROW(FixedAlphaPolicy(options(3, 1), -1.0), std::invalid_argument);
}

TEST(FixedAlphaPolicy, OneUpdatePerRound) {
  auto env = make_synthetic(3, 2, 3);
  FixedAlphaPolicy p(options(3, 1), 0.2);
  play(p, env, 57);
  std::size_t updates = 0;
  for (const auto& a : p.inner().arms()) {
    updates += a.gram.updates_since_recompute();
  }
  EXPECT_EQ(updates, 57u);
}

TEST(Policies, DegenerateGridEquivalence) {
  for (auto mode : {TieBreak::lowest_index, TieBreak::seeded_random}) {
    auto base = make_synthetic(4, 2, 30);
    auto o = options(4, 99);
    o.tie_break = mode;
    FixedAlphaPolicy f(o, 0.4);
    OplinucbPolicy op(o, AlphaGrid({0.4}));
    auto d_opts = small_doplinucb();
    DoplinucbPolicy dp(o, AlphaGrid({0.4}), d_opts);
    auto e1 = base, e2 = base, e3 = base;
    const auto t1 = play(f, e1, 500);
    EXPECT_EQ(t1, play(op, e2, 500));
    EXPECT_EQ(t1, play(dp, e3, 500));
  }
}

TEST(OplinucbPolicy, ConservationOnStandardGrid) {
  auto env = make_synthetic(5, 2, 4);
  OplinucbPolicy p(options(5, 4), AlphaGrid::standard());
  EXPECT_EQ(p.posterior().size(), 100u);
  double total = 0;
  for (std::size_t t = 1; t <= 700; ++t) {
    const auto rec = play_round(p, env);
    total += rec.reward;
    ASSERT_EQ(p.posterior().total_pulls(), t);
    ASSERT_DOUBLE_EQ(p.posterior().total_reward(), total);
    ASSERT_EQ(rec.alpha, AlphaGrid::standard()[static_cast<std::size_t>(std::round(rec.alpha * 100)) - 1]);
  }
}

TEST(OplinucbPolicy, MatchesReferenceTrajectory) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto env = make_synthetic(5, 2, 100 + seed);
    auto ref_env = env;
    const auto grid = AlphaGrid::standard();
    OplinucbPolicy p(options(5, seed), grid);
    const auto tr = play(p, env, 500);
    EXPECT_EQ(tr, from_ref(oracle::reference_oplinucb(ref_env, grid.values(), 1.0, 1.0, seed, 500)));
  }
}

TEST(OplinucbPolicy, EnforcesChooseLearnAlternation) {
  OplinucbPolicy p(options(2, 1), AlphaGrid::standard());
  const Context x = Context::Ones(2);
  EXPECT_THROW(p.learn(x, ArmId{0}, 1.0), InvalidStateError);
  const auto c = p.choose(x);
  EXPECT_EQ(p.pending_alpha_index(), c.alpha_index);
  EXPECT_THROW(p.choose(x), InvalidStateError);
  p.learn(x, c.arm, 1.0);
  EXPECT_FALSE(p.pending_alpha_index());
}

TEST(OplinucbPolicy, FractionalRewardPolicy) {
  const Context x = Context::Ones(2);
  OplinucbPolicy reject(options(2, 1), AlphaGrid({0.1, 0.2}));
  auto c = reject.choose(x);
  EXPECT_THROW(reject.learn(x, c.arm, 0.5), std::invalid_argument);
  OplinucbOptions meta;
  meta.fractional = FractionalRewards::bernoulli;
  OplinucbPolicy tolerant(options(2, 1), AlphaGrid({0.1, 0.2}), meta);
  c = tolerant.choose(x);
  tolerant.learn(x, c.arm, 0.5);
  EXPECT_EQ(tolerant.posterior().total_pulls(), 1u);
}

TEST(DoplinucbPolicy, MatchesReferenceTrajectory) {
  const auto grid = AlphaGrid::from_range(0.05, 1.0, 0.05);
  oracle::RefDoplinucbConfig cfg;
  for (std::uint64_t seed : {5u, 6u}) {
    auto env = make_synthetic(5, 2, 200 + seed);
    auto ref_env = env;
    DoplinucbPolicy p(options(5, seed), grid, small_doplinucb());
    const auto tr = play(p, env, 500);
    std::size_t ref_refits = 0;
    EXPECT_EQ(tr, from_ref(oracle::reference_doplinucb(ref_env, grid.values(), cfg, seed, 500, &ref_refits)));
    EXPECT_EQ(p.refit_count(), ref_refits);
    EXPECT_EQ(p.refit_count(), 4u);
  }
}

TEST(DoplinucbPolicy, WarmupIsUniform) {
  DoplinucbOptions d;
  d.warmup_rounds = 1000000;
  DoplinucbPolicy p(options(2, 17), AlphaGrid::standard(), d);
  std::vector<double> hits(100, 0);
  const Context x = Context::Ones(2);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto c = p.choose(x);
    hits[c.alpha_index] += 1;
    p.learn(x, c.arm, 0.0);
  }
  double chi2 = 0;
  for (double h : hits) chi2 += (h - n / 100.0) * (h - n / 100.0) / (n / 100.0);
  boost::math::chi_squared dist(99);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01);
  EXPECT_FALSE(p.tree());
}

TEST(DoplinucbPolicy, LearnsLowAlphaPreference) {
  DoplinucbOptions d;
  d.warmup_rounds = 1000000;
  d.window_size = 3000;
  DoplinucbPolicy p(options(3, 8), AlphaGrid::standard(), d);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(0, 1);
  for (int i = 0; i < 3000; ++i) {
    Context x(3);
    x << nd(rng), nd(rng), nd(rng);
    const auto c = p.choose(x);
    p.learn(x, c.arm, c.alpha <= 0.1 + 1e-12 ? 1.0 : 0.0);
  }
  ASSERT_TRUE(p.ctree_refit());
  for (int i = 0; i < 100; ++i) {
    Context x(3);
    x << nd(rng), nd(rng), nd(rng);
    const auto c = p.choose(x);
    ASSERT_LE(c.alpha, 0.1 + 1e-12);
    p.learn(x, c.arm, 1.0);
  }
}

TEST(DoplinucbPolicy, HighAlphaWindowPredictions) {
  DoplinucbOptions d;
  d.warmup_rounds = 1000000;
  d.window_size = 2000;
  DoplinucbPolicy p(options(2, 9), AlphaGrid::standard(), d);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd(0, 1);
  for (int i = 0; i < 2000; ++i) {
    Context x(2);
    x << nd(rng), nd(rng);
    const auto c = p.choose(x);
    p.learn(x, c.arm, c.alpha > 0.5 ? 1.0 : 0.0);
  }
  ASSERT_TRUE(p.ctree_refit());
  const auto pred = p.predict_all(Context::Zero(2));
  EXPECT_GT(pred[89], pred[9]);  // alpha 0.9 vs 0.1
}

TEST(DoplinucbPolicy, IdenticalRewardsGiveSingleLeafAndLowestAlpha) {
  DoplinucbOptions d;
  d.warmup_rounds = 1000000;
  DoplinucbPolicy p(options(2, 10), AlphaGrid::standard(), d);
  const Context x = Context::Ones(2);
  for (int i = 0; i < 100; ++i) {
    const auto c = p.choose(x);
    p.learn(x, c.arm, 1.0);
  }
  ASSERT_TRUE(p.ctree_refit());
  EXPECT_EQ(p.tree()->leaf_count(), 1u);
  EXPECT_EQ(p.choose(x).alpha_index, 0u);
}

TEST(DoplinucbPolicy, RefitSchedule) {
  DoplinucbOptions d;
  d.warmup_rounds = 300;
  d.refit_period = 500;
  d.window_size = 400;
  DoplinucbPolicy p(options(3, 11), AlphaGrid::standard(), d);
  auto env = make_synthetic(3, 2, 5);
  play(p, env, 300);
  const auto at_warmup = p.refit_count();
  EXPECT_EQ(at_warmup, 1u);
  EXPECT_TRUE(p.tree());
  play(p, env, 2000);
  EXPECT_EQ(p.refit_count() - at_warmup, 4u);
}

TEST(DoplinucbPolicy, WindowEvictsOldestFirst) {
  DoplinucbOptions d;
  d.warmup_rounds = 1000000;
  d.window_size = 25;
  DoplinucbPolicy p(options(1, 12), AlphaGrid::standard(), d);
  for (int i = 0; i < 60; ++i) {
    Context x(1);
    x << i;
    const auto c = p.choose(x);
    p.learn(x, c.arm, 0.0);
    ASSERT_LE(p.training_log().size(), 25u);
  }
  EXPECT_EQ(p.training_log().front().context[0], 35.0);
  EXPECT_EQ(p.training_log().back().context[0], 59.0);
}

TEST(DoplinucbPolicy, InsufficientDataSkipsRefitWithNotice) {
  DoplinucbOptions d;
  d.warmup_rounds = 3;
  d.refit_period = 1;
  DoplinucbPolicy p(options(2, 13), AlphaGrid::standard(), d);
  std::vector<std::string> notices;
  p.set_notice_sink([&](const std::string& m) { notices.push_back(m); });
  auto env = make_synthetic(2, 2, 6);
  play(p, env, 5);
  EXPECT_FALSE(p.tree());
  EXPECT_EQ(p.refit_count(), 0u);
  EXPECT_EQ(p.skipped_refits(), 3u);
  EXPECT_EQ(notices.size(), 3u);
  EXPECT_THROW(p.predict_all(Context::Zero(2)), InvalidStateError);
}

TEST(Snapshot, RoundTripIsLossless) {
  const auto grid = AlphaGrid::from_range(0.1, 1.0, 0.1);
  for (int kind = 0; kind < 3; ++kind) {
    auto o = options(4, 50 + kind);
    o.tie_break = TieBreak::seeded_random;
    o.recompute_period = 37;
    std::unique_ptr<Policy> p;
    if (kind == 0) p = std::make_unique<FixedAlphaPolicy>(o, 0.3);
    if (kind == 1) p = std::make_unique<OplinucbPolicy>(o, grid);
    if (kind == 2) p = std::make_unique<DoplinucbPolicy>(o, grid, small_doplinucb());
    auto env = make_synthetic(4, 2, 300);
    play(*p, env, 260);
    const std::string blob = p->snapshot();
    auto restored = restore_policy(blob);
    EXPECT_EQ(restored->kind(), p->kind());
    EXPECT_EQ(restored->snapshot(), blob);
    auto env2 = env;
    EXPECT_EQ(play(*p, env, 240), play(*restored, env2, 240));
    EXPECT_EQ(restored->snapshot(), p->snapshot());
  }
}

TEST(Snapshot, PendingChoiceSurvives) {
  OplinucbPolicy p(options(2, 1), AlphaGrid::standard());
  const Context x = Context::Ones(2);
  const auto c = p.choose(x);
  auto r = restore_policy(p.snapshot());
  EXPECT_THROW(r->choose(x), InvalidStateError);
  r->learn(x, c.arm, 1.0);
  p.learn(x, c.arm, 1.0);
  EXPECT_EQ(r->snapshot(), p.snapshot());
}

TEST(Snapshot, RejectsUnknownFormat) {
  EXPECT_THROW(restore_policy(R"({"format":"other","version":1})"), std::invalid_argument);
  FixedAlphaPolicy p(options(2, 1), 0.1);
  std::string blob = p.snapshot();
  const auto pos = blob.find("\"version\":1");
  ASSERT_NE(pos, std::string::npos);
  blob.replace(pos, 11, "\"version\":9");
  EXPECT_THROW(restore_policy(blob), std::invalid_argument);
}

TEST(Policies, SeededDeterminism) {
  const auto grid = AlphaGrid::standard();
  auto o = options(3, 77);
  o.tie_break = TieBreak::seeded_random;
  auto e1 = make_synthetic(3, 2, 1), e2 = make_synthetic(3, 2, 1);
  DoplinucbPolicy a(o, grid, small_doplinucb()), b(o, grid, small_doplinucb());
  EXPECT_EQ(play(a, e1, 400), play(b, e2, 400));
}
