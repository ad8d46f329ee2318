#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "autoalpha/alpha_posterior.hpp"
#include "autoalpha/bandit_core.hpp"
#include "autoalpha/ctree.hpp"
#include "autoalpha/environments.hpp"
#include "autoalpha/linucb.hpp"

namespace autoalpha {

struct Choice {
  ArmId arm;
  double alpha = 0.0;
  std::size_t alpha_index = 0;
};

struct PolicyOptions {
  std::size_t num_arms = 2;
  Eigen::Index dim = 1;
  TieBreak tie_break = TieBreak::lowest_index;
  std::size_t recompute_period = SpdMatrix::kDefaultRecomputePeriod;
  std::uint64_t seed = 0;
};

// Uniform step contract: choose() then learn() once per round.
//
// Every policy owns two engines derived from its seed: one for exploration
// value selection and one for arm tie-breaking. The arm tie-break engine is
// only consulted in seeded_random mode.
class Policy {
 public:
  explicit Policy(const PolicyOptions& options);
  virtual ~Policy() = default;

  virtual std::string_view kind() const = 0;
  virtual Choice choose(const Context& x) = 0;
  virtual void learn(const Context& x, ArmId arm, double reward) = 0;

  // Lossless, versioned text blob; see restore_policy().
  std::string snapshot() const;

  const LinUcb& inner() const noexcept { return inner_; }
  std::size_t rounds() const noexcept { return rounds_; }
  TieBreak tie_break() const noexcept { return tie_break_; }

 protected:
  ArmId select_inner(const Context& x, double alpha);

  LinUcb inner_;
  TieBreak tie_break_;
  Rng meta_rng_;
  Rng tie_rng_;
  std::size_t rounds_ = 0;

 private:
  friend struct PolicyCodec;
};

class FixedAlphaPolicy final : public Policy {
 public:
  FixedAlphaPolicy(const PolicyOptions& options, double alpha);

  std::string_view kind() const override { return "fixed"; }
  Choice choose(const Context& x) override;
  void learn(const Context& x, ArmId arm, double reward) override;

  double alpha() const noexcept { return alpha_; }

 private:
  friend struct PolicyCodec;
  double alpha_;
};

struct OplinucbOptions {
  double prior_success = 1.0;
  double prior_failure = 1.0;
  FractionalRewards fractional = FractionalRewards::reject;
};

// Thompson sampling over the exploration grid feeding an inner LinUCB.
class OplinucbPolicy final : public Policy {
 public:
  OplinucbPolicy(const PolicyOptions& options, AlphaGrid grid, const OplinucbOptions& meta = {});

  std::string_view kind() const override { return "oplinucb"; }
  Choice choose(const Context& x) override;
  // Credits the reward to the exploration value chosen this round.
  void learn(const Context& x, ArmId arm, double reward) override;

  const AlphaPosterior& posterior() const noexcept { return posterior_; }
  std::optional<std::size_t> pending_alpha_index() const noexcept { return pending_; }

 private:
  friend struct PolicyCodec;
  AlphaPosterior posterior_;
  OplinucbOptions meta_;
  std::optional<std::size_t> pending_;
};

struct DoplinucbOptions {
  std::size_t warmup_rounds = 5000;
  std::size_t window_size = 5000;
  std::size_t refit_period = 500;
  ctree::CTreeConfig tree;
};

struct TrainingRow {
  Context context;
  double alpha = 0.0;
  double reward = 0.0;
};

// Conditional-inference tree over (context, alpha) -> reward picks the
// exploration value each round. Before the first successful fit the value is
// drawn uniformly from the grid.
class DoplinucbPolicy final : public Policy {
 public:
  DoplinucbPolicy(const PolicyOptions& options, AlphaGrid grid, const DoplinucbOptions& meta = {});

  std::string_view kind() const override { return "doplinucb"; }
  Choice choose(const Context& x) override;
  // Updates the inner model, appends to the training window and refits on
  // schedule: after round warmup_rounds and every refit_period rounds after.
  void learn(const Context& x, ArmId arm, double reward) override;

  // Fits the tree on the current window. With fewer than min_leaf_weight rows
  // this is a no-op that reports through the notice sink and returns false.
  bool ctree_refit();

  // Predicted reward for every grid value at context x (requires a tree).
  std::vector<double> predict_all(const Context& x) const;

  const AlphaGrid& grid() const noexcept { return grid_; }
  const std::optional<ctree::Tree>& tree() const noexcept { return tree_; }
  const std::deque<TrainingRow>& training_log() const noexcept { return window_; }
  std::size_t refit_count() const noexcept { return refits_; }
  std::size_t skipped_refits() const noexcept { return skipped_refits_; }
  const DoplinucbOptions& options() const noexcept { return meta_; }

  void set_notice_sink(std::function<void(const std::string&)> sink) { notice_ = std::move(sink); }

 private:
  friend struct PolicyCodec;
  AlphaGrid grid_;
  DoplinucbOptions meta_;
  std::optional<ctree::Tree> tree_;
  std::deque<TrainingRow> window_;
  std::optional<std::size_t> pending_;
  std::size_t refits_ = 0;
  std::size_t skipped_refits_ = 0;
  std::function<void(const std::string&)> notice_;
};

// Rebuilds a policy from Policy::snapshot(). Throws std::invalid_argument on
// an unknown format or version.
std::unique_ptr<Policy> restore_policy(const std::string& blob);

// One full round against an environment: observe, choose, step, learn.
// Throws EndOfStream when the environment is exhausted.
RoundRecord play_round(Policy& policy, Environment& env);

}  // namespace autoalpha
