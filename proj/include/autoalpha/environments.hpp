#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "autoalpha/bandit_core.hpp"

namespace autoalpha {

struct StepResult {
  double reward = 0.0;
  double optimal_reward = 0.0;
  std::optional<Context> next_context;  // empty once the stream is exhausted
};

// Reward-generating process. The current context is observable before the
// arm is chosen; step() reveals the chosen arm's reward and, for
// evaluation only, the best realized reward across all arms.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t num_arms() const = 0;
  virtual Eigen::Index dim() const = 0;
  virtual bool exhausted() const = 0;
  // Throws EndOfStream when exhausted.
  virtual const Context& current_context() const = 0;
  // Throws EndOfStream when exhausted, std::invalid_argument for a bad arm.
  virtual StepResult step(ArmId arm) = 0;
  // Zero-based index of the round about to be played.
  virtual std::size_t round_index() const = 0;
};

struct LabeledRow {
  Context context;
  int label = 0;  // 0 or 1
};

using LabeledRows = std::vector<LabeledRow>;

// Replays a labeled dataset once, in order. Two arms; arm k pays 1 iff k == label.
class ReplayEnv : public Environment {
 public:
  explicit ReplayEnv(std::shared_ptr<const LabeledRows> rows);
  // Presents rows in a seeded random order.
  ReplayEnv(std::shared_ptr<const LabeledRows> rows, std::uint64_t shuffle_seed);

  std::size_t num_arms() const override { return 2; }
  Eigen::Index dim() const override;
  bool exhausted() const override { return cursor_ >= order_.size(); }
  const Context& current_context() const override;
  StepResult step(ArmId arm) override;
  std::size_t round_index() const override { return cursor_; }

  std::size_t size() const noexcept { return order_.size(); }
  // Label of the row about to be played. Throws EndOfStream when exhausted.
  int current_label() const;

 private:
  std::shared_ptr<const LabeledRows> rows_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

// Replay whose arm-label mapping is inverted on rounds t (zero-based) with
// floor(t / period) odd.
class SwitchingReplayEnv : public Environment {
 public:
  SwitchingReplayEnv(ReplayEnv base, std::int64_t period);

  std::size_t num_arms() const override { return base_.num_arms(); }
  Eigen::Index dim() const override { return base_.dim(); }
  bool exhausted() const override { return base_.exhausted(); }
  const Context& current_context() const override { return base_.current_context(); }
  StepResult step(ArmId arm) override;
  std::size_t round_index() const override { return base_.round_index(); }

  std::int64_t period() const noexcept { return period_; }
  bool inverted() const;
  // Label as seen by the arms this round (inverted in odd blocks).
  int current_label() const;

 private:
  ReplayEnv base_;
  std::int64_t period_;
};

// Throws std::invalid_argument when period < 1.
SwitchingReplayEnv make_switching(ReplayEnv base, std::int64_t period);

// Linear-Bernoulli environment: contexts i.i.d. uniform on the unit ball,
// E[r_k | x] = clamp(mu_kᵀx, 0, 1). A single uniform draw per round drives
// every arm's Bernoulli outcome, so the best realized reward is that of the
// arm with the largest success probability.
class SyntheticLinearEnv : public Environment {
 public:
  // Unit-norm arm weights drawn from `seed`.
  SyntheticLinearEnv(Eigen::Index dim, std::size_t num_arms, std::uint64_t seed,
                     std::optional<std::size_t> horizon = std::nullopt);
  // Explicit arm weights (one vector per arm).
  SyntheticLinearEnv(std::vector<Eigen::VectorXd> weights, std::uint64_t seed,
                     std::optional<std::size_t> horizon = std::nullopt);

  std::size_t num_arms() const override { return weights_.size(); }
  Eigen::Index dim() const override { return dim_; }
  bool exhausted() const override { return horizon_ && round_ >= *horizon_; }
  const Context& current_context() const override;
  StepResult step(ArmId arm) override;
  std::size_t round_index() const override { return round_; }

  const std::vector<Eigen::VectorXd>& weights() const noexcept { return weights_; }
  double success_probability(ArmId arm, const Context& x) const;
  // Samples one context from the same distribution with a caller-owned engine.
  static Context sample_context(Eigen::Index dim, std::mt19937_64& rng);

 private:
  void draw_context();

  Eigen::Index dim_;
  std::vector<Eigen::VectorXd> weights_;
  std::mt19937_64 rng_;
  std::optional<std::size_t> horizon_;
  std::size_t round_ = 0;
  Context context_;
};

SyntheticLinearEnv make_synthetic(Eigen::Index dim, std::size_t num_arms, std::uint64_t seed,
                                  std::optional<std::size_t> horizon = std::nullopt);

}  // namespace autoalpha
