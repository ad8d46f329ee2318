#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "autoalpha/errors.hpp"

namespace autoalpha {

// Observed feature vector for one round. Length is fixed for an experiment.
using Context = Eigen::VectorXd;

struct ArmId {
  std::size_t index = 0;

  friend bool operator==(ArmId, ArmId) = default;
  friend auto operator<=>(ArmId, ArmId) = default;
};

// One interaction. `t` is the 1-based round number.
struct RoundRecord {
  std::int64_t t = 0;
  Context context;
  double alpha = 0.0;
  ArmId arm;
  double reward = 0.0;
  // Evaluation-only counterfactual: best realized reward across arms.
  std::optional<double> optimal_reward;
};

struct RegretCurve {
  std::vector<double> cumulative;

  double final_value() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

enum class TieBreak { lowest_index, seeded_random };

// Index of a maximal score. lowest_index returns the first maximum;
// seeded_random picks uniformly among the maxima with an RNG seeded by `seed`.
// Throws std::invalid_argument on empty input or NaN.
std::size_t argmax_tiebreak(std::span<const double> scores,
                            TieBreak mode = TieBreak::lowest_index,
                            std::uint64_t seed = 0);

// cumulative[i] = sum over records[0..i] of (optimal_reward - reward).
// Throws UnsupportedEnvironmentError when a record lacks optimal_reward.
RegretCurve compute_regret(std::span<const RoundRecord> log);

// Deterministic 64-bit stream derivation (splitmix64 over the parts).
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

}  // namespace autoalpha
