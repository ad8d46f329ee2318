#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "autoalpha/bandit_core.hpp"
#include "autoalpha/linalg.hpp"

namespace autoalpha {

// Ridge state of one arm: A = DᵀD + I, b = Dᵀc, theta = A⁻¹ b.
struct ArmModel {
  SpdMatrix gram;
  Eigen::VectorXd response;
  Eigen::VectorXd theta;

  static ArmModel fresh(Eigen::Index dim, std::size_t recompute_period);
};

// Disjoint-model LinUCB. Every arm shares the round's context vector.
class LinUcb {
 public:
  LinUcb(std::size_t num_arms, Eigen::Index dim,
         std::size_t recompute_period = SpdMatrix::kDefaultRecomputePeriod);

  std::size_t num_arms() const noexcept { return arms_.size(); }
  Eigen::Index dim() const noexcept { return dim_; }
  const ArmModel& arm(ArmId id) const;

  // thetaᵀx + alpha * sqrt(xᵀ A⁻¹ x).
  double score(ArmId id, const Context& x, double alpha) const;

  ArmId select_arm(std::span<const ArmId> candidates, const Context& x, double alpha,
                   TieBreak mode = TieBreak::lowest_index, std::uint64_t seed = 0) const;
  ArmId select_arm(const Context& x, double alpha, TieBreak mode = TieBreak::lowest_index,
                   std::uint64_t seed = 0) const;

  // A += x xᵀ, b += r x for the chosen arm only.
  void update(ArmId id, const Context& x, double reward);

  std::vector<ArmModel>& arms_for_restore() { return arms_; }
  const std::vector<ArmModel>& arms() const noexcept { return arms_; }

 private:
  void check_arm(ArmId id) const;
  void check_context(const Context& x) const;

  Eigen::Index dim_;
  std::vector<ArmModel> arms_;
};

}  // namespace autoalpha
