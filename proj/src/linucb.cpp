#include "autoalpha/linucb.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace autoalpha {

ArmModel ArmModel::fresh(Eigen::Index dim, std::size_t recompute_period) {
  return ArmModel{SpdMatrix::identity(dim, recompute_period), Eigen::VectorXd::Zero(dim),
                  Eigen::VectorXd::Zero(dim)};
}

LinUcb::LinUcb(std::size_t num_arms, Eigen::Index dim, std::size_t recompute_period)
    : dim_(dim) {
  if (num_arms < 2) throw std::invalid_argument("LinUcb: need at least two arms");
  if (dim <= 0) throw std::invalid_argument("LinUcb: dimension must be positive");
  // Arms start at (I, 0); creating them up front is indistinguishable from
  // lazy initialization on first use.
  arms_.reserve(num_arms);
  for (std::size_t k = 0; k < num_arms; ++k) arms_.push_back(ArmModel::fresh(dim, recompute_period));
}

void LinUcb::check_arm(ArmId id) const {
  if (id.index >= arms_.size()) {
    throw std::invalid_argument("LinUcb: arm " + std::to_string(id.index) + " outside [0, " +
                                std::to_string(arms_.size()) + ")");
  }
}

void LinUcb::check_context(const Context& x) const {
  if (x.size() != dim_) {
    throw std::invalid_argument("LinUcb: context length " + std::to_string(x.size()) +
                                " != " + std::to_string(dim_));
  }
}

const ArmModel& LinUcb::arm(ArmId id) const {
  check_arm(id);
  return arms_[id.index];
}

double LinUcb::score(ArmId id, const Context& x, double alpha) const {
  if (!(alpha >= 0.0)) throw std::invalid_argument("LinUcb: alpha must be non-negative");
  check_arm(id);
  check_context(x);
  const ArmModel& m = arms_[id.index];
  return m.theta.dot(x) + alpha * std::sqrt(m.gram.quad_form_inverse(x));
}

ArmId LinUcb::select_arm(std::span<const ArmId> candidates, const Context& x, double alpha,
                         TieBreak mode, std::uint64_t seed) const {
  if (candidates.empty()) throw std::invalid_argument("LinUcb: empty arm set");
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (ArmId id : candidates) scores.push_back(score(id, x, alpha));
  return candidates[argmax_tiebreak(scores, mode, seed)];
}

ArmId LinUcb::select_arm(const Context& x, double alpha, TieBreak mode,
                         std::uint64_t seed) const {
  std::vector<ArmId> all(arms_.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = ArmId{k};
  return select_arm(all, x, alpha, mode, seed);
}

void LinUcb::update(ArmId id, const Context& x, double reward) {
  check_arm(id);
  check_context(x);
  if (!std::isfinite(reward)) throw std::invalid_argument("LinUcb: reward must be finite");
  ArmModel& m = arms_[id.index];
  m.gram.rank_one_update(x);
  m.response.noalias() += reward * x;
  m.theta = m.gram.solve(m.response);
}

}  // namespace autoalpha
