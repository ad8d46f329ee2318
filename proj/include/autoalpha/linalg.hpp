#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace autoalpha {

// Dense symmetric positive-definite matrix with a maintained inverse.
//
// Starts at the identity and grows only by rank-one additions x xᵀ. The
// inverse is updated with Sherman-Morrison on every addition and rebuilt
// from the entries by a Cholesky solve every `recompute_period` additions.
class SpdMatrix {
 public:
  static constexpr std::size_t kDefaultRecomputePeriod = 1000;

  static SpdMatrix identity(Eigen::Index dim,
                            std::size_t recompute_period = kDefaultRecomputePeriod);

  Eigen::Index dim() const noexcept { return entries_.rows(); }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  const Eigen::MatrixXd& inverse() const noexcept { return inverse_; }
  std::size_t updates_since_recompute() const noexcept { return updates_since_recompute_; }
  std::size_t recompute_period() const noexcept { return recompute_period_; }

  // entries += x xᵀ.
  void rank_one_update(const Eigen::VectorXd& x);

  // xᵀ A⁻¹ x, clamped at zero.
  double quad_form_inverse(const Eigen::VectorXd& x) const;

  // A⁻¹ b using the cached inverse.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  // Rebuilds the cached inverse from the entries.
  void recompute_inverse();

  // True when an LLᵀ factorization of the entries succeeds.
  bool cholesky_succeeds() const;

  // Rebuild from serialized parts; validates shapes.
  static SpdMatrix from_parts(Eigen::MatrixXd entries, Eigen::MatrixXd inverse,
                              std::size_t updates_since_recompute,
                              std::size_t recompute_period);

 private:
  SpdMatrix() = default;
  void check_dim(const Eigen::VectorXd& v, const char* op) const;

  Eigen::MatrixXd entries_;
  Eigen::MatrixXd inverse_;
  std::size_t updates_since_recompute_ = 0;
  std::size_t recompute_period_ = kDefaultRecomputePeriod;
};

}  // namespace autoalpha
