#include "autoalpha/linalg.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

namespace autoalpha {

SpdMatrix SpdMatrix::identity(Eigen::Index dim, std::size_t recompute_period) {
  if (dim <= 0) throw std::invalid_argument("SpdMatrix: dimension must be positive");
  if (recompute_period == 0) throw std::invalid_argument("SpdMatrix: recompute period must be positive");
  SpdMatrix m;
  m.entries_ = Eigen::MatrixXd::Identity(dim, dim);
  m.inverse_ = Eigen::MatrixXd::Identity(dim, dim);
  m.recompute_period_ = recompute_period;
  return m;
}

SpdMatrix SpdMatrix::from_parts(Eigen::MatrixXd entries, Eigen::MatrixXd inverse,
                                std::size_t updates_since_recompute,
                                std::size_t recompute_period) {
  if (entries.rows() == 0 || entries.rows() != entries.cols() ||
      inverse.rows() != entries.rows() || inverse.cols() != entries.cols()) {
    throw std::invalid_argument("SpdMatrix: inconsistent shapes");
  }
  if (recompute_period == 0) throw std::invalid_argument("SpdMatrix: recompute period must be positive");
  SpdMatrix m;
  m.entries_ = std::move(entries);
  m.inverse_ = std::move(inverse);
  m.updates_since_recompute_ = updates_since_recompute;
  m.recompute_period_ = recompute_period;
  return m;
}

void SpdMatrix::check_dim(const Eigen::VectorXd& v, const char* op) const {
  if (v.size() != dim()) {
    throw std::invalid_argument(std::string("SpdMatrix::") + op + ": expected length " +
                                std::to_string(dim()) + ", got " + std::to_string(v.size()));
  }
}

void SpdMatrix::rank_one_update(const Eigen::VectorXd& x) {
  check_dim(x, "rank_one_update");
  entries_.noalias() += x * x.transpose();

  if (++updates_since_recompute_ >= recompute_period_) {
    recompute_inverse();
    return;
  }
  const Eigen::VectorXd u = inverse_ * x;
  const double denom = 1.0 + x.dot(u);
  inverse_.noalias() -= (u / denom) * u.transpose();
  inverse_ = 0.5 * (inverse_ + inverse_.transpose()).eval();
}

double SpdMatrix::quad_form_inverse(const Eigen::VectorXd& x) const {
  check_dim(x, "quad_form_inverse");
  return std::max(0.0, x.dot(inverse_ * x));
}

Eigen::VectorXd SpdMatrix::solve(const Eigen::VectorXd& b) const {
  check_dim(b, "solve");
  return inverse_ * b;
}

void SpdMatrix::recompute_inverse() {
  Eigen::LLT<Eigen::MatrixXd> llt(entries_);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("SpdMatrix: matrix lost positive definiteness");
  }
  inverse_ = llt.solve(Eigen::MatrixXd::Identity(dim(), dim()));
  inverse_ = 0.5 * (inverse_ + inverse_.transpose()).eval();
  updates_since_recompute_ = 0;
}

bool SpdMatrix::cholesky_succeeds() const {
  Eigen::LLT<Eigen::MatrixXd> llt(entries_);
  return llt.info() == Eigen::Success;
}

}  // namespace autoalpha
