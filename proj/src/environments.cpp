#include "autoalpha/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace autoalpha {

namespace {

void check_arm(ArmId arm, std::size_t k) {
  if (arm.index >= k) {
    throw std::invalid_argument("environment: arm " + std::to_string(arm.index) + " outside [0, " +
                                std::to_string(k) + ")");
  }
}

}  // namespace

ReplayEnv::ReplayEnv(std::shared_ptr<const LabeledRows> rows) : rows_(std::move(rows)) {
  if (!rows_) throw std::invalid_argument("ReplayEnv: null dataset");
  order_.resize(rows_->size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

ReplayEnv::ReplayEnv(std::shared_ptr<const LabeledRows> rows, std::uint64_t shuffle_seed)
    : ReplayEnv(std::move(rows)) {
  std::mt19937_64 rng(shuffle_seed);
  // Fisher-Yates with an explicit draw so the order is identical across standard libraries.
  for (std::size_t i = order_.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order_[i - 1], order_[j]);
  }
}

Eigen::Index ReplayEnv::dim() const { return rows_->empty() ? 0 : rows_->front().context.size(); }

const Context& ReplayEnv::current_context() const {
  if (exhausted()) throw EndOfStream();
  return (*rows_)[order_[cursor_]].context;
}

int ReplayEnv::current_label() const {
  if (exhausted()) throw EndOfStream();
  return (*rows_)[order_[cursor_]].label;
}

StepResult ReplayEnv::step(ArmId arm) {
  if (exhausted()) throw EndOfStream();
  check_arm(arm, num_arms());
  StepResult out;
  out.reward = static_cast<int>(arm.index) == current_label() ? 1.0 : 0.0;
  out.optimal_reward = 1.0;
  ++cursor_;
  if (!exhausted()) out.next_context = current_context();
  return out;
}

SwitchingReplayEnv::SwitchingReplayEnv(ReplayEnv base, std::int64_t period)
    : base_(std::move(base)), period_(period) {
  if (period < 1) throw std::invalid_argument("SwitchingReplayEnv: switch period must be >= 1");
}

bool SwitchingReplayEnv::inverted() const {
  return (static_cast<std::int64_t>(base_.round_index()) / period_) % 2 == 1;
}

int SwitchingReplayEnv::current_label() const {
  const int label = base_.current_label();
  return inverted() ? 1 - label : label;
}

StepResult SwitchingReplayEnv::step(ArmId arm) {
  if (exhausted()) throw EndOfStream();
  check_arm(arm, num_arms());
  const int paying = current_label();
  StepResult out = base_.step(arm);
  out.reward = static_cast<int>(arm.index) == paying ? 1.0 : 0.0;
  out.optimal_reward = 1.0;
  return out;
}

SwitchingReplayEnv make_switching(ReplayEnv base, std::int64_t period) {
  return SwitchingReplayEnv(std::move(base), period);
}

Context SyntheticLinearEnv::sample_context(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Context x(dim);
  for (Eigen::Index i = 0; i < dim; ++i) x[i] = normal(rng);
  const double norm = x.norm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double radius = std::pow(unit(rng), 1.0 / static_cast<double>(dim));
  if (norm > 0.0) x *= radius / norm;
  return x;
}

SyntheticLinearEnv::SyntheticLinearEnv(Eigen::Index dim, std::size_t num_arms, std::uint64_t seed,
                                       std::optional<std::size_t> horizon)
    : dim_(dim), rng_(seed), horizon_(horizon) {
  if (dim < 1) throw std::invalid_argument("SyntheticLinearEnv: dim must be >= 1");
  if (num_arms < 2) throw std::invalid_argument("SyntheticLinearEnv: need at least two arms");
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < num_arms; ++k) {
    Eigen::VectorXd mu(dim);
    do {
      for (Eigen::Index i = 0; i < dim; ++i) mu[i] = normal(rng_);
    } while (mu.norm() == 0.0);
    weights_.push_back(mu / mu.norm());
  }
  draw_context();
}

SyntheticLinearEnv::SyntheticLinearEnv(std::vector<Eigen::VectorXd> weights, std::uint64_t seed,
                                       std::optional<std::size_t> horizon)
    : weights_(std::move(weights)), rng_(seed), horizon_(horizon) {
  if (weights_.size() < 2) throw std::invalid_argument("SyntheticLinearEnv: need at least two arms");
  dim_ = weights_.front().size();
  if (dim_ < 1) throw std::invalid_argument("SyntheticLinearEnv: dim must be >= 1");
  for (const auto& w : weights_) {
    if (w.size() != dim_) throw std::invalid_argument("SyntheticLinearEnv: arm weights differ in length");
  }
  draw_context();
}

void SyntheticLinearEnv::draw_context() { context_ = sample_context(dim_, rng_); }

const Context& SyntheticLinearEnv::current_context() const {
  if (exhausted()) throw EndOfStream();
  return context_;
}

double SyntheticLinearEnv::success_probability(ArmId arm, const Context& x) const {
  check_arm(arm, num_arms());
  return std::clamp(weights_[arm.index].dot(x), 0.0, 1.0);
}

StepResult SyntheticLinearEnv::step(ArmId arm) {
  if (exhausted()) throw EndOfStream();
  check_arm(arm, num_arms());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng_);
  StepResult out;
  double best = 0.0;
  for (std::size_t k = 0; k < num_arms(); ++k) {
    const double r = u < success_probability(ArmId{k}, context_) ? 1.0 : 0.0;
    best = std::max(best, r);
    if (k == arm.index) out.reward = r;
  }
  out.optimal_reward = best;
  ++round_;
  if (!exhausted()) {
    draw_context();
    out.next_context = context_;
  }
  return out;
}

SyntheticLinearEnv make_synthetic(Eigen::Index dim, std::size_t num_arms, std::uint64_t seed,
                                  std::optional<std::size_t> horizon) {
  return SyntheticLinearEnv(dim, num_arms, seed, horizon);
}

}  // namespace autoalpha
