#include "autoalpha/alpha_posterior.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "autoalpha/bandit_core.hpp"

namespace autoalpha {

AlphaGrid::AlphaGrid(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("AlphaGrid: empty grid");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] <= 0.0) {
      throw std::invalid_argument("AlphaGrid: values must be finite and > 0");
    }
    if (i > 0 && !(values_[i] > values_[i - 1])) {
      throw std::invalid_argument("AlphaGrid: values must be strictly increasing");
    }
  }
}

AlphaGrid AlphaGrid::from_range(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) {
    throw std::invalid_argument("AlphaGrid: need step > 0 and stop >= start");
  }
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> values;
  values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Round to 12 decimals so 0.01 + 2*0.01 prints as 0.03.
    values.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return AlphaGrid(std::move(values));
}

AlphaGrid AlphaGrid::parse(const std::string& spec) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t colon = spec.find(':', pos);
    const std::string piece = spec.substr(pos, colon == std::string::npos ? std::string::npos : colon - pos);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(piece, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("AlphaGrid: cannot parse '" + spec + "'");
    }
    if (used != piece.size()) throw std::invalid_argument("AlphaGrid: cannot parse '" + spec + "'");
    parts.push_back(v);
    if (colon == std::string::npos) break;
    pos = colon + 1;
  }
  if (parts.size() == 1) return AlphaGrid({parts[0]});
  if (parts.size() == 3) return from_range(parts[0], parts[1], parts[2]);
  throw std::invalid_argument("AlphaGrid: expected start:stop:step, got '" + spec + "'");
}

AlphaGrid AlphaGrid::standard() { return from_range(0.01, 1.0, 0.01); }

double sample_beta(double a, double b, Rng& rng) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  double theta = (x + y > 0.0) ? x / (x + y) : 0.5;
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  if (theta < lo) theta = lo;
  if (theta > hi) theta = hi;
  return theta;
}

AlphaPosterior::AlphaPosterior(AlphaGrid grid, double prior_success, double prior_failure)
    : grid_(std::move(grid)),
      prior_success_(grid_.size(), prior_success),
      prior_failure_(grid_.size(), prior_failure),
      pulls_(grid_.size(), 0),
      reward_sum_(grid_.size(), 0.0) {
  if (!(prior_success > 0.0) || !(prior_failure > 0.0)) {
    throw std::invalid_argument("AlphaPosterior: Beta priors must be positive");
  }
}

double AlphaPosterior::posterior_mean(std::size_t i) const {
  const double s = success_param(i);
  return s / (s + failure_param(i));
}

std::size_t AlphaPosterior::total_pulls() const {
  return std::accumulate(pulls_.begin(), pulls_.end(), std::size_t{0});
}

double AlphaPosterior::total_reward() const {
  return std::accumulate(reward_sum_.begin(), reward_sum_.end(), 0.0);
}

AlphaChoice AlphaPosterior::sample_select(Rng& rng) const {
  std::vector<double> theta(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const double s = success_param(i);
    const double f = failure_param(i);
    if (!(s > 0.0) || !(f > 0.0)) {
      throw InvalidStateError("AlphaPosterior: non-positive Beta parameter at candidate " +
                              std::to_string(i));
    }
    theta[i] = sample_beta(s, f, rng);
  }
  const std::size_t best = argmax_tiebreak(theta);
  return {best, grid_[best]};
}

void AlphaPosterior::update(std::size_t index, double reward) {
  if (index >= size()) throw std::invalid_argument("AlphaPosterior: candidate index out of range");
  if (reward != 0.0 && reward != 1.0) {
    throw std::invalid_argument("AlphaPosterior: reward must be 0 or 1");
  }
  ++pulls_[index];
  reward_sum_[index] += reward;
}

void AlphaPosterior::update_fractional(std::size_t index, double reward, Rng& rng) {
  if (!(reward >= 0.0 && reward <= 1.0)) {
    throw std::invalid_argument("AlphaPosterior: fractional reward must lie in [0, 1]");
  }
  std::bernoulli_distribution trial(reward);
  update(index, trial(rng) ? 1.0 : 0.0);
}

void AlphaPosterior::restore_counts(std::vector<std::size_t> pulls,
                                    std::vector<double> reward_sum) {
  if (pulls.size() != size() || reward_sum.size() != size()) {
    throw std::invalid_argument("AlphaPosterior: snapshot size mismatch");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    if (reward_sum[i] < 0.0 || reward_sum[i] > static_cast<double>(pulls[i])) {
      throw InvalidStateError("AlphaPosterior: snapshot violates 0 <= rf <= n");
    }
  }
  pulls_ = std::move(pulls);
  reward_sum_ = std::move(reward_sum);
}

}  // namespace autoalpha
