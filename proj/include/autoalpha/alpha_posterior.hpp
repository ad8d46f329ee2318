#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

namespace autoalpha {

using Rng = std::mt19937_64;

// Sorted, strictly increasing candidate exploration values, each > 0.
class AlphaGrid {
 public:
  explicit AlphaGrid(std::vector<double> values);

  // start:stop:step, inclusive of stop when it lies on the lattice.
  static AlphaGrid from_range(double start, double stop, double step);
  // Parses "start:stop:step" or a single value.
  static AlphaGrid parse(const std::string& spec);
  // 0.01 .. 1.00 in steps of 0.01.
  static AlphaGrid standard();

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_.at(i); }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

// Draws Beta(a, b) as X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b). Each
// call constructs its own distributions, so the draw depends only on the
// engine state. The result is kept strictly inside (0, 1).
double sample_beta(double a, double b, Rng& rng);

enum class FractionalRewards { reject, bernoulli };

struct AlphaChoice {
  std::size_t index = 0;
  double alpha = 0.0;
};

// Beta-Bernoulli Thompson sampling over an AlphaGrid. Candidate i has
// posterior Beta(S0 + rf_i, F0 + n_i - rf_i).
class AlphaPosterior {
 public:
  AlphaPosterior(AlphaGrid grid, double prior_success = 1.0, double prior_failure = 1.0);

  const AlphaGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return grid_.size(); }

  double success_param(std::size_t i) const { return prior_success_[i] + reward_sum_[i]; }
  double failure_param(std::size_t i) const {
    return prior_failure_[i] + static_cast<double>(pulls_[i]) - reward_sum_[i];
  }
  double posterior_mean(std::size_t i) const;

  std::size_t pulls(std::size_t i) const { return pulls_.at(i); }
  double reward_sum(std::size_t i) const { return reward_sum_.at(i); }
  std::size_t total_pulls() const;
  double total_reward() const;

  // One Beta draw per candidate, in index order; argmax with lowest-index ties.
  // Throws InvalidStateError if any parameter is not positive.
  AlphaChoice sample_select(Rng& rng) const;

  // n_i += 1, rf_i += r. Requires r in {0, 1}.
  void update(std::size_t index, double reward);
  // Bernoulli trick: a fractional reward r becomes a success with probability r.
  void update_fractional(std::size_t index, double reward, Rng& rng);

  // Restores counts from a snapshot.
  void restore_counts(std::vector<std::size_t> pulls, std::vector<double> reward_sum);
  const std::vector<std::size_t>& all_pulls() const noexcept { return pulls_; }
  const std::vector<double>& all_reward_sums() const noexcept { return reward_sum_; }
  double prior_success(std::size_t i) const { return prior_success_.at(i); }
  double prior_failure(std::size_t i) const { return prior_failure_.at(i); }

 private:
  AlphaGrid grid_;
  std::vector<double> prior_success_;
  std::vector<double> prior_failure_;
  std::vector<std::size_t> pulls_;
  std::vector<double> reward_sum_;
};

}  // namespace autoalpha
