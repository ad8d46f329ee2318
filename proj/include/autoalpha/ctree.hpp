#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace autoalpha::ctree {

enum class CovariateKind { numeric, categorical };

// n rows of (covariates, response, case weight). Categorical covariates hold
// integer level codes stored as doubles.
struct LearningSample {
  Eigen::MatrixXd covariates;  // n x m
  Eigen::VectorXd response;    // n
  std::vector<int> weights;    // n, non-negative
  std::vector<CovariateKind> kinds;  // m

  // All-numeric sample with unit weights.
  static LearningSample numeric(Eigen::MatrixXd covariates, Eigen::VectorXd response);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(response.size()); }
  std::size_t covariate_count() const noexcept { return static_cast<std::size_t>(covariates.cols()); }

  // Throws std::invalid_argument on shape mismatch, negative weights or no positive weight.
  void validate() const;
};

struct CTreeConfig {
  double significance = 0.05;
  int min_leaf_weight = 20;
  int max_depth = 10;
  int categorical_exhaustive_limit = 10;

  void validate() const;
};

struct Association {
  double statistic = 0.0;  // standardized (numeric) or quadratic (categorical)
  double p_value = 1.0;
  double log_p_value = 0.0;  // natural log, finite even when p_value underflows
};

// Independence test between covariate j and the response under the
// permutation null, restricted to rows with positive weight.
Association associate(const LearningSample& sample, std::span<const int> weights, std::size_t j);

// Index of the covariate with the smallest Bonferroni-adjusted p-value, or
// nullopt when that value exceeds the significance level.
std::optional<std::size_t> select_covariate(const LearningSample& sample,
                                            std::span<const int> weights,
                                            const CTreeConfig& config);

struct Split {
  std::size_t covariate = 0;
  CovariateKind kind = CovariateKind::numeric;
  double threshold = 0.0;        // numeric: value <= threshold goes left
  std::vector<double> left_levels;  // categorical: sorted level codes sent left
  double statistic = 0.0;        // |standardized two-sample statistic|

  bool goes_left(double value) const;
};

// Best binary partition of covariate j, or nullopt when no candidate leaves
// at least min_leaf_weight on both sides.
std::optional<Split> best_split(const LearningSample& sample, std::span<const int> weights,
                                std::size_t j, const CTreeConfig& config);

struct Node {
  bool is_leaf = true;
  double prediction = 0.0;   // weighted mean response of the node
  long weight_total = 0;
  Split split;               // meaningful when !is_leaf
  std::size_t left = 0;
  std::size_t right = 0;
  int depth = 0;
};

class Tree {
 public:
  Tree() = default;
  // Validates child indices; node 0 is the root.
  explicit Tree(std::vector<Node> nodes, std::size_t covariate_count);

  double predict(std::span<const double> covariates) const;
  double predict(const Eigen::VectorXd& covariates) const;
  // Index of the leaf reached by `covariates`.
  std::size_t route(std::span<const double> covariates) const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t covariate_count() const noexcept { return covariate_count_; }
  std::size_t leaf_count() const;
  int depth() const;
  bool empty() const noexcept { return nodes_.empty(); }

  // One node per line, indented by depth.
  std::string dump() const;

 private:
  std::vector<Node> nodes_;
  std::size_t covariate_count_ = 0;
};

// Recursive partitioning with Bonferroni-corrected stopping. Throws
// std::invalid_argument on an empty or invalid sample.
Tree fit(const LearningSample& sample, const CTreeConfig& config);

}  // namespace autoalpha::ctree
