#include "autoalpha/ctree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace autoalpha::ctree {

namespace {

// Relative tolerance under which two split statistics count as tied.
constexpr double kTieTolerance = 1e-10;

bool negligible_variance(double variance, double mean) {
  return variance <= 1e-20 * std::max(1.0, mean * mean);
}

// log of the two-sided normal tail 2 * (1 - Phi(|z|)).
double log_normal_two_sided(double z) {
  const double p = std::erfc(std::abs(z) / std::sqrt(2.0));
  if (p > 1e-300) return std::log(p);
  const double u = std::abs(z) / std::sqrt(2.0);
  const double u2 = u * u;
  return -u2 - std::log(u * std::sqrt(M_PI)) + std::log1p(-1.0 / (2.0 * u2) + 3.0 / (4.0 * u2 * u2));
}

// log of the chi-square upper tail with `df` degrees of freedom.
double log_chi_square_upper(double stat, double df) {
  const double a = 0.5 * df;
  const double x = 0.5 * stat;
  if (x <= 0.0) return 0.0;
  const double q = boost::math::gamma_q(a, x);
  if (q > 1e-300) return std::log(q);
  return (a - 1.0) * std::log(x) - x - std::lgamma(a) + std::log1p((a - 1.0) / x);
}

struct Moments {
  double total = 0.0;  // n_w
  double mean = 0.0;
  double variance = 0.0;  // population form, sum w (y - mean)^2 / n_w
};

Moments response_moments(const LearningSample& s, std::span<const int> w,
                         std::span<const std::size_t> rows) {
  Moments m;
  double sum = 0.0;
  for (auto i : rows) {
    m.total += w[i];
    sum += w[i] * s.response[i];
  }
  if (m.total <= 0.0) return m;
  m.mean = sum / m.total;
  double ss = 0.0;
  for (auto i : rows) {
    const double d = s.response[i] - m.mean;
    ss += w[i] * d * d;
  }
  m.variance = ss / m.total;
  return m;
}

std::vector<std::size_t> positive_rows(std::span<const int> weights) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0) throw std::invalid_argument("ctree: negative case weight");
    if (weights[i] > 0) rows.push_back(i);
  }
  return rows;
}

void check_weights(const LearningSample& s, std::span<const int> weights) {
  if (weights.size() != s.rows()) throw std::invalid_argument("ctree: weight vector length mismatch");
}

Association associate_rows(const LearningSample& s, std::span<const int> w,
                           std::span<const std::size_t> rows,
                           std::size_t j, const Moments& y) {
  Association out;
  if (y.total < 2.0 || negligible_variance(y.variance, y.mean)) return out;

  const auto x = s.covariates.col(static_cast<Eigen::Index>(j));
  if (s.kinds[j] == CovariateKind::numeric) {
    double sx = 0.0;
    for (auto i : rows) sx += w[i] * x[i];
    const double xbar = sx / y.total;
    double sxx = 0.0;
    double sxy = 0.0;
    for (auto i : rows) {
      const double dx = x[i] - xbar;
      sxx += w[i] * dx * dx;
      sxy += w[i] * dx * (s.response[i] - y.mean);
    }
    if (negligible_variance(sxx / y.total, xbar)) return out;
    // T - E[T] = sum w (x - xbar)(y - ybar); Var[T] = V_h * n_w * Sxx / (n_w - 1).
    const double var_t = y.variance * y.total * sxx / (y.total - 1.0);
    const double z = sxy / std::sqrt(var_t);
    out.statistic = z;
    out.log_p_value = log_normal_two_sided(z);
    out.p_value = std::exp(out.log_p_value);
    return out;
  }

  // Categorical: quadratic form (n_w - 1) * SS_between / SS_total, chi-square
  // with (levels - 1) degrees of freedom.
  std::vector<std::pair<double, std::pair<double, double>>> levels;  // code -> (weight, sum y)
  {
    std::vector<std::size_t> order(rows.begin(), rows.end());
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    for (auto i : order) {
      if (levels.empty() || levels.back().first != x[i]) levels.push_back({x[i], {0.0, 0.0}});
      levels.back().second.first += w[i];
      levels.back().second.second += w[i] * s.response[i];
    }
  }
  if (levels.size() < 2) return out;
  double ssb = 0.0;
  for (const auto& [code, ws] : levels) {
    const double d = ws.second / ws.first - y.mean;
    ssb += ws.first * d * d;
  }
  const double sst = y.variance * y.total;
  const double q = (y.total - 1.0) * ssb / sst;
  out.statistic = q;
  out.log_p_value = log_chi_square_upper(q, static_cast<double>(levels.size() - 1));
  out.p_value = std::exp(out.log_p_value);
  return out;
}

std::optional<std::size_t> select_rows(const LearningSample& s, std::span<const int> w,
                                       std::span<const std::size_t> rows,
                                       const Moments& y, const CTreeConfig& config) {
  const std::size_t m = s.covariate_count();
  if (m == 0) return std::nullopt;
  const double log_m = std::log(static_cast<double>(m));
  std::size_t best = 0;
  double best_log_adj = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    const Association a = associate_rows(s, w, rows, j, y);
    const double log_adj = std::min(0.0, log_m + a.log_p_value);
    if (log_adj < best_log_adj) {
      best_log_adj = log_adj;
      best = j;
    }
  }
  if (best_log_adj > std::log(config.significance)) return std::nullopt;
  return best;
}

// |standardized statistic| of sending (left_weight, left_sum) left.
double two_sample_statistic(double left_weight, double left_sum, const Moments& y) {
  const double right_weight = y.total - left_weight;
  if (left_weight <= 0.0 || right_weight <= 0.0 || y.total < 2.0) return 0.0;
  const double centered = left_sum - left_weight * y.mean;
  const double var_t = y.variance * left_weight * right_weight / (y.total - 1.0);
  if (var_t <= 0.0) return 0.0;
  return std::abs(centered) / std::sqrt(var_t);
}

bool improves(double candidate, double best) {
  return candidate > best + kTieTolerance * std::abs(best);
}

std::optional<Split> split_rows(const LearningSample& s, std::span<const int> w,
                                std::span<const std::size_t> rows,
                                std::size_t j, const Moments& y, const CTreeConfig& config) {
  const auto x = s.covariates.col(static_cast<Eigen::Index>(j));
  const double min_leaf = config.min_leaf_weight;

  // Per distinct value (sorted): weight and weighted response sum.
  struct Group {
    double value;
    double weight;
    double sum;
  };
  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<Group> groups;
  for (auto i : order) {
    if (groups.empty() || groups.back().value != x[i]) groups.push_back({x[i], 0.0, 0.0});
    groups.back().weight += w[i];
    groups.back().sum += w[i] * s.response[i];
  }
  if (groups.size() < 2) return std::nullopt;

  std::optional<Split> best;
  auto consider = [&](double lw, double ls, auto&& make) {
    if (lw < min_leaf || y.total - lw < min_leaf) return;
    const double stat = two_sample_statistic(lw, ls, y);
    if (!best || improves(stat, best->statistic)) {
      best = make();
      best->statistic = stat;
    }
  };

  if (s.kinds[j] == CovariateKind::numeric) {
    double lw = 0.0;
    double ls = 0.0;
    for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
      lw += groups[g].weight;
      ls += groups[g].sum;
      consider(lw, ls, [&] {
        Split sp;
        sp.covariate = j;
        sp.kind = CovariateKind::numeric;
        const double a = groups[g].value;
        const double b = groups[g + 1].value;
        double mid = a + 0.5 * (b - a);
        if (!(mid < b)) mid = a;
        sp.threshold = mid;
        return sp;
      });
    }
    return best;
  }

  const std::size_t levels = groups.size();
  if (static_cast<int>(levels) <= config.categorical_exhaustive_limit) {
    // Bipartitions with the last level always on the right: 2^(L-1) - 1.
    const std::size_t masks = (std::size_t{1} << (levels - 1));
    for (std::size_t mask = 1; mask < masks; ++mask) {
      double lw = 0.0;
      double ls = 0.0;
      for (std::size_t l = 0; l + 1 < levels; ++l) {
        if (mask & (std::size_t{1} << l)) {
          lw += groups[l].weight;
          ls += groups[l].sum;
        }
      }
      consider(lw, ls, [&] {
        Split sp;
        sp.covariate = j;
        sp.kind = CovariateKind::categorical;
        for (std::size_t l = 0; l + 1 < levels; ++l) {
          if (mask & (std::size_t{1} << l)) sp.left_levels.push_back(groups[l].value);
        }
        return sp;
      });
    }
    return best;
  }

  // Many levels: order by mean response, then scan prefixes of that order.
  std::vector<std::size_t> by_mean(levels);
  std::iota(by_mean.begin(), by_mean.end(), std::size_t{0});
  std::stable_sort(by_mean.begin(), by_mean.end(), [&](auto a, auto b) {
    return groups[a].sum / groups[a].weight < groups[b].sum / groups[b].weight;
  });
  double lw = 0.0;
  double ls = 0.0;
  for (std::size_t k = 0; k + 1 < levels; ++k) {
    lw += groups[by_mean[k]].weight;
    ls += groups[by_mean[k]].sum;
    consider(lw, ls, [&] {
      Split sp;
      sp.covariate = j;
      sp.kind = CovariateKind::categorical;
      for (std::size_t q = 0; q <= k; ++q) sp.left_levels.push_back(groups[by_mean[q]].value);
      std::sort(sp.left_levels.begin(), sp.left_levels.end());
      return sp;
    });
  }
  return best;
}

}  // namespace

LearningSample LearningSample::numeric(Eigen::MatrixXd covariates, Eigen::VectorXd response) {
  LearningSample s;
  const auto n = static_cast<std::size_t>(response.size());
  s.kinds.assign(static_cast<std::size_t>(covariates.cols()), CovariateKind::numeric);
  s.covariates = std::move(covariates);
  s.response = std::move(response);
  s.weights.assign(n, 1);
  return s;
}

void LearningSample::validate() const {
  if (response.size() == 0) throw std::invalid_argument("ctree: empty learning sample");
  if (covariates.rows() != response.size()) throw std::invalid_argument("ctree: covariate rows != responses");
  if (weights.size() != rows()) throw std::invalid_argument("ctree: weight count != rows");
  if (kinds.size() != covariate_count()) throw std::invalid_argument("ctree: kind count != covariates");
  bool any_positive = false;
  for (int w : weights) {
    if (w < 0) throw std::invalid_argument("ctree: negative case weight");
    any_positive |= w > 0;
  }
  if (!any_positive) throw std::invalid_argument("ctree: no positive case weight");
}

void CTreeConfig::validate() const {
  if (!(significance > 0.0 && significance < 1.0)) throw std::invalid_argument("ctree: significance must lie in (0, 1)");
  if (min_leaf_weight < 1) throw std::invalid_argument("ctree: min_leaf_weight must be >= 1");
  if (max_depth < 0) throw std::invalid_argument("ctree: max_depth must be >= 0");
  if (categorical_exhaustive_limit < 2 || categorical_exhaustive_limit > 30) {
    throw std::invalid_argument("ctree: categorical_exhaustive_limit must lie in [2, 30]");
  }
}

Association associate(const LearningSample& sample, std::span<const int> weights, std::size_t j) {
  check_weights(sample, weights);
  if (j >= sample.covariate_count()) throw std::invalid_argument("ctree: covariate index out of range");
  const auto rows = positive_rows(weights);
  return associate_rows(sample, weights, rows, j, response_moments(sample, weights, rows));
}

std::optional<std::size_t> select_covariate(const LearningSample& sample,
                                            std::span<const int> weights,
                                            const CTreeConfig& config) {
  check_weights(sample, weights);
  config.validate();
  const auto rows = positive_rows(weights);
  return select_rows(sample, weights, rows, response_moments(sample, weights, rows), config);
}

std::optional<Split> best_split(const LearningSample& sample, std::span<const int> weights,
                                std::size_t j, const CTreeConfig& config) {
  check_weights(sample, weights);
  config.validate();
  if (j >= sample.covariate_count()) throw std::invalid_argument("ctree: covariate index out of range");
  const auto rows = positive_rows(weights);
  return split_rows(sample, weights, rows, j, response_moments(sample, weights, rows), config);
}

bool Split::goes_left(double value) const {
  if (kind == CovariateKind::numeric) return value <= threshold;
  return std::binary_search(left_levels.begin(), left_levels.end(), value);
}

Tree::Tree(std::vector<Node> nodes, std::size_t covariate_count)
    : nodes_(std::move(nodes)), covariate_count_(covariate_count) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.is_leaf) continue;
    if (n.left <= i || n.right <= i || n.left >= nodes_.size() || n.right >= nodes_.size() ||
        n.split.covariate >= covariate_count_) {
      throw std::invalid_argument("ctree: malformed node " + std::to_string(i));
    }
  }
}

std::size_t Tree::route(std::span<const double> covariates) const {
  if (nodes_.empty()) throw std::logic_error("ctree: predict on an empty tree");
  if (covariates.size() != covariate_count_) throw std::invalid_argument("ctree: covariate length mismatch");
  std::size_t at = 0;
  while (!nodes_[at].is_leaf) {
    const Node& n = nodes_[at];
    at = n.split.goes_left(covariates[n.split.covariate]) ? n.left : n.right;
  }
  return at;
}

double Tree::predict(std::span<const double> covariates) const {
  return nodes_[route(covariates)].prediction;
}

double Tree::predict(const Eigen::VectorXd& covariates) const {
  return predict(std::span<const double>(covariates.data(), static_cast<std::size_t>(covariates.size())));
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf; }));
}

int Tree::depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::string Tree::dump() const {
  std::ostringstream out;
  out.precision(10);
  std::function<void(std::size_t)> walk = [&](std::size_t i) {
    const Node& n = nodes_[i];
    out << std::string(static_cast<std::size_t>(2 * n.depth), ' ');
    if (n.is_leaf) {
      out << "leaf weight=" << n.weight_total << " prediction=" << n.prediction << '\n';
      return;
    }
    out << "split x[" << n.split.covariate << "] ";
    if (n.split.kind == CovariateKind::numeric) {
      out << "<= " << n.split.threshold;
    } else {
      out << "in {";
      for (std::size_t k = 0; k < n.split.left_levels.size(); ++k) {
        out << (k ? "," : "") << n.split.left_levels[k];
      }
      out << "}";
    }
    out << " weight=" << n.weight_total << " prediction=" << n.prediction << '\n';
    walk(n.left);
    walk(n.right);
  };
  if (!nodes_.empty()) walk(0);
  return out.str();
}

Tree fit(const LearningSample& sample, const CTreeConfig& config) {
  sample.validate();
  config.validate();

  const std::span<const int> w(sample.weights);
  std::vector<Node> nodes;
  std::function<std::size_t(std::vector<std::size_t>, int)> grow =
      [&](std::vector<std::size_t> rows, int depth) -> std::size_t {
    const Moments y = response_moments(sample, w, rows);
    const std::size_t id = nodes.size();
    nodes.push_back(Node{});
    nodes[id].prediction = y.mean;
    nodes[id].weight_total = static_cast<long>(y.total);
    nodes[id].depth = depth;

    if (depth >= config.max_depth || y.total < 2.0 * config.min_leaf_weight) return id;
    const auto chosen = select_rows(sample, w, rows, y, config);
    if (!chosen) return id;
    auto split = split_rows(sample, w, rows, *chosen, y, config);
    if (!split) return id;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    const auto col = sample.covariates.col(static_cast<Eigen::Index>(split->covariate));
    for (auto i : rows) (split->goes_left(col[i]) ? left_rows : right_rows).push_back(i);

    nodes[id].is_leaf = false;
    nodes[id].split = std::move(*split);
    const std::size_t left = grow(std::move(left_rows), depth + 1);
    const std::size_t right = grow(std::move(right_rows), depth + 1);
    nodes[id].left = left;
    nodes[id].right = right;
    return id;
  };

  grow(positive_rows(sample.weights), 0);
  return Tree(std::move(nodes), sample.covariate_count());
}

}  // namespace autoalpha::ctree
