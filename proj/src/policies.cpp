#include "autoalpha/policies.hpp"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace autoalpha {

using nlohmann::json;

namespace {

constexpr int kSnapshotVersion = 1;
constexpr const char* kSnapshotFormat = "autoalpha-policy";

Rng make_engine(std::uint64_t seed, std::uint64_t stream) { return Rng(derive_seed({seed, stream})); }

std::string engine_state(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

Rng engine_from_state(const std::string& state) {
  Rng rng;
  std::istringstream in(state);
  in >> rng;
  if (!in) throw std::invalid_argument("snapshot: corrupt engine state");
  return rng;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto flat = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols) throw std::invalid_argument("snapshot: matrix size mismatch");
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[k++];
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

const char* tie_break_name(TieBreak t) { return t == TieBreak::lowest_index ? "lowest-index" : "seeded-random"; }

TieBreak tie_break_from(const std::string& s) {
  if (s == "lowest-index") return TieBreak::lowest_index;
  if (s == "seeded-random") return TieBreak::seeded_random;
  throw std::invalid_argument("snapshot: unknown tie-break '" + s + "'");
}

json tree_to_json(const ctree::Tree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    json jn{{"leaf", n.is_leaf}, {"prediction", n.prediction}, {"weight", n.weight_total}, {"depth", n.depth}};
    if (!n.is_leaf) {
      jn["covariate"] = n.split.covariate;
      jn["categorical"] = n.split.kind == ctree::CovariateKind::categorical;
      jn["threshold"] = n.split.threshold;
      jn["left_levels"] = n.split.left_levels;
      jn["statistic"] = n.split.statistic;
      jn["left"] = n.left;
      jn["right"] = n.right;
    }
    nodes.push_back(std::move(jn));
  }
  return json{{"covariates", tree.covariate_count()}, {"nodes", std::move(nodes)}};
}

ctree::Tree tree_from_json(const json& j) {
  std::vector<ctree::Node> nodes;
  for (const auto& jn : j.at("nodes")) {
    ctree::Node n;
    n.is_leaf = jn.at("leaf").get<bool>();
    n.prediction = jn.at("prediction").get<double>();
    n.weight_total = jn.at("weight").get<long>();
    n.depth = jn.at("depth").get<int>();
    if (!n.is_leaf) {
      n.split.covariate = jn.at("covariate").get<std::size_t>();
      n.split.kind = jn.at("categorical").get<bool>() ? ctree::CovariateKind::categorical : ctree::CovariateKind::numeric;
      n.split.threshold = jn.at("threshold").get<double>();
      n.split.left_levels = jn.at("left_levels").get<std::vector<double>>();
      n.split.statistic = jn.at("statistic").get<double>();
      n.left = jn.at("left").get<std::size_t>();
      n.right = jn.at("right").get<std::size_t>();
    }
    nodes.push_back(std::move(n));
  }
  return ctree::Tree(std::move(nodes), j.at("covariates").get<std::size_t>());
}

}  // namespace

Policy::Policy(const PolicyOptions& options)
    : inner_(options.num_arms, options.dim, options.recompute_period),
      tie_break_(options.tie_break),
      meta_rng_(make_engine(options.seed, 1)),
      tie_rng_(make_engine(options.seed, 2)) {}

ArmId Policy::select_inner(const Context& x, double alpha) {
  const std::uint64_t seed = tie_break_ == TieBreak::seeded_random ? tie_rng_() : 0;
  return inner_.select_arm(x, alpha, tie_break_, seed);
}

FixedAlphaPolicy::FixedAlphaPolicy(const PolicyOptions& options, double alpha)
    : Policy(options), alpha_(alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("FixedAlphaPolicy: alpha must be non-negative");
}

Choice FixedAlphaPolicy::choose(const Context& x) { return Choice{select_inner(x, alpha_), alpha_, 0}; }

void FixedAlphaPolicy::learn(const Context& x, ArmId arm, double reward) {
  inner_.update(arm, x, reward);
  ++rounds_;
}

OplinucbPolicy::OplinucbPolicy(const PolicyOptions& options, AlphaGrid grid, const OplinucbOptions& meta)
    : Policy(options), posterior_(std::move(grid), meta.prior_success, meta.prior_failure), meta_(meta) {}

Choice OplinucbPolicy::choose(const Context& x) {
  if (pending_) throw InvalidStateError("OplinucbPolicy: choose called twice without learn");
  const AlphaChoice a = posterior_.sample_select(meta_rng_);
  const ArmId arm = select_inner(x, a.alpha);
  pending_ = a.index;
  return Choice{arm, a.alpha, a.index};
}

void OplinucbPolicy::learn(const Context& x, ArmId arm, double reward) {
  if (!pending_) throw InvalidStateError("OplinucbPolicy: learn called without a pending choice");
  if (meta_.fractional == FractionalRewards::bernoulli && reward != 0.0 && reward != 1.0) {
    posterior_.update_fractional(*pending_, reward, meta_rng_);
  } else {
    posterior_.update(*pending_, reward);
  }
  inner_.update(arm, x, reward);
  pending_.reset();
  ++rounds_;
}

DoplinucbPolicy::DoplinucbPolicy(const PolicyOptions& options, AlphaGrid grid, const DoplinucbOptions& meta)
    : Policy(options), grid_(std::move(grid)), meta_(meta) {
  meta_.tree.validate();
  if (meta_.window_size == 0) throw std::invalid_argument("DoplinucbPolicy: window_size must be >= 1");
  if (meta_.refit_period == 0) throw std::invalid_argument("DoplinucbPolicy: refit_period must be >= 1");
}

std::vector<double> DoplinucbPolicy::predict_all(const Context& x) const {
  if (!tree_) throw InvalidStateError("DoplinucbPolicy: no fitted tree");
  Eigen::VectorXd covariates(x.size() + 1);
  covariates.head(x.size()) = x;
  std::vector<double> predicted(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    covariates[x.size()] = grid_[i];
    predicted[i] = tree_->predict(covariates);
  }
  return predicted;
}

Choice DoplinucbPolicy::choose(const Context& x) {
  if (pending_) throw InvalidStateError("DoplinucbPolicy: choose called twice without learn");
  std::size_t index = 0;
  if (!tree_) {
    std::uniform_int_distribution<std::size_t> uniform(0, grid_.size() - 1);
    index = uniform(meta_rng_);
  } else {
    const auto predicted = predict_all(x);
    const std::uint64_t seed = tie_break_ == TieBreak::seeded_random ? meta_rng_() : 0;
    index = argmax_tiebreak(predicted, tie_break_, seed);
  }
  const double alpha = grid_[index];
  const ArmId arm = select_inner(x, alpha);
  pending_ = index;
  return Choice{arm, alpha, index};
}

void DoplinucbPolicy::learn(const Context& x, ArmId arm, double reward) {
  if (!pending_) throw InvalidStateError("DoplinucbPolicy: learn called without a pending choice");
  inner_.update(arm, x, reward);
  if (window_.size() == meta_.window_size) window_.pop_front();
  window_.push_back(TrainingRow{x, grid_[*pending_], reward});
  pending_.reset();
  ++rounds_;
  if (rounds_ >= meta_.warmup_rounds && (rounds_ - meta_.warmup_rounds) % meta_.refit_period == 0) {
    ctree_refit();
  }
}

bool DoplinucbPolicy::ctree_refit() {
  if (window_.size() < static_cast<std::size_t>(meta_.tree.min_leaf_weight) || window_.empty()) {
    ++skipped_refits_;
    if (notice_) {
      notice_("doplinucb: refit skipped at round " + std::to_string(rounds_) + " (" +
              std::to_string(window_.size()) + " rows < min_leaf_weight " +
              std::to_string(meta_.tree.min_leaf_weight) + ")");
    }
    return false;
  }
  const auto n = static_cast<Eigen::Index>(window_.size());
  const Eigen::Index d = inner_.dim();
  Eigen::MatrixXd covariates(n, d + 1);
  Eigen::VectorXd response(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = window_[static_cast<std::size_t>(i)];
    covariates.row(i).head(d) = row.context.transpose();
    covariates(i, d) = row.alpha;
    response[i] = row.reward;
  }
  tree_ = ctree::fit(ctree::LearningSample::numeric(std::move(covariates), std::move(response)), meta_.tree);
  ++refits_;
  return true;
}

// Snapshot encoding. Friend of every policy class.
struct PolicyCodec {
  static json encode_base(const Policy& p) {
    json arms = json::array();
    for (const auto& m : p.inner_.arms()) {
      arms.push_back(json{{"entries", matrix_to_json(m.gram.entries())},
                          {"inverse", matrix_to_json(m.gram.inverse())},
                          {"updates_since_recompute", m.gram.updates_since_recompute()},
                          {"response", vector_to_json(m.response)},
                          {"theta", vector_to_json(m.theta)}});
    }
    return json{{"format", kSnapshotFormat},
                {"version", kSnapshotVersion},
                {"kind", std::string(p.kind())},
                {"num_arms", p.inner_.num_arms()},
                {"dim", p.inner_.dim()},
                {"recompute_period", p.inner_.arms().front().gram.recompute_period()},
                {"tie_break", tie_break_name(p.tie_break_)},
                {"meta_rng", engine_state(p.meta_rng_)},
                {"tie_rng", engine_state(p.tie_rng_)},
                {"rounds", p.rounds_},
                {"arms", std::move(arms)}};
  }

  static void decode_base(Policy& p, const json& j) {
    auto& arms = p.inner_.arms_for_restore();
    const auto& jarms = j.at("arms");
    if (jarms.size() != arms.size()) throw std::invalid_argument("snapshot: arm count mismatch");
    const auto period = j.at("recompute_period").get<std::size_t>();
    for (std::size_t k = 0; k < arms.size(); ++k) {
      const auto& ja = jarms[k];
      arms[k].gram = SpdMatrix::from_parts(matrix_from_json(ja.at("entries")), matrix_from_json(ja.at("inverse")),
                                           ja.at("updates_since_recompute").get<std::size_t>(), period);
      arms[k].response = vector_from_json(ja.at("response"));
      arms[k].theta = vector_from_json(ja.at("theta"));
      if (arms[k].gram.dim() != p.inner_.dim() || arms[k].response.size() != p.inner_.dim() ||
          arms[k].theta.size() != p.inner_.dim()) {
        throw std::invalid_argument("snapshot: arm dimension mismatch");
      }
    }
    p.meta_rng_ = engine_from_state(j.at("meta_rng").get<std::string>());
    p.tie_rng_ = engine_from_state(j.at("tie_rng").get<std::string>());
    p.rounds_ = j.at("rounds").get<std::size_t>();
  }

  static json encode(const Policy& p) {
    json j = encode_base(p);
    if (const auto* f = dynamic_cast<const FixedAlphaPolicy*>(&p)) {
      j["alpha"] = f->alpha_;
    } else if (const auto* o = dynamic_cast<const OplinucbPolicy*>(&p)) {
      const auto& post = o->posterior_;
      j["grid"] = post.grid().values();
      j["prior_success"] = o->meta_.prior_success;
      j["prior_failure"] = o->meta_.prior_failure;
      j["fractional_rewards"] = o->meta_.fractional == FractionalRewards::bernoulli ? "bernoulli" : "reject";
      j["pulls"] = post.all_pulls();
      j["reward_sums"] = post.all_reward_sums();
      j["pending"] = o->pending_ ? json(*o->pending_) : json(nullptr);
    } else if (const auto* d = dynamic_cast<const DoplinucbPolicy*>(&p)) {
      j["grid"] = d->grid_.values();
      j["warmup_rounds"] = d->meta_.warmup_rounds;
      j["window_size"] = d->meta_.window_size;
      j["refit_period"] = d->meta_.refit_period;
      j["ctree"] = json{{"significance", d->meta_.tree.significance},
                        {"min_leaf_weight", d->meta_.tree.min_leaf_weight},
                        {"max_depth", d->meta_.tree.max_depth},
                        {"categorical_exhaustive_limit", d->meta_.tree.categorical_exhaustive_limit}};
      json window = json::array();
      for (const auto& row : d->window_) {
        window.push_back(json{{"x", vector_to_json(row.context)}, {"alpha", row.alpha}, {"reward", row.reward}});
      }
      j["window"] = std::move(window);
      j["tree"] = d->tree_ ? tree_to_json(*d->tree_) : json(nullptr);
      j["pending"] = d->pending_ ? json(*d->pending_) : json(nullptr);
      j["refits"] = d->refits_;
      j["skipped_refits"] = d->skipped_refits_;
    }
    return j;
  }

  static std::unique_ptr<Policy> decode(const json& j) {
    if (j.at("format").get<std::string>() != kSnapshotFormat) throw std::invalid_argument("snapshot: unknown format");
    if (j.at("version").get<int>() != kSnapshotVersion) throw std::invalid_argument("snapshot: unsupported version");
    PolicyOptions opts;
    opts.num_arms = j.at("num_arms").get<std::size_t>();
    opts.dim = j.at("dim").get<Eigen::Index>();
    opts.recompute_period = j.at("recompute_period").get<std::size_t>();
    opts.tie_break = tie_break_from(j.at("tie_break").get<std::string>());
    const auto kind = j.at("kind").get<std::string>();
    std::unique_ptr<Policy> out;
    if (kind == "fixed") {
      out = std::make_unique<FixedAlphaPolicy>(opts, j.at("alpha").get<double>());
    } else if (kind == "oplinucb") {
      OplinucbOptions meta;
      meta.prior_success = j.at("prior_success").get<double>();
      meta.prior_failure = j.at("prior_failure").get<double>();
      meta.fractional = j.at("fractional_rewards").get<std::string>() == "bernoulli" ? FractionalRewards::bernoulli
                                                                                    : FractionalRewards::reject;
      auto o = std::make_unique<OplinucbPolicy>(opts, AlphaGrid(j.at("grid").get<std::vector<double>>()), meta);
      o->posterior_.restore_counts(j.at("pulls").get<std::vector<std::size_t>>(),
                                   j.at("reward_sums").get<std::vector<double>>());
      if (!j.at("pending").is_null()) o->pending_ = j.at("pending").get<std::size_t>();
      out = std::move(o);
    } else if (kind == "doplinucb") {
      DoplinucbOptions meta;
      meta.warmup_rounds = j.at("warmup_rounds").get<std::size_t>();
      meta.window_size = j.at("window_size").get<std::size_t>();
      meta.refit_period = j.at("refit_period").get<std::size_t>();
      const auto& jt = j.at("ctree");
      meta.tree.significance = jt.at("significance").get<double>();
      meta.tree.min_leaf_weight = jt.at("min_leaf_weight").get<int>();
      meta.tree.max_depth = jt.at("max_depth").get<int>();
      meta.tree.categorical_exhaustive_limit = jt.at("categorical_exhaustive_limit").get<int>();
      auto d = std::make_unique<DoplinucbPolicy>(opts, AlphaGrid(j.at("grid").get<std::vector<double>>()), meta);
      for (const auto& row : j.at("window")) {
        d->window_.push_back(TrainingRow{vector_from_json(row.at("x")), row.at("alpha").get<double>(),
                                         row.at("reward").get<double>()});
      }
      if (!j.at("tree").is_null()) d->tree_ = tree_from_json(j.at("tree"));
      if (!j.at("pending").is_null()) d->pending_ = j.at("pending").get<std::size_t>();
      d->refits_ = j.at("refits").get<std::size_t>();
      d->skipped_refits_ = j.at("skipped_refits").get<std::size_t>();
      out = std::move(d);
    } else {
      throw std::invalid_argument("snapshot: unknown policy kind '" + kind + "'");
    }
    decode_base(*out, j);
    return out;
  }
};

std::string Policy::snapshot() const { return PolicyCodec::encode(*this).dump(); }

std::unique_ptr<Policy> restore_policy(const std::string& blob) {
  json j;
  try {
    j = json::parse(blob);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("snapshot: ") + e.what());
  }
  try {
    return PolicyCodec::decode(j);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("snapshot: ") + e.what());
  }
}

RoundRecord play_round(Policy& policy, Environment& env) {
  if (env.exhausted()) throw EndOfStream();
  RoundRecord rec;
  rec.t = static_cast<std::int64_t>(env.round_index()) + 1;
  rec.context = env.current_context();
  const Choice choice = policy.choose(rec.context);
  const StepResult result = env.step(choice.arm);
  policy.learn(rec.context, choice.arm, result.reward);
  rec.alpha = choice.alpha;
  rec.arm = choice.arm;
  rec.reward = result.reward;
  rec.optimal_reward = result.optimal_reward;
  return rec;
}

}  // namespace autoalpha
