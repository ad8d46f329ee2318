#include "autoalpha/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "autoalpha/errors.hpp"

namespace autoalpha {

using nlohmann::json;

namespace {

// Field access with errors that name the full dotted key.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }

  const json& at(const std::string& name) const {
    used_.insert(name);
    if (!j_.contains(name)) throw ConfigError(key(name), "required field is missing");
    return j_.at(name);
  }

  bool has(const std::string& name) const { return j_.contains(name); }

  Section section(const std::string& name) const { return Section(at(name), key(name)); }

  template <class T>
  T get(const std::string& name) const {
    const json& v = at(name);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(key(name), "has the wrong type");
    }
  }

  double number(const std::string& name) const {
    const json& v = at(name);
    if (!v.is_number()) throw ConfigError(key(name), "expected a number");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& name, std::int64_t min_value) const {
    const json& v = at(name);
    if (!v.is_number_integer()) throw ConfigError(key(name), "expected an integer");
    const auto value = v.get<std::int64_t>();
    if (value < min_value) throw ConfigError(key(name), "must be >= " + std::to_string(min_value));
    return value;
  }

  std::string string(const std::string& name) const {
    const json& v = at(name);
    if (!v.is_string()) throw ConfigError(key(name), "expected a string");
    return v.get<std::string>();
  }

  // Rejects keys that were never read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(key(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  mutable std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

EnvironmentConfig parse_environment(const Section& s, const std::filesystem::path& base_dir) {
  EnvironmentConfig env;
  const std::string kind = s.string("kind");
  if (kind == "replay") {
    env.kind = EnvironmentKind::replay;
  } else if (kind == "switching") {
    env.kind = EnvironmentKind::switching;
  } else if (kind == "synthetic") {
    env.kind = EnvironmentKind::synthetic;
  } else {
    throw ConfigError(s.key("kind"), "expected replay, switching or synthetic");
  }

  if (env.kind == EnvironmentKind::synthetic) {
    env.dim = s.integer("dim", 1);
    env.arms = static_cast<std::size_t>(s.integer("arms", 2));
    const json& w = s.at("weights");
    if (!w.is_null()) {
      if (!w.is_array() || w.size() != env.arms) throw ConfigError(s.key("weights"), "expected one vector per arm");
      std::vector<Eigen::VectorXd> weights;
      for (const auto& row : w) {
        if (!row.is_array() || row.size() != static_cast<std::size_t>(env.dim)) {
          throw ConfigError(s.key("weights"), "each vector must have length dim");
        }
        Eigen::VectorXd v(env.dim);
        for (Eigen::Index i = 0; i < env.dim; ++i) {
          if (!row[static_cast<std::size_t>(i)].is_number()) throw ConfigError(s.key("weights"), "expected numbers");
          v[i] = row[static_cast<std::size_t>(i)].get<double>();
        }
        weights.push_back(std::move(v));
      }
      env.weights = std::move(weights);
    }
  } else {
    const json& files = s.at("dataset");
    if (!files.is_array() || files.empty()) throw ConfigError(s.key("dataset"), "expected a non-empty list of paths");
    for (const auto& f : files) {
      if (!f.is_string()) throw ConfigError(s.key("dataset"), "expected string paths");
      env.dataset.push_back(resolve(base_dir, f.get<std::string>()));
    }
    env.encoder_fit_rows = static_cast<std::size_t>(s.integer("encoder_fit_rows", 0));
    const std::string order = s.string("order");
    if (order == "dataset") {
      env.order = ReplayOrder::dataset;
    } else if (order == "shuffled") {
      env.order = ReplayOrder::shuffled;
    } else {
      throw ConfigError(s.key("order"), "expected dataset or shuffled");
    }
    const json& cache = s.at("cache");
    if (!cache.is_null()) {
      if (!cache.is_string()) throw ConfigError(s.key("cache"), "expected a path or null");
      env.cache = resolve(base_dir, cache.get<std::string>());
    }
    if (env.kind == EnvironmentKind::switching) env.switch_period = s.integer("switch_period", 1);
  }
  s.finish();
  return env;
}

PolicyConfig parse_policy(const Section& s) {
  PolicyConfig p;
  const std::string kind = s.string("kind");
  if (kind == "fixed") {
    p.kind = PolicyKind::fixed;
  } else if (kind == "oplinucb") {
    p.kind = PolicyKind::oplinucb;
  } else if (kind == "doplinucb") {
    p.kind = PolicyKind::doplinucb;
  } else {
    throw ConfigError(s.key("kind"), "expected fixed, oplinucb or doplinucb");
  }
  p.alpha = s.number("alpha");
  if (!(p.alpha >= 0.0)) throw ConfigError(s.key("alpha"), "must be >= 0");
  p.grid_spec = s.string("grid");
  try {
    (void)p.grid();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.key("grid"), e.what());
  }
  p.oplinucb.prior_success = s.number("prior_success");
  p.oplinucb.prior_failure = s.number("prior_failure");
  if (!(p.oplinucb.prior_success > 0.0)) throw ConfigError(s.key("prior_success"), "must be > 0");
  if (!(p.oplinucb.prior_failure > 0.0)) throw ConfigError(s.key("prior_failure"), "must be > 0");
  const std::string frac = s.string("fractional_rewards");
  if (frac == "reject") {
    p.oplinucb.fractional = FractionalRewards::reject;
  } else if (frac == "bernoulli") {
    p.oplinucb.fractional = FractionalRewards::bernoulli;
  } else {
    throw ConfigError(s.key("fractional_rewards"), "expected reject or bernoulli");
  }
  p.doplinucb.warmup_rounds = static_cast<std::size_t>(s.integer("warmup_rounds", 0));
  p.doplinucb.window_size = static_cast<std::size_t>(s.integer("window_size", 1));
  p.doplinucb.refit_period = static_cast<std::size_t>(s.integer("refit_period", 1));
  const Section t = s.section("ctree");
  p.doplinucb.tree.significance = t.number("significance");
  p.doplinucb.tree.min_leaf_weight = static_cast<int>(t.integer("min_leaf_weight", 1));
  p.doplinucb.tree.max_depth = static_cast<int>(t.integer("max_depth", 0));
  p.doplinucb.tree.categorical_exhaustive_limit = static_cast<int>(t.integer("categorical_exhaustive_limit", 2));
  if (!(p.doplinucb.tree.significance > 0.0 && p.doplinucb.tree.significance < 1.0)) {
    throw ConfigError(t.key("significance"), "must lie in (0, 1)");
  }
  if (p.doplinucb.tree.categorical_exhaustive_limit > 30) {
    throw ConfigError(t.key("categorical_exhaustive_limit"), "must be <= 30");
  }
  t.finish();
  s.finish();
  return p;
}

SweepConfig parse_sweep(const Section& s) {
  SweepConfig sweep;
  const json& axis = s.at("axis");
  if (!axis.is_null()) {
    const Section a(axis, s.key("axis"));
    const std::string param = a.string("parameter");
    if (param == "warmup_rounds") {
      sweep.axis = SweepAxisParameter::warmup_rounds;
    } else if (param == "switch_period") {
      sweep.axis = SweepAxisParameter::switch_period;
    } else if (param == "horizon") {
      sweep.axis = SweepAxisParameter::horizon;
    } else {
      throw ConfigError(a.key("parameter"), "expected warmup_rounds, switch_period or horizon");
    }
    const json& values = a.at("values");
    if (!values.is_array() || values.empty()) throw ConfigError(a.key("values"), "expected a non-empty list");
    for (const auto& v : values) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError(a.key("values"), "expected integers >= 0");
      sweep.axis_values.push_back(v.get<std::int64_t>());
    }
    a.finish();
  }
  sweep.round_logs = s.get<bool>("round_logs");
  s.finish();
  return sweep;
}

}  // namespace

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::fixed:
      return "fixed";
    case PolicyKind::oplinucb:
      return "oplinucb";
    case PolicyKind::doplinucb:
      return "doplinucb";
  }
  return "unknown";
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("<root>", std::string("not valid JSON: ") + e.what());
  }
  const Section s(root, "");
  ExperimentConfig cfg;
  cfg.environment = parse_environment(s.section("environment"), base_dir);
  cfg.policy = parse_policy(s.section("policy"));
  const std::string tie = s.string("tie_break");
  if (tie == "lowest-index") {
    cfg.tie_break = TieBreak::lowest_index;
  } else if (tie == "seeded-random") {
    cfg.tie_break = TieBreak::seeded_random;
  } else {
    throw ConfigError("tie_break", "expected lowest-index or seeded-random");
  }
  cfg.recompute_period = static_cast<std::size_t>(s.integer("recompute_period", 1));
  cfg.horizon = static_cast<std::size_t>(s.integer("horizon", 1));
  const json& seeds = s.at("seeds");
  if (!seeds.is_array() || seeds.empty()) throw ConfigError("seeds", "expected a non-empty list");
  for (const auto& v : seeds) {
    if (!v.is_number_unsigned()) throw ConfigError("seeds", "expected non-negative integers");
    cfg.seeds.push_back(v.get<std::uint64_t>());
  }
  const json& master = s.at("master_seed");
  if (!master.is_number_unsigned()) throw ConfigError("master_seed", "expected a non-negative integer");
  cfg.master_seed = master.get<std::uint64_t>();
  cfg.output_dir = s.string("output_dir");
  if (s.has("sweep")) cfg.sweep = parse_sweep(s.section("sweep"));
  s.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

}  // namespace autoalpha
