#include "autoalpha/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "autoalpha/errors.hpp"
#include "autoalpha/ingest.hpp"

namespace autoalpha::harness {

namespace {

constexpr std::uint64_t kEnvironmentStream = 0x656e76;  // "env"

std::uint64_t kind_code(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::fixed:
      return 0x666978;
    case PolicyKind::oplinucb:
      return 0x6f706c;
    case PolicyKind::doplinucb:
      return 0x646f70;
  }
  return 0;
}

const char* kLogHeader = "t,alpha,arm,reward,optimal_reward,cumulative_regret";

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t\r\n") - a + 1);
}

void apply_axis(ExperimentConfig& cfg, SweepAxisParameter param, std::int64_t value) {
  switch (param) {
    case SweepAxisParameter::warmup_rounds:
      cfg.policy.doplinucb.warmup_rounds = static_cast<std::size_t>(value);
      break;
    case SweepAxisParameter::switch_period:
      if (cfg.environment.kind != EnvironmentKind::switching) {
        throw ConfigError("sweep.axis.parameter", "switch_period requires a switching environment");
      }
      if (value < 1) throw ConfigError("sweep.axis.values", "switch_period values must be >= 1");
      cfg.environment.switch_period = value;
      break;
    case SweepAxisParameter::horizon:
      if (value < 1) throw ConfigError("sweep.axis.values", "horizon values must be >= 1");
      cfg.horizon = static_cast<std::size_t>(value);
      break;
  }
}

// Whether a policy's result depends on the axis parameter.
bool depends_on_axis(PolicyKind kind, SweepAxisParameter param) {
  if (param == SweepAxisParameter::warmup_rounds) return kind == PolicyKind::doplinucb;
  return true;
}

// Fixed-alpha runs consume no randomness when the replay order is fixed and
// ties go to the lowest index, so one run stands for every seed.
bool fixed_runs_seed_invariant(const ExperimentConfig& cfg) {
  return cfg.environment.kind != EnvironmentKind::synthetic && cfg.environment.order == ReplayOrder::dataset &&
         cfg.tie_break == TieBreak::lowest_index;
}

template <class Fn>
void run_parallel(std::size_t count, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::shared_ptr<const LabeledRows> load_dataset(const EnvironmentConfig& env) {
  if (env.cache && std::filesystem::exists(*env.cache)) {
    std::ifstream in(*env.cache);
    if (!in) throw DataError("cannot open cache '" + env.cache->string() + "'");
    auto data = ingest::read_cache(in);
    return std::make_shared<const LabeledRows>(std::move(data.rows));
  }
  std::vector<ingest::RawRecord> records;
  for (const auto& path : env.dataset) {
    auto part = ingest::parse_adult_file(path.string());
    records.insert(records.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  if (records.empty()) throw DataError("dataset contains no records");
  std::vector<ingest::RawRecord> fit_rows;
  const std::vector<ingest::RawRecord>* fit_source = &records;
  if (env.encoder_fit_rows > 0 && env.encoder_fit_rows < records.size()) {
    fit_rows.assign(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(env.encoder_fit_rows));
    fit_source = &fit_rows;
  }
  const auto spec = ingest::fit_encoder(*fit_source);
  auto encoded = ingest::encode_all(spec, records);
  if (env.cache) {
    std::ofstream out(*env.cache);
    if (!out) throw DataError("cannot write cache '" + env.cache->string() + "'");
    ingest::write_cache(out, spec, encoded);
  }
  return std::make_shared<const LabeledRows>(std::move(encoded.rows));
}

std::uint64_t environment_seed(const ExperimentConfig& config, std::uint64_t seed) {
  return derive_seed({config.master_seed, kEnvironmentStream, seed});
}

std::uint64_t policy_seed(const ExperimentConfig& config, PolicyKind kind, double alpha, std::uint64_t seed) {
  const std::uint64_t alpha_bits = kind == PolicyKind::fixed ? std::bit_cast<std::uint64_t>(alpha) : 0;
  return derive_seed({config.master_seed, kind_code(kind), alpha_bits, seed});
}

std::unique_ptr<Environment> make_environment(const ExperimentConfig& config, std::uint64_t seed,
                                              const std::shared_ptr<const LabeledRows>& data) {
  const auto& env = config.environment;
  const std::uint64_t env_seed = environment_seed(config, seed);
  if (env.kind == EnvironmentKind::synthetic) {
    if (env.weights) return std::make_unique<SyntheticLinearEnv>(*env.weights, env_seed);
    return std::make_unique<SyntheticLinearEnv>(env.dim, env.arms, env_seed);
  }
  if (!data) throw DataError("replay environment requires a dataset");
  ReplayEnv base = env.order == ReplayOrder::shuffled ? ReplayEnv(data, env_seed) : ReplayEnv(data);
  if (env.kind == EnvironmentKind::switching) {
    return std::make_unique<SwitchingReplayEnv>(make_switching(std::move(base), env.switch_period));
  }
  return std::make_unique<ReplayEnv>(std::move(base));
}

std::unique_ptr<Policy> make_policy(const ExperimentConfig& config, PolicyKind kind, double alpha,
                                    std::size_t num_arms, Eigen::Index dim, std::uint64_t seed) {
  PolicyOptions opts;
  opts.num_arms = num_arms;
  opts.dim = dim;
  opts.tie_break = config.tie_break;
  opts.recompute_period = config.recompute_period;
  opts.seed = policy_seed(config, kind, alpha, seed);
  switch (kind) {
    case PolicyKind::fixed:
      return std::make_unique<FixedAlphaPolicy>(opts, alpha);
    case PolicyKind::oplinucb:
      return std::make_unique<OplinucbPolicy>(opts, config.policy.grid(), config.policy.oplinucb);
    case PolicyKind::doplinucb:
      return std::make_unique<DoplinucbPolicy>(opts, config.policy.grid(), config.policy.doplinucb);
  }
  throw std::invalid_argument("make_policy: unknown kind");
}

RunResult run_policy(const ExperimentConfig& config, const RunSpec& spec,
                     const std::shared_ptr<const LabeledRows>& data, std::ostream* log) {
  auto env = make_environment(config, spec.seed, data);
  auto policy = make_policy(config, spec.kind, spec.alpha, env->num_arms(), env->dim(), spec.seed);
  if (log) *log << kLogHeader << '\n';
  RunResult result;
  double cumulative = 0.0;
  while (result.rounds < config.horizon && !env->exhausted()) {
    const RoundRecord rec = play_round(*policy, *env);
    cumulative += *rec.optimal_reward - rec.reward;
    result.total_reward += rec.reward;
    ++result.rounds;
    if (log) {
      *log << rec.t << ',' << format_number(rec.alpha) << ',' << rec.arm.index << ',' << format_number(rec.reward)
           << ',' << format_number(*rec.optimal_reward) << ',' << format_number(cumulative) << '\n';
    }
  }
  result.final_regret = cumulative;
  return result;
}

std::string run_label(const RunSpec& spec) {
  if (spec.kind == PolicyKind::fixed) return "fixed-a" + format_number(spec.alpha);
  return to_string(spec.kind);
}

std::string log_file_name(const RunSpec& spec) {
  return run_label(spec) + "_seed" + std::to_string(spec.seed) + ".csv";
}

RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                         const std::filesystem::path& output_dir,
                         const std::shared_ptr<const LabeledRows>& data) {
  const RunSpec spec{config.policy.kind, config.policy.alpha, seed};
  std::filesystem::create_directories(output_dir);
  const auto path = output_dir / log_file_name(spec);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return run_policy(config, spec, data, &out);
}

SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("summarize: no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  SummaryStats s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  const std::size_t n = sorted.size();
  s.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  // Guard the ordering invariant against rounding in the mean.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

SweepResult sweep_grid(const ExperimentConfig& config, unsigned jobs,
                       const std::optional<std::filesystem::path>& log_dir) {
  if (!config.sweep) throw ConfigError("sweep", "required field is missing");
  const auto& sweep = *config.sweep;
  const AlphaGrid grid = config.policy.grid();
  const auto data = config.environment.kind == EnvironmentKind::synthetic ? nullptr : load_dataset(config.environment);

  std::vector<ExperimentConfig> columns;
  std::vector<std::string> labels;
  if (sweep.axis) {
    for (auto v : sweep.axis_values) {
      ExperimentConfig c = config;
      apply_axis(c, *sweep.axis, v);
      columns.push_back(std::move(c));
      labels.push_back(std::to_string(v));
    }
  } else {
    columns.push_back(config);
    labels.push_back("base");
  }

  struct Task {
    std::size_t column;
    RunSpec spec;
    std::size_t alpha_index;  // fixed only
    std::size_t seed_index;
    std::optional<std::size_t> copy_of;  // reuse another task's result
  };
  std::vector<Task> tasks;
  const bool dedupe = !log_dir;
  // Index of the task that owns the result for a (kind, alpha, seed) key.
  std::map<std::tuple<int, std::size_t, std::size_t>, std::size_t> owners_by_column0;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const bool invariant_fixed = dedupe && fixed_runs_seed_invariant(columns[c]);
    std::vector<std::size_t> first_seed_task(grid.size());
    auto add = [&](PolicyKind kind, double alpha, std::size_t ai, std::size_t si) {
      Task t{c, RunSpec{kind, alpha, config.seeds[si]}, ai, si, std::nullopt};
      const auto key = std::make_tuple(static_cast<int>(kind), ai, si);
      if (dedupe && c > 0 && sweep.axis && !depends_on_axis(kind, *sweep.axis)) {
        t.copy_of = owners_by_column0.at(key);
      } else if (kind == PolicyKind::fixed && invariant_fixed && si > 0) {
        t.copy_of = first_seed_task[ai];
      }
      if (kind == PolicyKind::fixed && si == 0) first_seed_task[ai] = tasks.size();
      if (c == 0) owners_by_column0[key] = t.copy_of.value_or(tasks.size());
      tasks.push_back(t);
    };
    for (std::size_t ai = 0; ai < grid.size(); ++ai) {
      for (std::size_t si = 0; si < config.seeds.size(); ++si) add(PolicyKind::fixed, grid[ai], ai, si);
    }
    for (std::size_t si = 0; si < config.seeds.size(); ++si) add(PolicyKind::oplinucb, 0.0, 0, si);
    for (std::size_t si = 0; si < config.seeds.size(); ++si) add(PolicyKind::doplinucb, 0.0, 0, si);
  }

  std::vector<std::size_t> owned;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!tasks[i].copy_of) owned.push_back(i);
  }
  std::vector<double> results(tasks.size(), 0.0);
  if (log_dir) std::filesystem::create_directories(*log_dir);
  run_parallel(owned.size(), jobs, [&](std::size_t k) {
    const Task& t = tasks[owned[k]];
    if (log_dir) {
      const auto dir = *log_dir / labels[t.column];
      std::filesystem::create_directories(dir);
      std::ofstream out(dir / log_file_name(t.spec));
      if (!out) throw DataError("cannot write log in '" + dir.string() + "'");
      results[owned[k]] = run_policy(columns[t.column], t.spec, data, &out).final_regret;
    } else {
      results[owned[k]] = run_policy(columns[t.column], t.spec, data, nullptr).final_regret;
    }
  });
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].copy_of) results[i] = results[*tasks[i].copy_of];
  }

  SweepResult out;
  out.seeds = config.seeds;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    SweepColumn col;
    col.label = labels[c];
    col.fixed.resize(grid.size());
    for (std::size_t ai = 0; ai < grid.size(); ++ai) {
      col.fixed[ai].alpha = grid[ai];
      col.fixed[ai].per_seed.assign(config.seeds.size(), 0.0);
    }
    col.oplinucb.assign(config.seeds.size(), 0.0);
    col.doplinucb.assign(config.seeds.size(), 0.0);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const Task& t = tasks[i];
      if (t.column != c) continue;
      switch (t.spec.kind) {
        case PolicyKind::fixed:
          col.fixed[t.alpha_index].per_seed[t.seed_index] = results[i];
          break;
        case PolicyKind::oplinucb:
          col.oplinucb[t.seed_index] = results[i];
          break;
        case PolicyKind::doplinucb:
          col.doplinucb[t.seed_index] = results[i];
          break;
      }
    }
    const auto mean_of = [](const std::vector<double>& v) {
      return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    std::vector<double> means;
    for (auto& a : col.fixed) {
      a.mean = mean_of(a.per_seed);
      means.push_back(a.mean);
    }
    col.grid = summarize(means);
    col.oplinucb_mean = mean_of(col.oplinucb);
    col.doplinucb_mean = mean_of(col.doplinucb);
    out.columns.push_back(std::move(col));
  }
  return out;
}

void write_summary_csv(std::ostream& out, const SweepResult& result) {
  out << "statistic";
  for (const auto& c : result.columns) out << ',' << c.label;
  out << '\n';
  const auto row = [&](const char* name, auto&& get) {
    out << name;
    for (const auto& c : result.columns) out << ',' << format_number(get(c));
    out << '\n';
  };
  row("max", [](const SweepColumn& c) { return c.grid.max; });
  row("min", [](const SweepColumn& c) { return c.grid.min; });
  row("mean", [](const SweepColumn& c) { return c.grid.mean; });
  row("median", [](const SweepColumn& c) { return c.grid.median; });
  row("oplinucb", [](const SweepColumn& c) { return c.oplinucb_mean; });
  row("doplinucb", [](const SweepColumn& c) { return c.doplinucb_mean; });
}

void write_per_alpha_csv(std::ostream& out, const SweepResult& result) {
  out << "column,policy,alpha,mean";
  for (auto s : result.seeds) out << ",seed_" << s;
  out << '\n';
  for (const auto& c : result.columns) {
    for (const auto& a : c.fixed) {
      out << c.label << ",fixed," << format_number(a.alpha) << ',' << format_number(a.mean);
      for (double v : a.per_seed) out << ',' << format_number(v);
      out << '\n';
    }
    const auto meta = [&](const char* name, const std::vector<double>& v, double mean) {
      out << c.label << ',' << name << ",," << format_number(mean);
      for (double x : v) out << ',' << format_number(x);
      out << '\n';
    };
    meta("oplinucb", c.oplinucb, c.oplinucb_mean);
    meta("doplinucb", c.doplinucb, c.doplinucb_mean);
  }
}

LogSeries read_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open log '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line) != kLogHeader) {
    throw DataError("'" + path.string() + "' is not a round log (bad header)");
  }
  LogSeries s;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 6) throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 6 fields");
    try {
      s.t.push_back(std::stoll(fields[0]));
      s.cumulative_regret.push_back(std::stod(fields[5]));
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": unparsable number");
    }
  }
  return s;
}

std::vector<PlotSeries> aggregate_logs(const std::vector<std::filesystem::path>& logs) {
  if (logs.empty()) throw DataError("report: no logs given");
  std::map<std::string, std::vector<LogSeries>> groups;
  for (const auto& path : logs) {
    std::string stem = path.stem().string();
    const auto at = stem.rfind("_seed");
    if (at != std::string::npos) stem.resize(at);
    groups[stem].push_back(read_log(path));
  }
  std::vector<PlotSeries> out;
  for (auto& [label, series] : groups) {
    const auto& first = series.front();
    for (const auto& s : series) {
      if (s.t != first.t) throw DataError("report: logs for '" + label + "' have mismatched horizons");
    }
    PlotSeries ps;
    ps.label = label;
    for (std::size_t i = 0; i < first.t.size(); ++i) {
      PlotRow r;
      r.t = first.t[i];
      r.min = r.max = first.cumulative_regret[i];
      double sum = 0.0;
      for (const auto& s : series) {
        const double v = s.cumulative_regret[i];
        sum += v;
        r.min = std::min(r.min, v);
        r.max = std::max(r.max, v);
      }
      r.mean = sum / static_cast<double>(series.size());
      ps.rows.push_back(r);
    }
    out.push_back(std::move(ps));
  }
  return out;
}

std::vector<std::filesystem::path> emit_plotdata(const std::vector<std::filesystem::path>& logs,
                                                 const std::filesystem::path& out_dir) {
  const auto series = aggregate_logs(logs);
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& s : series) {
    const auto path = out_dir / ("plot_" + s.label + ".csv");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "t,mean,min,max\n";
    for (const auto& r : s.rows) {
      out << r.t << ',' << format_number(r.mean) << ',' << format_number(r.min) << ',' << format_number(r.max) << '\n';
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace autoalpha::harness
