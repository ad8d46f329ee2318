#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autoalpha/config.hpp"
#include "autoalpha/environments.hpp"
#include "autoalpha/policies.hpp"

namespace autoalpha::harness {

// Parses, encodes (or reads the cache of) the configured dataset.
std::shared_ptr<const LabeledRows> load_dataset(const EnvironmentConfig& env);

// `data` is required for replay and switching environments.
std::unique_ptr<Environment> make_environment(const ExperimentConfig& config, std::uint64_t seed,
                                              const std::shared_ptr<const LabeledRows>& data);

std::unique_ptr<Policy> make_policy(const ExperimentConfig& config, PolicyKind kind, double alpha,
                                    std::size_t num_arms, Eigen::Index dim, std::uint64_t seed);

// Engine seeds derived from (master_seed, role, alpha, seed); independent of
// execution order.
std::uint64_t environment_seed(const ExperimentConfig& config, std::uint64_t seed);
std::uint64_t policy_seed(const ExperimentConfig& config, PolicyKind kind, double alpha, std::uint64_t seed);

struct RunSpec {
  PolicyKind kind = PolicyKind::fixed;
  double alpha = 0.0;  // fixed policy only
  std::uint64_t seed = 0;
};

struct RunResult {
  double final_regret = 0.0;
  std::size_t rounds = 0;
  double total_reward = 0.0;
};

// Plays up to config.horizon rounds (fewer if a replay runs out). When `log`
// is set, writes the CSV header and one row per round:
// t,alpha,arm,reward,optimal_reward,cumulative_regret.
RunResult run_policy(const ExperimentConfig& config, const RunSpec& spec,
                     const std::shared_ptr<const LabeledRows>& data, std::ostream* log = nullptr);

// File name used for a run's per-round log.
std::string run_label(const RunSpec& spec);
std::string log_file_name(const RunSpec& spec);

// Runs config.policy for `seed`, writing <output_dir>/<label>_seed<seed>.csv.
RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                         const std::filesystem::path& output_dir,
                         const std::shared_ptr<const LabeledRows>& data);

struct SummaryStats {
  double max = 0.0;
  double min = 0.0;
  double mean = 0.0;
  double median = 0.0;
};

SummaryStats summarize(std::span<const double> values);

struct AlphaResult {
  double alpha = 0.0;
  std::vector<double> per_seed;
  double mean = 0.0;
};

struct SweepColumn {
  std::string label;
  std::vector<AlphaResult> fixed;
  std::vector<double> oplinucb;   // per seed
  std::vector<double> doplinucb;  // per seed
  SummaryStats grid;              // over the per-alpha seed means
  double oplinucb_mean = 0.0;
  double doplinucb_mean = 0.0;
};

struct SweepResult {
  std::vector<std::uint64_t> seeds;
  std::vector<SweepColumn> columns;
};

// Every grid alpha as a fixed baseline plus both meta-policies, over all
// seeds and every axis value. Tasks run on `jobs` threads; results are keyed
// by task so the output does not depend on scheduling. When `log_dir` is set
// each run writes its per-round log there.
SweepResult sweep_grid(const ExperimentConfig& config, unsigned jobs,
                       const std::optional<std::filesystem::path>& log_dir = std::nullopt);

// statistic rows (max, min, mean, median, oplinucb, doplinucb) x axis columns.
void write_summary_csv(std::ostream& out, const SweepResult& result);
// One row per (column, policy, alpha) with the seed mean and every seed.
void write_per_alpha_csv(std::ostream& out, const SweepResult& result);

struct LogSeries {
  std::vector<std::int64_t> t;
  std::vector<double> cumulative_regret;
};

LogSeries read_log(const std::filesystem::path& path);

struct PlotRow {
  std::int64_t t = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct PlotSeries {
  std::string label;
  std::vector<PlotRow> rows;
};

// Groups logs by the label in their file name (<label>_seed<k>.csv) and
// aggregates cumulative regret across seeds at every t. Throws DataError when
// the list is empty or horizons within a group differ.
std::vector<PlotSeries> aggregate_logs(const std::vector<std::filesystem::path>& logs);

// Writes plot_<label>.csv (t,mean,min,max) per series into out_dir. Nothing is
// written when aggregation fails.
std::vector<std::filesystem::path> emit_plotdata(const std::vector<std::filesystem::path>& logs,
                                                 const std::filesystem::path& out_dir);

std::string format_number(double v);

}  // namespace autoalpha::harness
