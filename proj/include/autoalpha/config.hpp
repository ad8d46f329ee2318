#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "autoalpha/alpha_posterior.hpp"
#include "autoalpha/bandit_core.hpp"
#include "autoalpha/ctree.hpp"
#include "autoalpha/policies.hpp"

namespace autoalpha {

enum class EnvironmentKind { replay, switching, synthetic };
enum class PolicyKind { fixed, oplinucb, doplinucb };
enum class ReplayOrder { dataset, shuffled };

struct EnvironmentConfig {
  EnvironmentKind kind = EnvironmentKind::synthetic;
  // replay / switching
  std::vector<std::filesystem::path> dataset;
  std::size_t encoder_fit_rows = 0;  // 0: fit on every row of the dataset files
  ReplayOrder order = ReplayOrder::dataset;
  std::optional<std::filesystem::path> cache;
  std::int64_t switch_period = 0;
  // synthetic
  Eigen::Index dim = 0;
  std::size_t arms = 2;
  std::optional<std::vector<Eigen::VectorXd>> weights;
};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::fixed;
  double alpha = 0.0;
  std::string grid_spec;
  OplinucbOptions oplinucb;
  DoplinucbOptions doplinucb;

  AlphaGrid grid() const { return AlphaGrid::parse(grid_spec); }
};

enum class SweepAxisParameter { warmup_rounds, switch_period, horizon };

struct SweepConfig {
  std::optional<SweepAxisParameter> axis;
  std::vector<std::int64_t> axis_values;
  bool round_logs = false;
};

// Every tunable constant is a required key; unknown keys are rejected.
struct ExperimentConfig {
  EnvironmentConfig environment;
  PolicyConfig policy;
  TieBreak tie_break = TieBreak::lowest_index;
  std::size_t recompute_period = 1000;
  std::size_t horizon = 1;
  std::vector<std::uint64_t> seeds;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir;
  std::optional<SweepConfig> sweep;
};

// Parses the JSON config text. Relative dataset/cache paths resolve against
// `base_dir`. Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

const char* to_string(PolicyKind kind);

}  // namespace autoalpha
