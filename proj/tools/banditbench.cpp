// banditbench: run / sweep / report driver for the exploration-learning bandits.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "autoalpha/config.hpp"
#include "autoalpha/errors.hpp"
#include "autoalpha/harness.hpp"
#include "autoalpha/ingest.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

using namespace autoalpha;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  unsigned jobs = 1;
  std::vector<std::string> logs;
};

std::filesystem::path output_dir(const ExperimentConfig& cfg, const Options& opt) {
  return opt.out ? std::filesystem::path(*opt.out) : cfg.output_dir;
}

int cmd_run(const Options& opt) {
  ExperimentConfig cfg = load_config(opt.config);
  if (opt.seed) cfg.seeds = {*opt.seed};
  const auto data =
      cfg.environment.kind == EnvironmentKind::synthetic ? nullptr : harness::load_dataset(cfg.environment);
  const auto dir = output_dir(cfg, opt);
  std::filesystem::create_directories(dir);
  std::ofstream summary(dir / "run_summary.csv");
  if (!summary) throw DataError("cannot write '" + (dir / "run_summary.csv").string() + "'");
  summary << "policy,seed,rounds,final_regret\n";
  const harness::RunSpec label_spec{cfg.policy.kind, cfg.policy.alpha, 0};
  for (auto seed : cfg.seeds) {
    const auto result = harness::run_experiment(cfg, seed, dir, data);
    const auto label = harness::run_label(label_spec);
    summary << label << ',' << seed << ',' << result.rounds << ',' << harness::format_number(result.final_regret)
            << '\n';
    std::cout << label << " seed=" << seed << " rounds=" << result.rounds
              << " final_regret=" << harness::format_number(result.final_regret) << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const Options& opt) {
  ExperimentConfig cfg = load_config(opt.config);
  if (opt.seed) cfg.seeds = {*opt.seed};
  if (!cfg.sweep) throw ConfigError("sweep", "required field is missing");
  const auto dir = output_dir(cfg, opt);
  std::optional<std::filesystem::path> log_dir;
  if (cfg.sweep->round_logs) log_dir = dir / "logs";
  const auto result = harness::sweep_grid(cfg, opt.jobs, log_dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "summary.csv");
    if (!out) throw DataError("cannot write summary.csv");
    harness::write_summary_csv(out, result);
  }
  {
    std::ofstream out(dir / "per_alpha.csv");
    if (!out) throw DataError("cannot write per_alpha.csv");
    harness::write_per_alpha_csv(out, result);
  }
  std::cout << "final cumulative regret, mean over " << result.seeds.size() << " seed(s)\n";
  harness::write_summary_csv(std::cout, result);
  return kExitOk;
}

int cmd_report(const Options& opt) {
  if (!opt.out) throw ConfigError("--out", "report requires an output directory");
  std::vector<std::filesystem::path> logs(opt.logs.begin(), opt.logs.end());
  const auto written = harness::emit_plotdata(logs, *opt.out);
  for (const auto& p : written) std::cout << p.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual-bandit exploration benchmark"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", opt.seed, "Run only this seed");
    sub->add_option("--out", opt.out, "Output directory (overrides output_dir)");
    sub->add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto* run = app.add_subcommand("run", "Run one policy over the configured seeds");
  run->add_option("--config", opt.config, "Experiment config (JSON)")->required();
  add_common(run);
  auto* sweep = app.add_subcommand("sweep", "Fixed-alpha grid plus both meta-policies -> summary table");
  sweep->add_option("--config", opt.config, "Experiment config (JSON)")->required();
  add_common(sweep);
  auto* report = app.add_subcommand("report", "Per-round logs -> plot data (t, mean, min, max)");
  report->add_option("--config", opt.config, "Unused; accepted for symmetry");
  add_common(report);
  report->add_option("logs", opt.logs, "Round log CSV files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(opt);
    if (*sweep) return cmd_sweep(opt);
    if (*report) return cmd_report(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const EncodeError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
