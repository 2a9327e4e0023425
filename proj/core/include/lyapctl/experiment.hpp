#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lyapctl/backtrack.hpp"
#include "lyapctl/flow.hpp"

namespace lyapctl {

/// Flat key=value settings. Keys carry a section prefix (flow., problem.,
/// policy., init., output.) or are bare (seed). Underscores in keys are
/// normalized to dashes.
using Settings = std::map<std::string, std::string>;

/// Parses `key = value` lines; '#' starts a comment. Throws ConfigError on a
/// malformed line.
Settings parse_settings(const std::string& text);
Settings load_settings(const std::string& path);

/// Later entries override earlier ones.
Settings merge(Settings base, const Settings& overrides);

enum class Policy { lcr, lcm, constant };

struct InitSpec {
  enum class Mode { explicit_state, box, ball } mode = Mode::box;
  std::vector<double> state;  // explicit state, or the ball center (empty: minimizer)
  double low = -2.0;
  double high = 2.0;
  double radius = 0.1;
  int count = 1;  // replicated runs (seeds seed, seed+1, ...)
};

struct ExperimentConfig {
  std::string flow = "gd";
  double beta1bar = 1.0;
  double eps_a = 1e-8;
  double p = 2.0;

  std::string problem = "quadratic";
  Index n = 2;
  double cond = 10.0;
  double q = 1.0;

  Policy policy = Policy::lcr;
  BacktrackConfig backtrack;

  InitSpec init;
  std::uint64_t seed = 0;

  std::string csv_path;
  std::string summary_path;

  /// Effective settings, echoed into the summary.
  Settings echo;
};

/// Builds a validated config. Unknown keys and bad values raise ConfigError
/// naming the key.
ExperimentConfig make_config(const Settings& s);

Objective build_problem(const ExperimentConfig& cfg);
FlowSystem build_flow(const ExperimentConfig& cfg);

/// Initial state for replicate `replica` (seed + replica). Box mode draws
/// theta (and a momentum velocity) from the box; RMSProp accumulators start
/// at zero. Ball mode perturbs theta only.
Vector initial_state(const ExperimentConfig& cfg, const FlowSystem& fs, int replica = 0);

RunLog run_policy(const ExperimentConfig& cfg, const FlowSystem& fs, const Vector& y0);

struct ExperimentResult {
  RunLog log;
  nlohmann::json summary;
};

/// Builds the flow, runs the policy, writes the CSV and summary when paths
/// are set. Numerical failures land in summary["status"].
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// sup_n ||y_n - center|| over the initial state and every snapshot.
double max_excursion(const RunLog& log, const Vector& center);

struct SuiteEntry {
  std::string name;
  Settings settings;
};

/// Suite file: shared `key=value` lines followed by `[name]` sections; each
/// section is one experiment inheriting the shared keys.
std::vector<SuiteEntry> parse_suite(const std::string& text);

/// Runs every entry (up to `threads` at a time), writes `<name>.csv` and
/// `<name>.summary.json` under `out_dir`, then `index.json`. Invalid entries
/// are recorded in the index and do not stop the suite. Replicated entries
/// (init.count > 1) write one aggregate summary with max_excursion.
nlohmann::json run_suite(const std::vector<SuiteEntry>& entries, const std::string& out_dir,
                         unsigned threads);

/// Parallelism cap from LYAPCTL_THREADS, else hardware concurrency.
unsigned default_thread_count();

}  // namespace lyapctl
