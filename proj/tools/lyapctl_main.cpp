// lyapctl: run Lyapunov-controlled optimizers and the step-size / rate
// diagnostics from the command line.
//
// Exit codes: 0 ok (numerical failures are reported in the output's status
// field), 2 configuration error, 3 I/O error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <nlohmann/json.hpp>

#include "lyapctl/backtrack.hpp"
#include "lyapctl/certify.hpp"
#include "lyapctl/experiment.hpp"
#include "lyapctl/rates.hpp"
#include "lyapctl/sampling.hpp"
#include "lyapctl/trajectory_io.hpp"

namespace {

using nlohmann::json;
using namespace lyapctl;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

// Flag name -> settings key. Flags win over values from --config.
const std::vector<std::pair<std::string, std::string>> kSettingFlags = {
    {"--flow", "flow.name"},
    {"--beta1bar", "flow.beta1bar"},
    {"--eps-a", "flow.eps-a"},
    {"--p", "flow.p"},
    {"--problem", "problem.name"},
    {"--n", "problem.n"},
    {"--cond", "problem.cond"},
    {"--q", "problem.q"},
    {"--policy", "policy.name"},
    {"--lambda", "policy.lambda"},
    {"--f1", "policy.f1"},
    {"--f2", "policy.f2"},
    {"--eta-init", "policy.eta-init"},
    {"--eps", "policy.eps"},
    {"--max-iters", "policy.max-iters"},
    {"--max-backtracks", "policy.max-backtracks"},
    {"--eta-min", "policy.eta-min"},
    {"--accept-slack", "policy.accept-slack"},
    {"--relative-slack", "policy.relative-slack"},
    {"--seed", "seed"},
    {"--init", "init.mode"},
    {"--state", "init.state"},
    {"--csv", "output.csv"},
    {"--summary", "output.summary"},
    {"--stride", "output.stride"},
};

struct SettingOptions {
  std::string config_path;
  std::map<std::string, std::string> values;  // keyed by settings key
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key=value settings file");
    for (const auto& [flag, key] : kSettingFlags) {
      options[key] = app->add_option(flag, values[key], key);
    }
  }

  Settings collect() const {
    Settings s;
    if (!config_path.empty()) s = load_settings(config_path);
    Settings flags;
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) flags[key] = values.at(key);
    }
    return merge(std::move(s), flags);
  }
};

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

int cmd_run(const SettingOptions& so) {
  const ExperimentConfig cfg = make_config(so.collect());
  const ExperimentResult res = run_experiment(cfg);
  print(res.summary);
  return 0;
}

int cmd_suite(const std::string& path, const std::string& out_dir, unsigned threads) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open suite file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto entries = parse_suite(ss.str());
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
  print(run_suite(entries, out_dir, threads == 0 ? default_thread_count() : threads));
  return 0;
}

int cmd_certify(const SettingOptions& so, int grid_m, double bisect_tol, int samples) {
  const ExperimentConfig cfg = make_config(so.collect());
  const FlowSystem fs = build_flow(cfg);
  const Vector y = initial_state(cfg, fs, 0);
  const double lambda = cfg.backtrack.lambda;
  json out = {{"flow", fs.name}, {"lambda", lambda}, {"grid_m", grid_m},
              {"bisect_tol", bisect_tol}, {"state", std::vector<double>(y.begin(), y.end())}};
  const FlowEval e = eval_flow(fs, y);
  out["vdot"] = e.Vdot;
  try {
    const CertifiedStep c = certify_step(fs, y, lambda, grid_m, bisect_tol);
    out["status"] = "certified";
    out["eta_max_certified"] = c.eta_max_certified;
    out["eta_upper"] = c.eta_upper;
    out["q_at_eta"] = q_eval(fs, y, c.eta_max_certified, lambda, grid_m);
    // Inclusion check along a uniform sweep of (0, eta_max_certified].
    double worst_gap = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= samples; ++k) {
      const double eta = c.eta_max_certified * k / samples;
      worst_gap = std::max(worst_gap, armijo_gap(fs, y, eta, lambda));
    }
    out["max_armijo_gap"] = nullable(worst_gap);
  } catch (const NotCertifiable& ex) {
    out["status"] = "not_certifiable";
    out["detail"] = ex.what();
  }
  print(out);
  return 0;
}

RunLog run_or_load(const ExperimentConfig& cfg, const FlowSystem& fs,
                   const std::string& trajectory) {
  if (trajectory.empty()) return run_policy(cfg, fs, initial_state(cfg, fs, 0));
  RunLog log = read_trajectory_csv(trajectory);
  log.theta_block = fs.theta_block();
  return log;
}

int cmd_fit(const SettingOptions& so, double min_gap, const std::string& trajectory) {
  const ExperimentConfig cfg = make_config(so.collect());
  const FlowSystem fs = build_flow(cfg);
  const RunLog log = run_or_load(cfg, fs, trajectory);
  json out = {{"problem", fs.objective.name}};
  if (fs.objective.lojasiewicz_alpha) out["analytic_alpha1"] = *fs.objective.lojasiewicz_alpha;
  try {
    const LojasiewiczFit fit = lojasiewicz_fit(log, fs.objective, min_gap);
    out["status"] = "ok";
    out["alpha1"] = fit.alpha1;
    out["c1"] = fit.c1;
    out["r_squared"] = fit.r_squared;
    out["points_used"] = fit.points_used;
  } catch (const InsufficientData& ex) {
    out["status"] = "insufficient_data";
    out["detail"] = ex.what();
  }
  print(out);
  return 0;
}

json report_json(const RegimeReport& r) {
  json j = {{"alpha1", r.alpha1}, {"gamma", r.gamma},        {"alpha2", r.alpha2},
            {"regime", std::string(to_string(r.regime))},    {"C1", nullable(r.C1)},
            {"C2", nullable(r.C2)}, {"C3", nullable(r.C3)}};
  if (r.fit_quality) j["fit_quality"] = *r.fit_quality;
  return j;
}

struct RegimeArgs {
  double alpha1 = 0.5;
  double gamma = 1.0;
  double alpha2 = 0.5;
  double lambda = 0.5;
  double c = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  bool pgd = false;
  double p = 2.0;
};

int cmd_regime(const RegimeArgs& a) {
  const RegimeReport r = a.pgd ? pgd_regime(a.alpha1, a.p, a.lambda, a.c1)
                               : classify_regime(a.alpha1, a.gamma, a.alpha2, a.lambda, a.c,
                                                 a.c1, a.c2);
  print(report_json(r));
  return 0;
}

int cmd_bound(const SettingOptions& so, std::optional<double> alpha1, std::optional<double> c1,
              double min_gap, const std::string& trajectory) {
  const ExperimentConfig cfg = make_config(so.collect());
  if (cfg.flow != "gd") throw ConfigError("flow.name", "bound applies to the gd flow only");
  const FlowSystem fs = build_flow(cfg);
  const RunLog log = run_or_load(cfg, fs, trajectory);
  json out = {{"problem", fs.objective.name}, {"lambda", cfg.backtrack.lambda}};
  if (!alpha1 || !c1) {
    const LojasiewiczFit fit = lojasiewicz_fit(log, fs.objective, min_gap);
    if (!alpha1) alpha1 = fit.alpha1;
    if (!c1) c1 = fit.c1;
    out["fit_r_squared"] = fit.r_squared;
  }
  if (log.initial_state.size() == 0) {
    throw ConfigError("trajectory", "bound needs the initial state; rerun without --trajectory");
  }
  const double R0 = fs.objective.value(fs.theta(log.initial_state)) - fs.objective.min_value;
  const RateBound b = gd_rate_bound(log, *alpha1, *c1, cfg.backtrack.lambda, R0);
  out["alpha1"] = *alpha1;
  out["c1"] = *c1;
  out["note"] = "the bound decays in lambda * eta_sum (the lambda factor is included)";

  json rows = json::array();
  double S = 0.0;
  long violations = 0;
  for (std::size_t n = 0; n < b.value.size(); ++n) {
    json row = {{"n", n}, {"eta_sum", S}, {"R_bound", b.value[n]},
                {"dist_bound", nullable(b.distance[n])}};
    const Vector* state = n == 0 ? &log.initial_state
                                 : (log.records[n - 1].state ? &*log.records[n - 1].state : nullptr);
    if (state) {
      const double R = fs.objective.value(fs.theta(*state)) - fs.objective.min_value;
      row["R_observed"] = R;
      if (R > b.value[n]) ++violations;
    }
    rows.push_back(std::move(row));
    if (n < log.records.size()) S += log.records[n].eta;
  }
  out["violations"] = violations;
  out["rows"] = std::move(rows);
  print(out);
  return 0;
}

int cmd_grad_check(const SettingOptions& so, int points, double h, double tol) {
  const ExperimentConfig cfg = make_config(so.collect());
  const Objective obj = build_problem(cfg);
  Rng rng(cfg.seed);
  std::vector<Vector> pts;
  for (int i = 0; i < points; ++i) pts.push_back(sample_box(rng, obj.dim, cfg.init.low, cfg.init.high));
  const GradCheckReport rep = grad_check(obj, pts, h, tol);
  print({{"problem", obj.name},
         {"points", points},
         {"h", h},
         {"tol", tol},
         {"worst", nullable(rep.worst)},
         {"status", rep.passed ? "pass" : "fail"}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov-controlled backtracking optimizers and diagnostics"};
  app.require_subcommand(1);

  SettingOptions run_opts, cert_opts, fit_opts, bound_opts, grad_opts;

  auto* run = app.add_subcommand("run", "run one experiment, print its summary");
  run_opts.attach(run);

  std::string suite_file, out_dir = "suite_out";
  unsigned threads = 0;
  auto* suite = app.add_subcommand("suite", "run a suite file into a directory");
  suite->add_option("file", suite_file, "suite file")->required();
  suite->add_option("--out", out_dir, "output directory");
  suite->add_option("--threads", threads, "worker threads (default LYAPCTL_THREADS or all cores)");

  int grid_m = 33, samples = 10;
  double bisect_tol = 1e-6;
  auto* certify = app.add_subcommand("certify", "certified step bound at the initial state");
  cert_opts.attach(certify);
  certify->add_option("--grid-m", grid_m, "grid points for the max over [0, eta]");
  certify->add_option("--bisect-tol", bisect_tol, "relative bisection tolerance");
  certify->add_option("--samples", samples, "steps checked against the Armijo gap");

  double min_gap = 1e-13;
  std::string trajectory;
  auto* fit = app.add_subcommand("fit-loja", "fit the Lojasiewicz exponent along a run");
  fit_opts.attach(fit);
  fit->add_option("--min-gap", min_gap, "drop states with R - R* below this");
  fit->add_option("--trajectory", trajectory, "read the run from a trajectory CSV");

  RegimeArgs ra;
  auto* regime = app.add_subcommand("regime", "classify the convergence regime");
  regime->add_option("--alpha1", ra.alpha1);
  regime->add_option("--gamma", ra.gamma);
  regime->add_option("--alpha2", ra.alpha2);
  regime->add_option("--lambda", ra.lambda);
  regime->add_option("--c", ra.c);
  regime->add_option("--c1", ra.c1);
  regime->add_option("--c2", ra.c2);
  regime->add_flag("--pgd", ra.pgd, "use the rescaled-gradient parameter mapping");
  regime->add_option("--p", ra.p, "pGD exponent (with --pgd)");

  std::optional<double> b_alpha1, b_c1;
  auto* bound = app.add_subcommand("bound", "GD rate bound against an observed run");
  bound_opts.attach(bound);
  bound->add_option("--alpha1", b_alpha1, "Lojasiewicz exponent (fitted when omitted)");
  bound->add_option("--c1", b_c1, "Lojasiewicz constant (fitted when omitted)");
  bound->add_option("--min-gap", min_gap);
  bound->add_option("--trajectory", trajectory);

  int gc_points = 100;
  double gc_h = 1e-6, gc_tol = 1e-5;
  auto* grad = app.add_subcommand("grad-check", "finite-difference gradient check");
  grad_opts.attach(grad);
  grad->add_option("--points", gc_points);
  grad->add_option("--step", gc_h, "finite-difference step");
  grad->add_option("--tol", gc_tol);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*suite) return cmd_suite(suite_file, out_dir, threads);
    if (*certify) return cmd_certify(cert_opts, grid_m, bisect_tol, samples);
    if (*fit) return cmd_fit(fit_opts, min_gap, trajectory);
    if (*regime) return cmd_regime(ra);
    if (*bound) return cmd_bound(bound_opts, b_alpha1, b_c1, min_gap, trajectory);
    if (*grad) return cmd_grad_check(grad_opts, gc_points, gc_h, gc_tol);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InsufficientData& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
