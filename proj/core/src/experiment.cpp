#include "lyapctl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "lyapctl/sampling.hpp"
#include "lyapctl/trajectory_io.hpp"

namespace lyapctl {
namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "seed",
      "flow.name",          "flow.beta1bar",       "flow.eps-a",       "flow.p",
      "problem.name",       "problem.n",           "problem.cond",     "problem.q",
      "policy.name",        "policy.lambda",       "policy.f1",        "policy.f2",
      "policy.eta-init",    "policy.eps",          "policy.max-iters", "policy.max-backtracks",
      "policy.eta-min",     "policy.accept-slack", "policy.relative-slack",
      "init.mode",          "init.state",          "init.low",         "init.high",
      "init.radius",        "init.center",         "init.count",
      "output.csv",         "output.summary",      "output.stride",
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  if (!v.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) throw ConfigError(key, "not a number: '" + v + "'");
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key, "not an integer: '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key, "not a boolean: '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

// Explicit state of either full length or theta length.
Vector as_state(const FlowSystem& fs, const std::vector<double>& v, const std::string& key) {
  const Vector x = to_vector(v);
  if (x.size() == fs.dim) return x;
  if (x.size() == fs.theta_block().size) return lift_theta(fs, x);
  throw ConfigError(key, "expected " + std::to_string(fs.dim) + " or " +
                             std::to_string(fs.theta_block().size) + " values");
}

Vector ball_center(const ExperimentConfig& cfg, const FlowSystem& fs) {
  if (!cfg.init.state.empty()) return as_state(fs, cfg.init.state, "init.center");
  auto m = lifted_minimizer(fs);
  if (!m) throw ConfigError("init.center", "problem has no known minimizer");
  return *m;
}

}  // namespace

Settings parse_settings(const std::string& text) {
  Settings s;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected key=value");
    }
    const std::string key = normalize_key(trim(std::string_view(t).substr(0, eq)));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
    s[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return s;
}

Settings load_settings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_settings(buf.str());
}

Settings merge(Settings base, const Settings& overrides) {
  for (const auto& [k, v] : overrides) base[normalize_key(k)] = v;
  return base;
}

ExperimentConfig make_config(const Settings& raw) {
  ExperimentConfig cfg;
  Settings s;
  for (const auto& [k, v] : raw) s[normalize_key(k)] = v;
  for (const auto& [k, v] : s) {
    if (!known_keys().count(k)) throw ConfigError(k, "unknown key");
  }
  auto get = [&](const std::string& k) -> const std::string* {
    auto it = s.find(k);
    return it == s.end() ? nullptr : &it->second;
  };

  if (auto v = get("seed")) {
    const long seed = to_long("seed", *v);
    if (seed < 0) throw ConfigError("seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }

  if (auto v = get("flow.name")) cfg.flow = *v;
  if (cfg.flow != "gd" && cfg.flow != "momentum" && cfg.flow != "rmsprop" && cfg.flow != "pgd") {
    throw ConfigError("flow.name", "unknown flow '" + cfg.flow + "' (gd, momentum, rmsprop, pgd)");
  }
  if (auto v = get("flow.beta1bar")) cfg.beta1bar = to_double("flow.beta1bar", *v);
  if (auto v = get("flow.eps-a")) cfg.eps_a = to_double("flow.eps-a", *v);
  if (auto v = get("flow.p")) cfg.p = to_double("flow.p", *v);

  if (auto v = get("problem.name")) cfg.problem = *v;
  if (cfg.problem != "quadratic" && cfg.problem != "rosenbrock" && cfg.problem != "norm-power") {
    throw ConfigError("problem.name",
                      "unknown problem '" + cfg.problem + "' (quadratic, rosenbrock, norm-power)");
  }
  if (auto v = get("problem.n")) cfg.n = to_long("problem.n", *v);
  if (auto v = get("problem.cond")) cfg.cond = to_double("problem.cond", *v);
  if (auto v = get("problem.q")) cfg.q = to_double("problem.q", *v);

  if (auto v = get("policy.name")) {
    if (*v == "lcr") cfg.policy = Policy::lcr;
    else if (*v == "lcm") cfg.policy = Policy::lcm;
    else if (*v == "constant") cfg.policy = Policy::constant;
    else throw ConfigError("policy.name", "unknown policy '" + *v + "' (lcr, lcm, constant)");
  }
  BacktrackConfig& b = cfg.backtrack;
  if (auto v = get("policy.lambda")) b.lambda = to_double("policy.lambda", *v);
  if (auto v = get("policy.f1")) b.f1 = to_double("policy.f1", *v);
  if (auto v = get("policy.f2")) b.f2 = to_double("policy.f2", *v);
  if (auto v = get("policy.eta-init")) b.eta_init = to_double("policy.eta-init", *v);
  if (auto v = get("policy.eps")) b.epsilon = to_double("policy.eps", *v);
  if (auto v = get("policy.max-iters")) b.max_iters = to_long("policy.max-iters", *v);
  if (auto v = get("policy.max-backtracks")) {
    b.max_backtracks = static_cast<int>(to_long("policy.max-backtracks", *v));
  }
  if (auto v = get("policy.eta-min")) b.eta_min = to_double("policy.eta-min", *v);
  if (auto v = get("policy.accept-slack")) b.accept_slack = to_double("policy.accept-slack", *v);
  if (auto v = get("policy.relative-slack")) {
    b.relative_slack = to_bool("policy.relative-slack", *v);
  }
  if (auto v = get("output.stride")) {
    b.snapshot_stride = static_cast<int>(to_long("output.stride", *v));
  }
  validate(b);

  InitSpec& in = cfg.init;
  if (auto v = get("init.mode")) {
    if (*v == "explicit") in.mode = InitSpec::Mode::explicit_state;
    else if (*v == "box") in.mode = InitSpec::Mode::box;
    else if (*v == "ball") in.mode = InitSpec::Mode::ball;
    else throw ConfigError("init.mode", "unknown mode '" + *v + "' (explicit, box, ball)");
  } else if (get("init.state")) {
    in.mode = InitSpec::Mode::explicit_state;
  }
  if (auto v = get("init.state")) in.state = to_list("init.state", *v);
  if (auto v = get("init.center")) in.state = to_list("init.center", *v);
  if (auto v = get("init.low")) in.low = to_double("init.low", *v);
  if (auto v = get("init.high")) in.high = to_double("init.high", *v);
  if (auto v = get("init.radius")) in.radius = to_double("init.radius", *v);
  if (auto v = get("init.count")) in.count = static_cast<int>(to_long("init.count", *v));
  if (in.mode == InitSpec::Mode::explicit_state && in.state.empty()) {
    throw ConfigError("init.state", "explicit mode needs a state");
  }
  if (!(in.low < in.high)) throw ConfigError("init.low", "must be below init.high");
  if (!(in.radius > 0.0)) throw ConfigError("init.radius", "must be positive");
  if (in.count < 1) throw ConfigError("init.count", "must be >= 1");

  if (auto v = get("output.csv")) cfg.csv_path = *v;
  if (auto v = get("output.summary")) cfg.summary_path = *v;

  // Surface construction errors (dimension, parameter ranges) at config time.
  build_flow(cfg);

  cfg.echo = s;
  return cfg;
}

Objective build_problem(const ExperimentConfig& cfg) {
  if (cfg.problem == "quadratic") return quadratic_conditioned(cfg.n, cfg.cond);
  if (cfg.problem == "rosenbrock") return rosenbrock(cfg.n);
  if (cfg.problem == "norm-power") return norm_power(cfg.n, cfg.q);
  throw ConfigError("problem.name", "unknown problem '" + cfg.problem + "'");
}

FlowSystem build_flow(const ExperimentConfig& cfg) {
  const Objective obj = build_problem(cfg);
  if (cfg.flow == "gd") return make_gd(obj);
  if (cfg.flow == "momentum") return make_momentum(obj, cfg.beta1bar);
  if (cfg.flow == "rmsprop") return make_rmsprop(obj, cfg.eps_a);
  if (cfg.flow == "pgd") return make_pgd(obj, PGDParams{cfg.p});
  throw ConfigError("flow.name", "unknown flow '" + cfg.flow + "'");
}

Vector initial_state(const ExperimentConfig& cfg, const FlowSystem& fs, int replica) {
  Rng rng(cfg.seed + static_cast<std::uint64_t>(replica));
  switch (cfg.init.mode) {
    case InitSpec::Mode::explicit_state:
      return as_state(fs, cfg.init.state, "init.state");
    case InitSpec::Mode::box: {
      Vector y = lift_theta(fs, sample_box(rng, fs.theta_block().size, cfg.init.low, cfg.init.high));
      // Momentum at rest sits on Vdot = 0 and would stop before the first
      // step, so the velocity is drawn from the same box.
      for (const Block& b : fs.blocks) {
        if (b.name == "v") y.segment(b.offset, b.size) = sample_box(rng, b.size, cfg.init.low, cfg.init.high);
      }
      return y;
    }
    case InitSpec::Mode::ball: {
      const Vector center = ball_center(cfg, fs);
      const Vector theta_c = fs.theta(center);
      Vector y = center;
      y.segment(fs.theta_block().offset, fs.theta_block().size) =
          sample_ball(rng, theta_c, cfg.init.radius);
      return y;
    }
  }
  throw ConfigError("init.mode", "unhandled mode");
}

RunLog run_policy(const ExperimentConfig& cfg, const FlowSystem& fs, const Vector& y0) {
  const BacktrackConfig& b = cfg.backtrack;
  switch (cfg.policy) {
    case Policy::lcr: return run_lcr(fs, y0, b);
    case Policy::lcm: return run_lcm(fs, y0, b);
    case Policy::constant:
      return run_constant(fs, y0, b.eta_init, b.max_iters, b.epsilon, b.lambda,
                          b.snapshot_stride);
  }
  throw ConfigError("policy.name", "unhandled policy");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const FlowSystem fs = build_flow(cfg);
  const Vector y0 = initial_state(cfg, fs, 0);
  ExperimentResult res;
  res.log = run_policy(cfg, fs, y0);
  nlohmann::json echo(cfg.echo);
  res.summary = run_summary(res.log, fs, echo);
  if (!cfg.csv_path.empty()) write_trajectory_csv(cfg.csv_path, res.log, fs.dim);
  if (!cfg.summary_path.empty()) write_json(cfg.summary_path, res.summary);
  return res;
}

double max_excursion(const RunLog& log, const Vector& center) {
  double m = 0.0;
  if (log.initial_state.size() == center.size()) m = (log.initial_state - center).norm();
  for (const StepRecord& r : log.records) {
    if (r.state && r.state->size() == center.size()) m = std::max(m, (*r.state - center).norm());
  }
  return m;
}

std::vector<SuiteEntry> parse_suite(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> sections;  // name, body
  std::string shared;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const std::string t = trim(line);
    if (t.size() >= 2 && t.front() == '[' && t.back() == ']') {
      sections.emplace_back(trim(std::string_view(t).substr(1, t.size() - 2)), "");
      continue;
    }
    (sections.empty() ? shared : sections.back().second) += line + "\n";
  }
  const Settings base = parse_settings(shared);
  std::vector<SuiteEntry> out;
  std::set<std::string> seen;
  for (auto& [name, body] : sections) {
    if (name.empty()) throw ConfigError("suite", "empty section name");
    if (!seen.insert(name).second) throw ConfigError("suite", "duplicate section '" + name + "'");
    out.push_back({name, merge(base, parse_settings(body))});
  }
  return out;
}

namespace {

nlohmann::json run_suite_entry(const SuiteEntry& e, const std::filesystem::path& dir) {
  nlohmann::json item;
  item["name"] = e.name;
  try {
    Settings s = e.settings;
    s.erase("output.csv");
    s.erase("output.summary");
    ExperimentConfig cfg = make_config(s);
    const std::string summary_path = (dir / (e.name + ".summary.json")).string();
    if (cfg.init.count == 1) {
      cfg.csv_path = (dir / (e.name + ".csv")).string();
      cfg.summary_path = summary_path;
      const ExperimentResult r = run_experiment(cfg);
      item["status"] = r.summary["status"];
      item["csv"] = cfg.csv_path;
      item["summary"] = summary_path;
      return item;
    }

    const FlowSystem fs = build_flow(cfg);
    const Vector center = cfg.init.mode == InitSpec::Mode::ball
                              ? ball_center(cfg, fs)
                              : lifted_minimizer(fs).value_or(Vector::Zero(fs.dim));
    nlohmann::json reps = nlohmann::json::array();
    std::map<std::string, int> counts;
    double worst = 0.0;
    for (int r = 0; r < cfg.init.count; ++r) {
      const Vector y0 = initial_state(cfg, fs, r);
      const RunLog log = run_policy(cfg, fs, y0);
      const double exc = max_excursion(log, center);
      worst = std::max(worst, exc);
      const std::string status(to_string(log.termination));
      ++counts[status];
      reps.push_back({{"seed", cfg.seed + static_cast<std::uint64_t>(r)},
                      {"status", status},
                      {"iterations", log.wall_iterations},
                      {"initial_distance", (y0 - center).norm()},
                      {"max_excursion", exc}});
    }
    nlohmann::json agg;
    agg["replicates"] = cfg.init.count;
    agg["status_counts"] = counts;
    agg["max_excursion"] = worst;
    agg["runs"] = reps;
    agg["config_echo"] = nlohmann::json(cfg.echo);
    write_json(summary_path, agg);
    item["status"] = "aggregate";
    item["summary"] = summary_path;
    item["replicates"] = cfg.init.count;
    item["max_excursion"] = worst;
    item["status_counts"] = counts;
  } catch (const ConfigError& ex) {
    item["status"] = "config_error";
    item["error"] = ex.what();
  } catch (const std::exception& ex) {
    item["status"] = "error";
    item["error"] = ex.what();
  }
  return item;
}

}  // namespace

nlohmann::json run_suite(const std::vector<SuiteEntry>& entries, const std::string& out_dir,
                         unsigned threads) {
  const std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());

  std::vector<nlohmann::json> results(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      results[i] = run_suite_entry(entries[i], dir);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, entries.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }

  nlohmann::json index;
  index["experiments"] = results;
  index["count"] = entries.size();
  write_json((dir / "index.json").string(), index);
  return index;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("LYAPCTL_THREADS")) {
    unsigned v = 0;
    const std::string s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace lyapctl
