#include "lyapctl/backtrack.hpp"

#include <cmath>
#include <limits>

namespace lyapctl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int resolve_stride(int stride, Index dim) {
  if (stride > 0) return stride;
  return dim <= 10 ? 1 : 50;
}

double slack_for(const BacktrackConfig& cfg, double V0) {
  return cfg.relative_slack ? 1e-12 * (1.0 + std::abs(V0)) : cfg.accept_slack;
}

void check_start(const FlowSystem& fs, const Vector& y0, double V0) {
  if (y0.size() != fs.dim) {
    throw DimensionError(fs.name + ": initial state has length " + std::to_string(y0.size()) +
                         ", expected " + std::to_string(fs.dim));
  }
  if (!std::isfinite(V0)) {
    throw ConfigError("init", "V(y0) must be finite");
  }
}

RunLog make_log(const FlowSystem& fs, const Vector& y0) {
  RunLog log;
  log.initial_state = y0;
  log.final_state = y0;
  log.theta_block = fs.theta_block();
  return log;
}

// Shared outer loop of LCR and LCM; `memory` selects the LCM restart rule.
RunLog run_controlled(const FlowSystem& fs, const Vector& y0, const BacktrackConfig& cfg,
                      bool memory) {
  validate(cfg);
  Vector y = y0;
  double V = fs.lyapunov(y);
  check_start(fs, y0, V);
  Vector F = fs.rhs(y);
  double Vdot = fs.lyapunov_rate(y);

  RunLog log = make_log(fs, y0);
  const int stride = resolve_stride(cfg.snapshot_stride, fs.dim);
  double eta = cfg.eta_init;

  while (std::abs(Vdot) > cfg.epsilon) {
    if (log.wall_iterations >= cfg.max_iters) {
      log.termination = Termination::max_iters;
      break;
    }
    if (!std::isfinite(Vdot)) {
      log.termination = Termination::backtrack_failure;
      break;
    }
    LineSearchResult ls = ls_backtrack(fs, y, F, V, Vdot, eta, cfg);
    if (!ls.ok()) {
      log.termination = Termination::backtrack_failure;
      break;
    }

    StepRecord rec;
    rec.iter = log.wall_iterations;
    rec.eta = ls.eta;
    rec.n_rejections = ls.n_rejections;
    rec.V_before = V;
    rec.V_after = ls.V_next;
    rec.Vdot_before = Vdot;
    rec.armijo_gap = ls.gap;
    rec.state_norm = ls.y_next.norm();
    if ((rec.iter + 1) % stride == 0) rec.state = ls.y_next;
    log.records.push_back(std::move(rec));
    log.eta_sum += ls.eta;
    ++log.wall_iterations;

    y = std::move(ls.y_next);
    V = ls.V_next;
    F = fs.rhs(y);
    Vdot = fs.lyapunov_rate(y);
    eta = memory ? cfg.f2 * ls.eta : cfg.eta_init;
  }

  if (!log.records.empty() && !log.records.back().state) log.records.back().state = y;
  log.final_state = y;
  return log;
}

}  // namespace

void validate(const BacktrackConfig& cfg) {
  if (!(cfg.lambda > 0.0 && cfg.lambda < 1.0)) {
    throw ConfigError("policy.lambda", "must lie in (0, 1)");
  }
  if (!(cfg.f1 > 1.0) || !std::isfinite(cfg.f1)) throw ConfigError("policy.f1", "must be > 1");
  if (!(cfg.f2 > 1.0) || !std::isfinite(cfg.f2)) throw ConfigError("policy.f2", "must be > 1");
  if (!(cfg.eta_init > 0.0) || !std::isfinite(cfg.eta_init)) {
    throw ConfigError("policy.eta-init", "must be a finite positive number");
  }
  if (!(cfg.epsilon > 0.0)) throw ConfigError("policy.eps", "must be positive");
  if (cfg.max_backtracks < 0) throw ConfigError("policy.max-backtracks", "must be >= 0");
  if (!(cfg.eta_min > 0.0)) throw ConfigError("policy.eta-min", "must be positive");
  if (cfg.max_iters < 0) throw ConfigError("policy.max-iters", "must be >= 0");
  if (!(cfg.accept_slack >= 0.0)) throw ConfigError("policy.accept-slack", "must be >= 0");
  if (cfg.snapshot_stride < 0) throw ConfigError("output.stride", "must be >= 0");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iters: return "max_iters";
    case Termination::backtrack_failure: return "backtrack_failure";
    case Termination::diverged: return "diverged";
  }
  return "unknown";
}

std::optional<Termination> termination_from_string(std::string_view s) {
  for (Termination t : {Termination::converged, Termination::max_iters,
                        Termination::backtrack_failure, Termination::diverged}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

double armijo_gap(const FlowSystem& fs, const Vector& y, double eta, double lambda) {
  const double V0 = fs.lyapunov(y);
  const double V1 = fs.lyapunov(y + eta * fs.rhs(y));
  if (std::isinf(V1) && V1 > 0.0) return kInf;
  return V1 - V0 - lambda * eta * fs.lyapunov_rate(y);
}

LineSearchResult ls_backtrack(const FlowSystem& fs, const Vector& y, const Vector& F0,
                              double V0, double Vdot0, double eta_start,
                              const BacktrackConfig& cfg) {
  const double slack = slack_for(cfg, V0);
  LineSearchResult res;
  double eta = eta_start;
  for (int k = 0;; ++k) {
    if (eta < cfg.eta_min) {
      res.status = LineSearchStatus::step_underflow;
      res.eta = eta;
      res.n_rejections = k;
      return res;
    }
    // Trial from y every time; rejected trials leave no trace.
    Vector trial = y + eta * F0;
    const double V1 = fs.lyapunov(trial);
    const double gap = (std::isinf(V1) && V1 > 0.0) ? kInf : V1 - V0 - cfg.lambda * eta * Vdot0;
    if (gap <= slack) {
      res.status = LineSearchStatus::accepted;
      res.eta = eta;
      res.y_next = std::move(trial);
      res.n_rejections = k;
      res.V_next = V1;
      res.gap = gap;
      return res;
    }
    if (k >= cfg.max_backtracks) {
      res.status = LineSearchStatus::too_many_backtracks;
      res.eta = eta;
      res.n_rejections = k + 1;
      return res;
    }
    eta /= cfg.f1;
  }
}

LineSearchResult ls_backtrack(const FlowSystem& fs, const Vector& y, double eta_start,
                              const BacktrackConfig& cfg) {
  validate(cfg);
  if (y.size() != fs.dim) throw DimensionError(fs.name + ": state has wrong length");
  if (!(eta_start > 0.0)) throw ConfigError("eta_start", "must be positive");
  return ls_backtrack(fs, y, fs.rhs(y), fs.lyapunov(y), fs.lyapunov_rate(y), eta_start, cfg);
}

RunLog run_lcr(const FlowSystem& fs, const Vector& y0, const BacktrackConfig& cfg) {
  return run_controlled(fs, y0, cfg, false);
}

RunLog run_lcm(const FlowSystem& fs, const Vector& y0, const BacktrackConfig& cfg) {
  return run_controlled(fs, y0, cfg, true);
}

RunLog run_constant(const FlowSystem& fs, const Vector& y0, double eta, long max_iters,
                    double epsilon, double lambda, int snapshot_stride) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("policy.eta-init", "must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("policy.eps", "must be positive");
  if (max_iters < 0) throw ConfigError("policy.max-iters", "must be >= 0");
  Vector y = y0;
  double V = fs.lyapunov(y);
  check_start(fs, y0, V);
  const double blowup = 1e12 * (1.0 + V);
  double Vdot = fs.lyapunov_rate(y);

  RunLog log = make_log(fs, y0);
  const int stride = resolve_stride(snapshot_stride, fs.dim);

  while (std::abs(Vdot) > epsilon) {
    if (log.wall_iterations >= max_iters) {
      log.termination = Termination::max_iters;
      break;
    }
    Vector next = y + eta * fs.rhs(y);
    const double V1 = fs.lyapunov(next);

    StepRecord rec;
    rec.iter = log.wall_iterations;
    rec.eta = eta;
    rec.V_before = V;
    rec.V_after = V1;
    rec.Vdot_before = Vdot;
    rec.armijo_gap = V1 - V - lambda * eta * Vdot;
    rec.state_norm = next.norm();
    if ((rec.iter + 1) % stride == 0) rec.state = next;
    if (!(rec.armijo_gap <= 0.0)) ++log.dissipation_violations;
    log.records.push_back(std::move(rec));
    log.eta_sum += eta;
    ++log.wall_iterations;

    y = std::move(next);
    V = V1;
    if (!y.allFinite() || !std::isfinite(V) || V > blowup) {
      log.termination = Termination::diverged;
      break;
    }
    Vdot = fs.lyapunov_rate(y);
  }

  if (!log.records.empty() && !log.records.back().state) log.records.back().state = y;
  log.final_state = y;
  return log;
}

}  // namespace lyapctl
