#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "lyapctl/flow.hpp"
#include "lyapctl/types.hpp"

namespace lyapctl {

struct BacktrackConfig {
  double lambda = 0.5;     // dissipation fraction, in (0, 1)
  double f1 = 2.0;         // shrink factor on rejection, > 1
  double f2 = 2.0;         // growth factor after acceptance (LCM), > 1
  double eta_init = 1.0;
  double epsilon = 1e-8;   // stop once |Vdot| <= epsilon
  int max_backtracks = 60;
  double eta_min = 1e-16;
  long max_iters = 100000;
  double accept_slack = 0.0;
  /// When set, the slack is 1e-12 (1 + |V(y)|) instead of accept_slack.
  bool relative_slack = false;
  /// Full state stored every `snapshot_stride` steps; 0 picks 1 for dim <= 10
  /// and 50 otherwise. The final state is always stored.
  int snapshot_stride = 0;
};

/// Throws ConfigError naming the first invalid field.
void validate(const BacktrackConfig& cfg);

enum class Termination { converged, max_iters, backtrack_failure, diverged };

std::string_view to_string(Termination t);
std::optional<Termination> termination_from_string(std::string_view s);

struct StepRecord {
  long iter = 0;
  double eta = 0.0;
  int n_rejections = 0;
  double V_before = 0.0;
  double V_after = 0.0;
  double Vdot_before = 0.0;
  double armijo_gap = 0.0;
  /// ||y_{n+1}||.
  double state_norm = 0.0;
  /// y_{n+1} on snapshot rows.
  std::optional<Vector> state;
};

struct RunLog {
  std::vector<StepRecord> records;
  Termination termination = Termination::converged;
  Vector initial_state;
  Vector final_state;
  double eta_sum = 0.0;
  long wall_iterations = 0;
  Block theta_block;
  /// Constant-step runs only: steps where V_after - V_before > lambda eta Vdot.
  long dissipation_violations = 0;
};

/// f(y, eta) = V(y + eta F(y)) - V(y) - lambda eta Vdot(y); +inf on domain exit.
double armijo_gap(const FlowSystem& fs, const Vector& y, double eta, double lambda);

enum class LineSearchStatus { accepted, too_many_backtracks, step_underflow };

struct LineSearchResult {
  LineSearchStatus status = LineSearchStatus::accepted;
  double eta = 0.0;
  Vector y_next;
  int n_rejections = 0;
  double V_next = 0.0;
  double gap = 0.0;

  bool ok() const { return status == LineSearchStatus::accepted; }
};

/// Tries eta_start, eta_start / f1, eta_start / f1^2, ... and returns the first
/// rung with f(y, eta) <= slack. `V0`, `Vdot0` and `F0` are the values at y.
LineSearchResult ls_backtrack(const FlowSystem& fs, const Vector& y, const Vector& F0,
                              double V0, double Vdot0, double eta_start,
                              const BacktrackConfig& cfg);

LineSearchResult ls_backtrack(const FlowSystem& fs, const Vector& y, double eta_start,
                              const BacktrackConfig& cfg);

/// Lyapunov control with restart: every outer step starts from eta_init.
RunLog run_lcr(const FlowSystem& fs, const Vector& y0, const BacktrackConfig& cfg);

/// Lyapunov control with memory: step n >= 1 starts from f2 * eta_{n-1}.
RunLog run_lcm(const FlowSystem& fs, const Vector& y0, const BacktrackConfig& cfg);

/// Plain explicit Euler with a fixed step. The dissipation inequality (with
/// `lambda`) is monitored, not enforced. Stops as diverged when V exceeds
/// 1e12 (1 + V(y0)) or the state stops being finite.
RunLog run_constant(const FlowSystem& fs, const Vector& y0, double eta, long max_iters,
                    double epsilon, double lambda = 0.5, int snapshot_stride = 0);

}  // namespace lyapctl
