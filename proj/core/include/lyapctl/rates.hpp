#pragma once

#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "lyapctl/backtrack.hpp"
#include "lyapctl/objective.hpp"

namespace lyapctl {

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LojasiewiczFit {
  double alpha1 = 0.0;
  double c1 = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
};

/// Least-squares fit of log ||grad R(theta_n)|| = log c1 + (1 - alpha1)
/// log(R(theta_n) - R*) over the snapshot states of `run` (and its initial
/// state). States with R - R* <= min_gap are dropped. Needs at least 10
/// usable states.
LojasiewiczFit lojasiewicz_fit(const RunLog& run, const Objective& obj,
                               double min_gap = 1e-13);

enum class Regime { subexponential, exponential, finite_time };

std::string_view to_string(Regime r);

struct RegimeReport {
  double alpha1 = 0.0;
  double gamma = 0.0;
  double alpha2 = 0.0;
  Regime regime = Regime::exponential;
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  std::optional<double> fit_quality;
};

/// Classifies by comparing alpha2 / (1 - alpha1) with gamma (equality within
/// 1e-9) and fills
///   C1 = 1 / (lambda c c1^gamma (1 - gamma (1 - alpha1)))
///   C2 = lambda c c1^gamma c2 (gamma (1 - alpha1) - alpha2)
///   C3 = c2 / C1.
RegimeReport classify_regime(double alpha1, double gamma, double alpha2, double lambda,
                             double c, double c1, double c2);

/// Rescaled gradient descent: gamma = 1, c = 1, c2 = c1^{1/(p-1)},
/// alpha2 = (alpha1 + p - 2) / (p - 1). The regime follows alpha1 vs 1/p.
RegimeReport pgd_regime(double alpha1, double p, double lambda = 0.5, double c1 = 1.0);

/// Bounds for u_{n+1} - u_n <= -v_n u_n^alpha, indices 0..v.size():
///   alpha > 1: [u0^{1-alpha} + (alpha - 1) S_n]^{-1/(alpha-1)}
///   alpha = 1: u0 exp(-S_n)
///   alpha < 1: [u0^{1-alpha} - (1 - alpha) S_n]^{1/(1-alpha)}, 0 once the
///              bracket is <= 0
/// where S_n = v_0 + ... + v_{n-1}.
std::vector<double> gronwall_power_bound(double u0, const std::vector<double>& v,
                                         double alpha);

struct RateBound {
  /// Bound on R(theta_n) - R*, n = 0..records.
  std::vector<double> value;
  /// Bound on ||theta_n - theta*||: phi(value) / lambda with
  /// phi(x) = x^alpha1 / (c1 alpha1).
  std::vector<double> distance;
};

/// GD rate bound with Lojasiewicz desingularizer phi(x) = x^a / (c1 a):
///   R_n <= Psi^{-1}(Psi(R0) - lambda sum_{k<n} eta_k),
///   Psi(x) = x^{2a-1} / (c1^2 (2a - 1))   (c1^-2 ln x when a = 1/2).
/// The sum carries the factor lambda. Entries are 0 once the argument leaves
/// the range of Psi (finite-time branch).
RateBound gd_rate_bound(const RunLog& run, double alpha1, double c1, double lambda,
                        double R0);

}  // namespace lyapctl
