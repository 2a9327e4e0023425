#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lyapctl/types.hpp"

namespace lyapctl {

/// Differentiable objective R with analytic gradient and Hessian quadratic
/// form. Every corpus objective is shifted so that its global minimum is 0.
struct Objective {
  std::string name;
  Index dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  /// d^T (Hessian of R at theta) d. Empty when no analytic form is known.
  std::function<double(const Vector& theta, const Vector& d)> hess_quadform;
  double min_value = 0.0;
  std::vector<Vector> minimizers;
  /// Analytic Lojasiewicz exponent at the minimizer, when known.
  std::optional<double> lojasiewicz_alpha;
};

/// R(theta) = 1/2 theta^T A theta + b^T theta - c with c chosen so min R = 0.
/// Throws ConfigError unless A is symmetric positive definite.
Objective quadratic(const Matrix& A, const Vector& b);

/// Diagonal quadratic with eigenvalues log-spaced in [1, cond], b = 0.
Objective quadratic_conditioned(Index n, double cond);

/// Extended Rosenbrock: sum over pairs (x, y) = (theta_{2i}, theta_{2i+1}) of
/// (1 - x)^2 + 100 (y - x^2)^2. Requires n even, n >= 2.
Objective rosenbrock(Index n);

/// R(theta) = ||theta||^{2q}, q >= 1. Lojasiewicz exponent 1/(2q) at 0.
Objective norm_power(Index n, double q);

struct GradCheckReport {
  std::vector<double> max_rel_error;  // one entry per point
  double worst = 0.0;
  bool passed = true;
};

/// Central-difference check of `obj.gradient` at each point. The per-component
/// error is |fd - g| / max(1, |g|).
GradCheckReport grad_check(const Objective& obj, const std::vector<Vector>& points,
                           double h, double tol);

}  // namespace lyapctl
