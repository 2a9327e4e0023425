#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lyapctl/objective.hpp"
#include "lyapctl/types.hpp"

namespace lyapctl {

/// Named contiguous span of a packed state.
struct Block {
  std::string name;
  Index offset = 0;
  Index size = 0;
};

/// An ODE y' = F(y) paired with a Lyapunov function V.
///
/// V returns +inf outside its domain (for example a negative RMSProp
/// accumulator), which the backtracking loop treats as a rejected trial.
/// Instances are immutable once built and all evaluators are pure.
struct FlowSystem {
  std::string name;
  Index dim = 0;
  std::vector<Block> blocks;
  Objective objective;

  std::function<Vector(const Vector&)> rhs;
  std::function<double(const Vector&)> lyapunov;
  std::function<double(const Vector&)> lyapunov_rate;
  /// g(y, x) = |F(y)^T Hess V(y + x F(y)) F(y)|; +inf on domain exit.
  std::function<double(const Vector& y, double x)> hess_quadform;

  /// Span holding the optimization variable theta.
  const Block& theta_block() const;
  Vector theta(const Vector& y) const;
  /// ||grad R(theta(y))||.
  double grad_norm(const Vector& y) const;
};

struct FlowEval {
  Vector F;
  double V = 0.0;
  double Vdot = 0.0;
};

/// Evaluates F, V and Vdot at the same state. Throws DimensionError when
/// `y.size() != fs.dim`.
FlowEval eval_flow(const FlowSystem& fs, const Vector& y);

/// Gradient flow: F = -grad R, V = R, Vdot = -||grad R||^2.
FlowSystem make_gd(const Objective& problem);

/// Heavy-ball flow on y = (v, theta):
///   F = (-b v - b grad R, v), V = R + ||v||^2 / (2 b), Vdot = -||v||^2.
FlowSystem make_momentum(const Objective& problem, double beta1bar);

/// RMSProp flow on y = (s, theta):
///   F = (-s + g*g, -g / sqrt(eps_a + s)),
///   V = 2 (R + sum sqrt(eps_a + s_i)), +inf when some s_i < 0.
FlowSystem make_rmsprop(const Objective& problem, double eps_a);

struct PGDParams {
  /// p > 1; +inf gives the normalized gradient flow.
  double p = 2.0;
};

/// Rescaled gradient flow F = -grad R / ||grad R||^{(p-2)/(p-1)} (0 at
/// critical points), V = R, Vdot = -||grad R||^{p/(p-1)}.
FlowSystem make_pgd(const Objective& problem, PGDParams params);

/// d^T Hess(V)(z) d by a second central difference of V along d. Used when
/// the objective has no analytic Hessian form.
double fd_directional_curvature(const std::function<double(const Vector&)>& V,
                                const Vector& z, const Vector& d);

/// Known minimizer of the objective lifted into the flow's state (auxiliary
/// blocks set to zero).
std::optional<Vector> lifted_minimizer(const FlowSystem& fs);

/// Embeds theta into a full state with auxiliary blocks zeroed.
Vector lift_theta(const FlowSystem& fs, const Vector& theta);

}  // namespace lyapctl
