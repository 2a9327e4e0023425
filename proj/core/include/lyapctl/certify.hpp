#pragma once

#include <stdexcept>

#include "lyapctl/flow.hpp"

namespace lyapctl {

/// g(y, x) = |F(y)^T Hess V(y + x F(y)) F(y)|, +inf when y + x F(y) leaves
/// the domain of V.
double g_eval(const FlowSystem& fs, const Vector& y, double x);

/// q(y, eta) = eta (max_{x in [0, eta]} g(y, x) + 1) + 2 (1 - lambda) Vdot(y)
/// with the max taken over `grid_points` uniformly spaced x including both
/// endpoints. Exact for constant-Hessian flows, a lower bound otherwise.
double q_eval(const FlowSystem& fs, const Vector& y, double eta, double lambda,
              int grid_points = 33);

struct CertifiedStep {
  Vector y;
  double eta_max_certified = 0.0;
  int grid_points = 0;
  double bisection_tol = 0.0;
  /// Smallest bracket end known to have q > 0.
  double eta_upper = 0.0;
};

class NotCertifiable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest eta (to relative `bisection_tol`) with q(y, eta) <= 0. Every step
/// in (0, eta_max_certified] then satisfies f(y, eta) <= 0 up to grid error.
/// Requires Vdot(y) < -1e-14; throws NotCertifiable if no eta >= eta_min
/// certifies.
CertifiedStep certify_step(const FlowSystem& fs, const Vector& y, double lambda,
                           int grid_points = 33, double bisection_tol = 1e-6,
                           double eta_min = 1e-16);

}  // namespace lyapctl
