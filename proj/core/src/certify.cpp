#include "lyapctl/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lyapctl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double q_from(const FlowSystem& fs, const Vector& y, double eta, double lambda, int m,
              double Vdot) {
  double gmax = 0.0;
  for (int k = 0; k < m; ++k) {
    const double x = eta * static_cast<double>(k) / static_cast<double>(m - 1);
    const double g = g_eval(fs, y, x);
    if (!std::isfinite(g)) return kInf;
    gmax = std::max(gmax, g);
  }
  return eta * (gmax + 1.0) + 2.0 * (1.0 - lambda) * Vdot;
}

}  // namespace

double g_eval(const FlowSystem& fs, const Vector& y, double x) {
  if (y.size() != fs.dim) throw DimensionError(fs.name + ": state has wrong length");
  const double g = fs.hess_quadform(y, x);
  return std::isnan(g) ? kInf : g;
}

double q_eval(const FlowSystem& fs, const Vector& y, double eta, double lambda,
              int grid_points) {
  if (!(eta > 0.0)) throw ConfigError("eta", "must be positive");
  if (grid_points < 2) throw ConfigError("grid-m", "needs at least 2 grid points");
  return q_from(fs, y, eta, lambda, grid_points, fs.lyapunov_rate(y));
}

CertifiedStep certify_step(const FlowSystem& fs, const Vector& y, double lambda,
                           int grid_points, double bisection_tol, double eta_min) {
  if (grid_points < 2) throw ConfigError("grid-m", "needs at least 2 grid points");
  if (!(bisection_tol > 0.0)) throw ConfigError("bisect-tol", "must be positive");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("lambda", "must lie in (0, 1)");
  if (y.size() != fs.dim) throw DimensionError(fs.name + ": state has wrong length");
  const double Vdot = fs.lyapunov_rate(y);
  if (!(Vdot < -1e-14)) {
    throw ConfigError("state", "Vdot(y) must be < -1e-14 (state too close to the zero set)");
  }
  auto q = [&](double eta) { return q_from(fs, y, eta, lambda, grid_points, Vdot); };

  // Bracket lo < hi with q(lo) <= 0 < q(hi); q is increasing in eta.
  double lo = 0.0;
  double hi = 1.0;
  if (q(hi) <= 0.0) {
    lo = hi;
    while (q(hi * 2.0) <= 0.0) {
      hi *= 2.0;
      lo = hi;
      if (hi > 1e300) throw NotCertifiable("certified set appears unbounded");
    }
    hi *= 2.0;
  } else {
    lo = hi / 2.0;
    while (q(lo) > 0.0) {
      hi = lo;
      lo /= 2.0;
      if (lo < eta_min) throw NotCertifiable("no step above eta_min satisfies q <= 0");
    }
  }
  while (hi - lo > bisection_tol * lo) {
    const double mid = 0.5 * (lo + hi);
    if (q(mid) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (lo < eta_min) throw NotCertifiable("no step above eta_min satisfies q <= 0");

  CertifiedStep out;
  out.y = y;
  out.eta_max_certified = lo;
  out.grid_points = grid_points;
  out.bisection_tol = bisection_tol;
  out.eta_upper = hi;
  return out;
}

}  // namespace lyapctl
