#include "lyapctl/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lyapctl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dim(const FlowSystem& fs, const Vector& y) {
  if (y.size() != fs.dim) {
    throw DimensionError(fs.name + ": state has length " + std::to_string(y.size()) +
                         ", expected " + std::to_string(fs.dim));
  }
}

// d^T Hess R(theta) d, falling back to finite differences of R.
double objective_curvature(const Objective& obj, const Vector& theta, const Vector& d) {
  if (obj.hess_quadform) return obj.hess_quadform(theta, d);
  return fd_directional_curvature(obj.value, theta, d);
}

}  // namespace

const Block& FlowSystem::theta_block() const {
  for (const Block& b : blocks) {
    if (b.name == "theta") return b;
  }
  return blocks.front();
}

Vector FlowSystem::theta(const Vector& y) const {
  const Block& b = theta_block();
  return y.segment(b.offset, b.size);
}

double FlowSystem::grad_norm(const Vector& y) const {
  return objective.gradient(theta(y)).norm();
}

FlowEval eval_flow(const FlowSystem& fs, const Vector& y) {
  check_dim(fs, y);
  return FlowEval{fs.rhs(y), fs.lyapunov(y), fs.lyapunov_rate(y)};
}

double fd_directional_curvature(const std::function<double(const Vector&)>& V,
                                const Vector& z, const Vector& d) {
  const double dn = d.norm();
  if (dn == 0.0) return 0.0;
  const Vector u = d / dn;
  const double h = std::max(1e-4, 1e-4 * z.norm());
  const double vp = V(z + h * u);
  const double v0 = V(z);
  const double vm = V(z - h * u);
  if (!std::isfinite(vp) || !std::isfinite(v0) || !std::isfinite(vm)) return kInf;
  return dn * dn * (vp - 2.0 * v0 + vm) / (h * h);
}

FlowSystem make_gd(const Objective& problem) {
  FlowSystem fs;
  fs.name = "gd";
  fs.dim = problem.dim;
  fs.blocks = {{"theta", 0, problem.dim}};
  fs.objective = problem;
  fs.rhs = [obj = problem](const Vector& y) -> Vector { return -obj.gradient(y); };
  fs.lyapunov = problem.value;
  fs.lyapunov_rate = [obj = problem](const Vector& y) {
    return -obj.gradient(y).squaredNorm();
  };
  fs.hess_quadform = [obj = problem](const Vector& y, double x) {
    const Vector F = -obj.gradient(y);
    const Vector z = y + x * F;
    if (!std::isfinite(obj.value(z))) return kInf;
    return std::abs(objective_curvature(obj, z, F));
  };
  return fs;
}

FlowSystem make_momentum(const Objective& problem, double beta1bar) {
  if (!(beta1bar > 0.0) || !std::isfinite(beta1bar)) {
    throw ConfigError("flow.beta1bar", "must be a finite positive number");
  }
  const Index n = problem.dim;
  FlowSystem fs;
  fs.name = "momentum";
  fs.dim = 2 * n;
  fs.blocks = {{"v", 0, n}, {"theta", n, n}};
  fs.objective = problem;
  const double b = beta1bar;
  fs.rhs = [obj = problem, n, b](const Vector& y) -> Vector {
    Vector F(2 * n);
    const auto v = y.head(n);
    F.head(n) = -b * v - b * obj.gradient(y.tail(n));
    F.tail(n) = v;
    return F;
  };
  fs.lyapunov = [obj = problem, n, b](const Vector& y) {
    return obj.value(y.tail(n)) + y.head(n).squaredNorm() / (2.0 * b);
  };
  fs.lyapunov_rate = [n](const Vector& y) { return -y.head(n).squaredNorm(); };
  fs.hess_quadform = [rhs = fs.rhs, V = fs.lyapunov, obj = problem, n, b](const Vector& y,
                                                                          double x) {
    const Vector F = rhs(y);
    const Vector z = y + x * F;
    if (!std::isfinite(V(z))) return kInf;
    const double form = objective_curvature(obj, z.tail(n), F.tail(n)) +
                        F.head(n).squaredNorm() / b;
    return std::abs(form);
  };
  return fs;
}

FlowSystem make_rmsprop(const Objective& problem, double eps_a) {
  if (!(eps_a > 0.0) || !std::isfinite(eps_a)) {
    throw ConfigError("flow.eps-a", "must be a finite positive number");
  }
  const Index n = problem.dim;
  FlowSystem fs;
  fs.name = "rmsprop";
  fs.dim = 2 * n;
  fs.blocks = {{"s", 0, n}, {"theta", n, n}};
  fs.objective = problem;
  fs.rhs = [obj = problem, n, eps_a](const Vector& y) -> Vector {
    Vector F(2 * n);
    const Vector g = obj.gradient(y.tail(n));
    for (Index i = 0; i < n; ++i) {
      const double d = eps_a + y[i];
      F[i] = -y[i] + g[i] * g[i];
      F[n + i] = d > 0.0 ? -g[i] / std::sqrt(d) : std::numeric_limits<double>::quiet_NaN();
    }
    return F;
  };
  fs.lyapunov = [obj = problem, n, eps_a](const Vector& y) {
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
      // The flow lives on s >= 0; Vdot can turn positive below that.
      if (!(y[i] >= 0.0)) return kInf;
      acc += std::sqrt(eps_a + y[i]);
    }
    return 2.0 * (obj.value(y.tail(n)) + acc);
  };
  fs.lyapunov_rate = [obj = problem, n, eps_a](const Vector& y) {
    const Vector g = obj.gradient(y.tail(n));
    double r = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double d = eps_a + y[i];
      if (!(d > 0.0)) return std::numeric_limits<double>::quiet_NaN();
      r -= (y[i] + g[i] * g[i]) / std::sqrt(d);
    }
    return r;
  };
  fs.hess_quadform = [rhs = fs.rhs, V = fs.lyapunov, obj = problem, n, eps_a](
                         const Vector& y, double x) {
    const Vector F = rhs(y);
    const Vector z = y + x * F;
    if (!std::isfinite(V(z))) return kInf;
    double form = 2.0 * objective_curvature(obj, z.tail(n), F.tail(n));
    for (Index i = 0; i < n; ++i) {
      form -= 0.5 * F[i] * F[i] / std::pow(eps_a + z[i], 1.5);
    }
    return std::abs(form);
  };
  return fs;
}

FlowSystem make_pgd(const Objective& problem, PGDParams params) {
  const double p = params.p;
  if (!(p > 1.0)) throw ConfigError("flow.p", "must be > 1");
  // Exponents (p-2)/(p-1) on the rescaling and p/(p-1) on Vdot; both -> 1 as p -> inf.
  const double shrink = std::isinf(p) ? 1.0 : (p - 2.0) / (p - 1.0);
  const double rate = std::isinf(p) ? 1.0 : p / (p - 1.0);

  FlowSystem fs;
  fs.name = "pgd";
  fs.dim = problem.dim;
  fs.blocks = {{"theta", 0, problem.dim}};
  fs.objective = problem;
  fs.rhs = [obj = problem, shrink](const Vector& y) -> Vector {
    const Vector g = obj.gradient(y);
    const double gn = g.norm();
    if (gn == 0.0) return Vector::Zero(y.size());
    return -g / std::pow(gn, shrink);
  };
  fs.lyapunov = problem.value;
  fs.lyapunov_rate = [obj = problem, rate](const Vector& y) {
    const double gn = obj.gradient(y).norm();
    return gn == 0.0 ? 0.0 : -std::pow(gn, rate);
  };
  fs.hess_quadform = [rhs = fs.rhs, obj = problem](const Vector& y, double x) {
    const Vector F = rhs(y);
    const Vector z = y + x * F;
    if (!std::isfinite(obj.value(z))) return kInf;
    return std::abs(objective_curvature(obj, z, F));
  };
  return fs;
}

Vector lift_theta(const FlowSystem& fs, const Vector& theta) {
  const Block& b = fs.theta_block();
  if (theta.size() != b.size) {
    throw DimensionError("theta has length " + std::to_string(theta.size()) +
                         ", expected " + std::to_string(b.size));
  }
  Vector y = Vector::Zero(fs.dim);
  y.segment(b.offset, b.size) = theta;
  return y;
}

std::optional<Vector> lifted_minimizer(const FlowSystem& fs) {
  if (fs.objective.minimizers.empty()) return std::nullopt;
  return lift_theta(fs, fs.objective.minimizers.front());
}

}  // namespace lyapctl
