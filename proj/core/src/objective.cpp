#include "lyapctl/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

namespace lyapctl {

Objective quadratic(const Matrix& A, const Vector& b) {
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw ConfigError("A", "must be a non-empty square matrix");
  }
  if (b.size() != A.rows()) {
    throw ConfigError("b", "length must match A");
  }
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigError("A", "must be symmetric");
  }
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("A", "must be positive definite");
  }
  const Vector theta_star = llt.solve(-b);
  const double offset = 0.5 * theta_star.dot(A * theta_star) + b.dot(theta_star);

  Objective obj;
  obj.name = "quadratic";
  obj.dim = A.rows();
  obj.value = [A, b, offset](const Vector& t) {
    return 0.5 * t.dot(A * t) + b.dot(t) - offset;
  };
  obj.gradient = [A, b](const Vector& t) -> Vector { return A * t + b; };
  obj.hess_quadform = [A](const Vector&, const Vector& d) { return d.dot(A * d); };
  obj.min_value = 0.0;
  obj.minimizers = {theta_star};
  obj.lojasiewicz_alpha = 0.5;
  return obj;
}

Objective quadratic_conditioned(Index n, double cond) {
  if (n < 1) throw ConfigError("problem.n", "must be positive");
  if (!(cond >= 1.0)) throw ConfigError("problem.cond", "must be >= 1");
  Vector diag(n);
  for (Index i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    diag[i] = std::pow(cond, t);
  }
  return quadratic(diag.asDiagonal().toDenseMatrix(), Vector::Zero(n));
}

Objective rosenbrock(Index n) {
  if (n < 2 || n % 2 != 0) {
    throw ConfigError("problem.n", "rosenbrock needs an even dimension >= 2");
  }
  Objective obj;
  obj.name = "rosenbrock";
  obj.dim = n;
  obj.value = [](const Vector& t) {
    double r = 0.0;
    for (Index i = 0; i + 1 < t.size(); i += 2) {
      const double a = 1.0 - t[i];
      const double b = t[i + 1] - t[i] * t[i];
      r += a * a + 100.0 * b * b;
    }
    return r;
  };
  obj.gradient = [](const Vector& t) -> Vector {
    Vector g(t.size());
    for (Index i = 0; i + 1 < t.size(); i += 2) {
      const double x = t[i];
      const double b = t[i + 1] - x * x;
      g[i] = -2.0 * (1.0 - x) - 400.0 * x * b;
      g[i + 1] = 200.0 * b;
    }
    return g;
  };
  obj.hess_quadform = [](const Vector& t, const Vector& d) {
    double r = 0.0;
    for (Index i = 0; i + 1 < t.size(); i += 2) {
      const double x = t[i];
      const double y = t[i + 1];
      const double hxx = 1200.0 * x * x - 400.0 * y + 2.0;
      const double hxy = -400.0 * x;
      r += hxx * d[i] * d[i] + 2.0 * hxy * d[i] * d[i + 1] + 200.0 * d[i + 1] * d[i + 1];
    }
    return r;
  };
  obj.min_value = 0.0;
  obj.minimizers = {Vector::Ones(n)};
  obj.lojasiewicz_alpha = 0.5;
  return obj;
}

Objective norm_power(Index n, double q) {
  if (n < 1) throw ConfigError("problem.n", "must be positive");
  if (!(q >= 1.0)) throw ConfigError("problem.q", "must be >= 1");
  Objective obj;
  obj.name = "norm-power";
  obj.dim = n;
  obj.value = [q](const Vector& t) { return std::pow(t.squaredNorm(), q); };
  obj.gradient = [q](const Vector& t) -> Vector {
    // 2q ||t||^{2q-2} t; ||t||^0 = 1 keeps q = 1 exact at the origin.
    return 2.0 * q * std::pow(t.squaredNorm(), q - 1.0) * t;
  };
  obj.hess_quadform = [q](const Vector& t, const Vector& d) {
    const double r2 = t.squaredNorm();
    const double base = 2.0 * q * std::pow(r2, q - 1.0);
    double r = base * d.squaredNorm();
    if (r2 > 0.0 && q != 1.0) {
      const double td = t.dot(d);
      r += base * (2.0 * q - 2.0) * td * td / r2;
    }
    return r;
  };
  obj.min_value = 0.0;
  obj.minimizers = {Vector::Zero(n)};
  obj.lojasiewicz_alpha = 1.0 / (2.0 * q);
  return obj;
}

GradCheckReport grad_check(const Objective& obj, const std::vector<Vector>& points,
                           double h, double tol) {
  if (!(h > 0.0)) throw ConfigError("h", "must be positive");
  if (!(tol > 0.0)) throw ConfigError("tol", "must be positive");
  GradCheckReport report;
  report.max_rel_error.reserve(points.size());
  for (const Vector& p : points) {
    const Vector g = obj.gradient(p);
    Vector probe = p;
    double worst = 0.0;
    for (Index i = 0; i < p.size(); ++i) {
      probe[i] = p[i] + h;
      const double up = obj.value(probe);
      probe[i] = p[i] - h;
      const double down = obj.value(probe);
      probe[i] = p[i];
      const double fd = (up - down) / (2.0 * h);
      const double err = std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i]));
      worst = std::isnan(err) ? std::numeric_limits<double>::infinity()
                              : std::max(worst, err);
    }
    report.max_rel_error.push_back(worst);
    report.worst = std::max(report.worst, worst);
    if (!(worst <= tol)) report.passed = false;
  }
  return report;
}

}  // namespace lyapctl
