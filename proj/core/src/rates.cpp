#include "lyapctl/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lyapctl/trajectory_io.hpp"

namespace lyapctl {

LojasiewiczFit lojasiewicz_fit(const RunLog& run, const Objective& obj, double min_gap) {
  const Block& tb = run.theta_block;
  auto theta_of = [&](const Vector& y) -> Vector {
    if (tb.size > 0 && tb.offset + tb.size <= y.size()) return y.segment(tb.offset, tb.size);
    return y;
  };

  std::vector<double> xs;
  std::vector<double> ys;
  auto consider = [&](const Vector& y) {
    const Vector theta = theta_of(y);
    if (theta.size() != obj.dim) return;
    const double gap = obj.value(theta) - obj.min_value;
    const double gn = obj.gradient(theta).norm();
    if (!(gap > min_gap) || !(gn > 0.0) || !std::isfinite(gap) || !std::isfinite(gn)) return;
    xs.push_back(std::log(gap));
    ys.push_back(std::log(gn));
  };
  if (run.initial_state.size() > 0) consider(run.initial_state);
  for (const StepRecord& r : run.records) {
    if (r.state) consider(*r.state);
  }
  if (xs.size() < 10) {
    throw InsufficientData("lojasiewicz fit needs >= 10 states with R - R* > " +
                           format_double(min_gap) + ", got " + std::to_string(xs.size()));
  }

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientData("lojasiewicz fit: objective gap does not vary");

  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  LojasiewiczFit fit;
  fit.alpha1 = 1.0 - slope;
  fit.c1 = std::exp(intercept);
  fit.r_squared = syy > 0.0 ? std::min(1.0, (sxy * sxy) / (sxx * syy)) : 1.0;
  fit.points_used = static_cast<int>(xs.size());
  return fit;
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::subexponential: return "subexponential";
    case Regime::exponential: return "exponential";
    case Regime::finite_time: return "finite_time";
  }
  return "unknown";
}

RegimeReport classify_regime(double alpha1, double gamma, double alpha2, double lambda,
                             double c, double c1, double c2) {
  if (!(alpha1 > 0.0 && alpha1 < 1.0)) throw ConfigError("alpha1", "must lie in (0, 1)");
  if (!(gamma >= 0.0)) throw ConfigError("gamma", "must be >= 0");
  if (!(alpha2 <= 1.0)) throw ConfigError("alpha2", "must be <= 1");
  if (!(gamma * (1.0 - alpha1) < 1.0)) {
    throw ConfigError("gamma", "condition gamma (1 - alpha1) < 1 violated");
  }
  if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("lambda", "must lie in (0, 1)");
  if (!(c > 0.0)) throw ConfigError("c", "must be positive");
  if (!(c1 > 0.0)) throw ConfigError("c1", "must be positive");
  if (!(c2 > 0.0)) throw ConfigError("c2", "must be positive");

  RegimeReport rep;
  rep.alpha1 = alpha1;
  rep.gamma = gamma;
  rep.alpha2 = alpha2;

  const double ratio = alpha2 / (1.0 - alpha1);
  if (std::abs(ratio - gamma) <= 1e-9) {
    rep.regime = Regime::exponential;
  } else if (ratio < gamma) {
    rep.regime = Regime::subexponential;
  } else {
    rep.regime = Regime::finite_time;
  }

  const double k = lambda * c * std::pow(c1, gamma);
  const double e = gamma * (1.0 - alpha1);
  rep.C1 = 1.0 / (k * (1.0 - e));
  rep.C2 = k * c2 * (e - alpha2);
  rep.C3 = c2 / rep.C1;
  return rep;
}

RegimeReport pgd_regime(double alpha1, double p, double lambda, double c1) {
  if (!(p > 1.0)) throw ConfigError("p", "must be > 1");
  if (!(alpha1 > 0.0 && alpha1 < 1.0)) throw ConfigError("alpha1", "must lie in (0, 1)");
  if (!(c1 > 0.0)) throw ConfigError("c1", "must be positive");
  const bool inf = std::isinf(p);
  const double alpha2 = inf ? 1.0 : (alpha1 + p - 2.0) / (p - 1.0);
  const double c2 = inf ? 1.0 : std::pow(c1, 1.0 / (p - 1.0));
  RegimeReport rep = classify_regime(alpha1, 1.0, alpha2, lambda, 1.0, c1, c2);
  // alpha2 / (1 - alpha1) vs 1 reduces to p alpha1 vs 1.
  const double s = inf ? std::numeric_limits<double>::infinity() : p * alpha1;
  if (std::abs(s - 1.0) <= 1e-9) {
    rep.regime = Regime::exponential;
  } else {
    rep.regime = s < 1.0 ? Regime::subexponential : Regime::finite_time;
  }
  return rep;
}

std::vector<double> gronwall_power_bound(double u0, const std::vector<double>& v,
                                         double alpha) {
  if (!(u0 >= 0.0)) throw ConfigError("u0", "must be >= 0");
  if (!(alpha >= 0.0)) throw ConfigError("alpha", "must be >= 0");
  std::vector<double> out;
  out.reserve(v.size() + 1);
  double sum = 0.0;
  for (std::size_t n = 0; n <= v.size(); ++n) {
    if (n > 0) {
      if (!(v[n - 1] >= 0.0)) throw ConfigError("v", "entries must be >= 0");
      sum += v[n - 1];
    }
    double b;
    if (u0 == 0.0) {
      b = 0.0;
    } else if (alpha == 1.0) {
      b = u0 * std::exp(-sum);
    } else if (alpha > 1.0) {
      b = std::pow(std::pow(u0, 1.0 - alpha) + (alpha - 1.0) * sum, -1.0 / (alpha - 1.0));
    } else {
      const double base = std::pow(u0, 1.0 - alpha) - (1.0 - alpha) * sum;
      b = base <= 0.0 ? 0.0 : std::pow(base, 1.0 / (1.0 - alpha));
    }
    out.push_back(b);
  }
  return out;
}

RateBound gd_rate_bound(const RunLog& run, double alpha1, double c1, double lambda,
                        double R0) {
  if (!(alpha1 > 0.0 && alpha1 < 1.0)) throw ConfigError("alpha1", "must lie in (0, 1)");
  if (!(c1 > 0.0)) throw ConfigError("c1", "must be positive");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("lambda", "must lie in (0, 1)");
  if (!(R0 >= 0.0)) throw ConfigError("R0", "must be >= 0");

  // u = R0 (1 + beta c1^2 S R0^beta)^{-1/beta}, beta = 1 - 2 alpha1, S = lambda sum eta.
  const double beta = 1.0 - 2.0 * alpha1;
  const double c2 = c1 * c1;
  auto value_bound = [&](double S) {
    if (R0 == 0.0) return 0.0;
    if (std::abs(beta) < 1e-12) return R0 * std::exp(-c2 * S);
    const double t = beta * c2 * S * std::pow(R0, beta);
    if (t <= -1.0) return 0.0;
    return R0 * std::exp(-std::log1p(t) / beta);
  };
  auto phi = [&](double x) { return std::pow(x, alpha1) / (c1 * alpha1); };

  RateBound out;
  out.value.reserve(run.records.size() + 1);
  out.distance.reserve(run.records.size() + 1);
  double S = 0.0;
  for (std::size_t n = 0; n <= run.records.size(); ++n) {
    if (n > 0) S += lambda * run.records[n - 1].eta;
    const double vb = value_bound(S);
    out.value.push_back(vb);
    out.distance.push_back(phi(vb) / lambda);
  }
  return out;
}

}  // namespace lyapctl
