#include "lyapctl/sampling.hpp"

#include <cmath>
#include <numbers>

namespace lyapctl {

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  // Box-Muller on (0, 1] x [0, 1).
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vector sample_box(Rng& rng, Index n, double lo, double hi) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

Vector sample_ball(Rng& rng, const Vector& center, double radius) {
  const Index n = center.size();
  Vector dir(n);
  double norm = 0.0;
  do {
    for (Index i = 0; i < n; ++i) dir[i] = rng.normal();
    norm = dir.norm();
  } while (norm == 0.0);
  // Radius law r = R u^{1/n}; u < 1 keeps the point strictly inside.
  const double r = radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(n));
  return center + (r / norm) * dir;
}

}  // namespace lyapctl
