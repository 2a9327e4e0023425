#pragma once

#include <cstdint>
#include <random>

#include "lyapctl/types.hpp"

namespace lyapctl {

/// Seeded generator whose real-valued draws are bit-identical across
/// standard libraries (the std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// Uniform point in the box [lo, hi]^n.
Vector sample_box(Rng& rng, Index n, double lo, double hi);

/// Uniform point in the open ball of `radius` around `center`.
Vector sample_ball(Rng& rng, const Vector& center, double radius);

}  // namespace lyapctl
