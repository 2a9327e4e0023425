#include <cmath>

#include <gtest/gtest.h>

#include "lyapctl/objective.hpp"
#include "lyapctl/sampling.hpp"
#include "support.hpp"

namespace lyapctl {
namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

TEST(Quadratic, IdentityValueAndGradient) {
  const Objective o = quadratic(Matrix::Identity(1, 1), Vector::Zero(1));
  EXPECT_DOUBLE_EQ(o.value(vec({2.0})), 2.0);
  EXPECT_DOUBLE_EQ(o.gradient(vec({2.0}))(0), 2.0);
}

TEST(Quadratic, DiagonalGradient) {
  Matrix A = Matrix::Zero(2, 2);
  A.diagonal() << 1.0, 10.0;
  const Objective o = quadratic(A, Vector::Zero(2));
  const Vector g = o.gradient(vec({1.0, 1.0}));
  EXPECT_DOUBLE_EQ(g(0), 1.0);
  EXPECT_DOUBLE_EQ(g(1), 10.0);
}

TEST(Quadratic, ShiftedSoMinimumIsZero) {
  Matrix A(2, 2);
  A << 4.0, 1.0, 1.0, 3.0;
  const Vector b = vec({1.0, -2.0});
  const Objective o = quadratic(A, b);
  ASSERT_EQ(o.minimizers.size(), 1u);
  // Independent solve of A x = -b: x = (1/11) * (-(3*1 - 1*(-2)), -(-1*1 + 4*(-2))).
  const Vector expected = vec({-5.0 / 11.0, 9.0 / 11.0});
  EXPECT_NEAR((o.minimizers[0] - expected).norm(), 0.0, 1e-14);
  EXPECT_NEAR(o.value(o.minimizers[0]), 0.0, 1e-14);
  EXPECT_NEAR(o.gradient(o.minimizers[0]).norm(), 0.0, 1e-14);
  EXPECT_EQ(o.min_value, 0.0);
}

TEST(Quadratic, RejectsNonSymmetric) {
  Matrix A(2, 2);
  A << 1.0, 2.0, 0.0, 1.0;
  EXPECT_THROW(quadratic(A, Vector::Zero(2)), ConfigError);
}

TEST(Quadratic, RejectsIndefinite) {
  Matrix A(2, 2);
  A << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(quadratic(A, Vector::Zero(2)), ConfigError);
}

TEST(Quadratic, RejectsShapeMismatch) {
  EXPECT_THROW(quadratic(Matrix::Identity(2, 2), Vector::Zero(3)), std::exception);
}

TEST(Quadratic, ConditionedSpectrum) {
  const Objective o = quadratic_conditioned(3, 100.0);
  // Hessian form along unit axes recovers the eigenvalues 1, 10, 100.
  const Vector z = Vector::Zero(3);
  EXPECT_NEAR(o.hess_quadform(z, vec({1, 0, 0})), 1.0, 1e-12);
  EXPECT_NEAR(o.hess_quadform(z, vec({0, 1, 0})), 10.0, 1e-12);
  EXPECT_NEAR(o.hess_quadform(z, vec({0, 0, 1})), 100.0, 1e-12);
  EXPECT_THROW(quadratic_conditioned(2, 0.5), ConfigError);
}

TEST(Rosenbrock, KnownValues) {
  const Objective o = rosenbrock(2);
  EXPECT_EQ(o.value(vec({1.0, 1.0})), 0.0);
  EXPECT_EQ(o.gradient(vec({1.0, 1.0})).norm(), 0.0);
  EXPECT_DOUBLE_EQ(o.value(vec({0.0, 0.0})), 1.0);
  // (1 - (-1.2))^2 + 100 (1 - 1.44)^2 = 4.84 + 19.36
  EXPECT_NEAR(o.value(vec({-1.2, 1.0})), 24.2, 1e-12);
}

TEST(Rosenbrock, ChainedSumsPairs) {
  const Objective o4 = rosenbrock(4);
  const Objective o2 = rosenbrock(2);
  const Vector t = vec({0.3, -0.7, 1.4, 0.2});
  EXPECT_NEAR(o4.value(t), o2.value(t.head(2)) + o2.value(t.tail(2)), 1e-12);
  EXPECT_EQ(o4.minimizers.at(0), Vector::Ones(4));
}

TEST(Rosenbrock, RejectsOddOrSmallDimension) {
  EXPECT_THROW(rosenbrock(3), ConfigError);
  EXPECT_THROW(rosenbrock(0), ConfigError);
}

TEST(NormPower, ClosedForms) {
  const Objective q1 = norm_power(2, 1.0);
  EXPECT_DOUBLE_EQ(q1.value(vec({3.0, 4.0})), 25.0);
  EXPECT_DOUBLE_EQ(*q1.lojasiewicz_alpha, 0.5);

  const Objective q2 = norm_power(1, 2.0);
  EXPECT_DOUBLE_EQ(q2.value(vec({1.0})), 1.0);
  EXPECT_DOUBLE_EQ(q2.gradient(vec({1.0}))(0), 4.0);
  EXPECT_DOUBLE_EQ(*q2.lojasiewicz_alpha, 0.25);
  // d^2/dt^2 t^4 = 12 t^2
  EXPECT_NEAR(q2.hess_quadform(vec({1.0}), vec({1.0})), 12.0, 1e-12);

  const Vector zero = Vector::Zero(3);
  const Objective q3 = norm_power(3, 3.0);
  EXPECT_EQ(q3.value(zero), 0.0);
  EXPECT_EQ(q3.gradient(zero).norm(), 0.0);
  EXPECT_TRUE(std::isfinite(q3.hess_quadform(zero, vec({1, 1, 1}))));
}

TEST(NormPower, RejectsExponentBelowOne) { EXPECT_THROW(norm_power(2, 0.5), ConfigError); }

// ||grad R|| = 2q ||theta||^{2q-1} = 2q R^{1 - 1/(2q)}, the Lojasiewicz identity
// with exponent 1/(2q).
TEST(NormPower, LojasiewiczIdentityHoldsExactly) {
  Rng rng(3);
  for (double q : {1.0, 1.5, 2.0, 3.0}) {
    const Objective o = norm_power(3, q);
    for (int i = 0; i < 50; ++i) {
      const Vector t = sample_box(rng, 3, -2.0, 2.0);
      const double lhs = o.gradient(t).norm();
      const double rhs = 2.0 * q * std::pow(o.value(t), 1.0 - *o.lojasiewicz_alpha);
      EXPECT_NEAR(lhs, rhs, 1e-10 * (1.0 + rhs));
    }
  }
}

TEST(GradCheck, QuadraticIsExactToRoundoff) {
  Rng rng(1);
  const Objective o = quadratic_conditioned(4, 10.0);
  std::vector<Vector> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(sample_box(rng, 4, -2.0, 2.0));
  const GradCheckReport r = grad_check(o, pts, 1e-6, 1e-5);
  EXPECT_TRUE(r.passed);
  EXPECT_LE(r.worst, 1e-8);
  EXPECT_EQ(r.max_rel_error.size(), pts.size());
}

TEST(GradCheck, CorruptedGradientFails) {
  Objective o = rosenbrock(2);
  const auto g = o.gradient;
  o.gradient = [g](const Vector& t) -> Vector { return -g(t); };
  Rng rng(2);
  std::vector<Vector> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(sample_box(rng, 2, -2.0, 2.0));
  const GradCheckReport r = grad_check(o, pts, 1e-6, 1e-5);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.worst, 1.0);
}

TEST(GradCheck, RejectsBadArguments) {
  const Objective o = rosenbrock(2);
  const std::vector<Vector> pts{Vector::Zero(2)};
  EXPECT_THROW(grad_check(o, pts, 0.0, 1e-5), ConfigError);
  EXPECT_THROW(grad_check(o, pts, 1e-6, -1.0), ConfigError);
}

// Property: every corpus objective passes at 100 uniform points, several seeds.
TEST(GradCheckProperty, CorpusPassesAcrossSeeds) {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    Rng rng(seed);
    for (const Objective& o : testing::corpus()) {
      std::vector<Vector> pts;
      for (int i = 0; i < 100; ++i) pts.push_back(sample_box(rng, o.dim, -2.0, 2.0));
      const GradCheckReport r = grad_check(o, pts, 1e-6, 1e-5);
      EXPECT_TRUE(r.passed) << o.name << " seed " << seed << " worst " << r.worst;
    }
  }
}

// Property: minimizers are critical points at value min_value.
TEST(ObjectiveProperty, MinimizersAreCriticalAtMinValue) {
  for (const Objective& o : testing::corpus()) {
    ASSERT_FALSE(o.minimizers.empty()) << o.name;
    for (const Vector& m : o.minimizers) {
      EXPECT_EQ(o.value(m), o.min_value) << o.name;
      EXPECT_EQ(o.gradient(m).norm(), 0.0) << o.name;
    }
  }
}

// Property: analytic Hessian forms agree with second differences of the value.
TEST(ObjectiveProperty, HessianFormMatchesSecondDifference) {
  Rng rng(5);
  for (const Objective& o : testing::corpus()) {
    ASSERT_TRUE(o.hess_quadform) << o.name;
    for (int i = 0; i < 50; ++i) {
      const Vector t = sample_box(rng, o.dim, -2.0, 2.0);
      const Vector d = sample_box(rng, o.dim, -1.0, 1.0);
      const double h = 1e-4;
      const double fd = (o.value(t + h * d) - 2.0 * o.value(t) + o.value(t - h * d)) / (h * h);
      const double exact = o.hess_quadform(t, d);
      EXPECT_NEAR(fd, exact, 1e-4 * (1.0 + std::abs(exact))) << o.name;
    }
  }
}

}  // namespace
}  // namespace lyapctl
