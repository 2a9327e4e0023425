#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "lyapctl/backtrack.hpp"
#include "support.hpp"

namespace lyapctl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector scalar(double x) { return Vector::Constant(1, x); }

FlowSystem half_square_gd() { return make_gd(quadratic(Matrix::Identity(1, 1), Vector::Zero(1))); }

BacktrackConfig cfg_with(double lambda, double eta_init, double eps) {
  BacktrackConfig c;
  c.lambda = lambda;
  c.eta_init = eta_init;
  c.epsilon = eps;
  return c;
}

// Closed form on R = theta^2 / 2: f(y, eta) = y^2 eta (eta - 2 + 2 lambda) / 2.
double quad_gap(double y, double eta, double lambda) {
  return 0.5 * y * y * eta * (eta - 2.0 + 2.0 * lambda);
}

TEST(ArmijoGap, ScalarQuadratic) {
  const FlowSystem fs = half_square_gd();
  EXPECT_DOUBLE_EQ(armijo_gap(fs, scalar(2.0), 0.5, 0.5), -0.5);
  EXPECT_DOUBLE_EQ(armijo_gap(fs, scalar(2.0), 2.0, 0.5), 4.0);
  EXPECT_EQ(armijo_gap(fs, scalar(0.0), 0.7, 0.5), 0.0);
}

TEST(ArmijoGap, MatchesClosedFormOnGrid) {
  const FlowSystem fs = half_square_gd();
  for (double y : {-3.0, -0.5, 0.25, 1.0, 7.0}) {
    for (double eta : {0.01, 0.3, 1.0, 1.7, 4.0}) {
      for (double lambda : {0.1, 0.5, 0.9}) {
        const double expect = quad_gap(y, eta, lambda);
        EXPECT_NEAR(armijo_gap(fs, scalar(y), eta, lambda), expect, 1e-12 * (1.0 + std::abs(expect)));
      }
    }
  }
}

TEST(ArmijoGap, DomainExitIsInfinite) {
  const FlowSystem fs = make_rmsprop(quadratic(Matrix::Identity(1, 1), Vector::Zero(1)), 1.0);
  Vector y(2);
  y << 3.0, 0.0;  // F_s = -3
  EXPECT_EQ(armijo_gap(fs, y, 4.0, 0.5), kInf);
}

TEST(LineSearch, OneRejectionOnQuadratic) {
  const FlowSystem fs = half_square_gd();
  const LineSearchResult r = ls_backtrack(fs, scalar(2.0), 2.0, cfg_with(0.5, 2.0, 1e-8));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.eta, 1.0);
  EXPECT_EQ(r.n_rejections, 1);
  EXPECT_EQ(r.y_next(0), 0.0);
}

TEST(LineSearch, AcceptableStartHasNoRejections) {
  const FlowSystem fs = half_square_gd();
  const LineSearchResult r = ls_backtrack(fs, scalar(2.0), 0.75, cfg_with(0.5, 1.0, 1e-8));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.eta, 0.75);
  EXPECT_EQ(r.n_rejections, 0);
  EXPECT_EQ(r.y_next(0), 2.0 - 0.75 * 2.0);
}

TEST(LineSearch, InfeasibleRungsRejectedUntilFeasible) {
  const FlowSystem fs = make_rmsprop(quadratic(Matrix::Identity(1, 1), Vector::Zero(1)), 1.0);
  Vector y(2);
  y << 3.0, 0.5;
  BacktrackConfig c = cfg_with(0.5, 64.0, 1e-8);
  const LineSearchResult r = ls_backtrack(fs, y, 64.0, c);
  ASSERT_TRUE(r.ok());

  // Brute-force scan of the same ladder.
  double eta = 64.0;
  int k = 0;
  while (!(armijo_gap(fs, y, eta, c.lambda) <= 0.0)) {
    eta /= c.f1;
    ++k;
  }
  EXPECT_EQ(r.eta, eta);
  EXPECT_EQ(r.n_rejections, k);
  EXPECT_GE(k, 4);  // every rung above 0.75 drives s negative
  EXPECT_TRUE(std::isfinite(r.V_next));
}

TEST(LineSearch, TooManyBacktracks) {
  BacktrackConfig c = cfg_with(0.5, 1.0, 1e-8);
  c.max_backtracks = 1;
  const LineSearchResult r = ls_backtrack(half_square_gd(), scalar(2.0), 8.0, c);
  EXPECT_EQ(r.status, LineSearchStatus::too_many_backtracks);
  EXPECT_FALSE(r.ok());
}

TEST(LineSearch, StepUnderflow) {
  BacktrackConfig c = cfg_with(0.5, 1.0, 1e-8);
  c.eta_min = 1.5;
  const LineSearchResult r = ls_backtrack(half_square_gd(), scalar(2.0), 2.0, c);
  EXPECT_EQ(r.status, LineSearchStatus::step_underflow);
}

TEST(Lcr, GeometricDecayOnQuadratic) {
  const RunLog log = run_lcr(half_square_gd(), scalar(1.0), cfg_with(0.5, 0.5, 1e-8));
  EXPECT_EQ(log.termination, Termination::converged);
  ASSERT_EQ(log.records.size(), 14u);
  EXPECT_EQ(log.wall_iterations, 14);
  for (std::size_t n = 0; n < log.records.size(); ++n) {
    EXPECT_EQ(log.records[n].eta, 0.5);
    EXPECT_EQ(log.records[n].n_rejections, 0);
  }
  EXPECT_EQ(log.final_state(0), std::ldexp(1.0, -14));
  EXPECT_LE(std::abs(log.final_state(0)), 1.23e-4);
  EXPECT_EQ(log.eta_sum, 7.0);
}

TEST(Lcr, AlreadyStationaryStartHasNoRecords) {
  const RunLog log = run_lcr(half_square_gd(), scalar(1e-5), cfg_with(0.5, 1.0, 1e-8));
  EXPECT_EQ(log.termination, Termination::converged);
  EXPECT_TRUE(log.records.empty());
  EXPECT_EQ(log.final_state(0), 1e-5);
}

// Regression fixture recorded from this implementation.
constexpr long kRosenbrockLcrIterations = 8156;

TEST(Lcr, RosenbrockRegression) {
  Vector y0(2);
  y0 << -1.2, 1.0;
  BacktrackConfig c = cfg_with(0.1, 1.0, 1e-10);
  c.max_iters = 1000000;
  const FlowSystem fs = make_gd(rosenbrock(2));
  const RunLog log = run_lcr(fs, y0, c);
  ASSERT_EQ(log.termination, Termination::converged);
  EXPECT_LE(fs.grad_norm(log.final_state), 1e-5);
  EXPECT_EQ(log.wall_iterations, kRosenbrockLcrIterations);
}

TEST(Lcr, MaxItersTermination) {
  BacktrackConfig c = cfg_with(0.5, 0.01, 1e-12);
  c.max_iters = 5;
  const RunLog log = run_lcr(half_square_gd(), scalar(1.0), c);
  EXPECT_EQ(log.termination, Termination::max_iters);
  EXPECT_EQ(log.records.size(), 5u);
}

TEST(Lcm, LadderOnQuadratic) {
  BacktrackConfig c = cfg_with(0.5, 0.25, 1e-8);
  const RunLog log = run_lcm(half_square_gd(), scalar(1.0), c);
  // eta = 1 maps the state exactly onto the minimizer, ending the run.
  ASSERT_EQ(log.records.size(), 3u);
  EXPECT_EQ(log.records[0].eta, 0.25);
  EXPECT_EQ(log.records[1].eta, 0.5);
  EXPECT_EQ(log.records[2].eta, 1.0);
  for (const StepRecord& r : log.records) EXPECT_EQ(r.n_rejections, 0);
  EXPECT_EQ(log.termination, Termination::converged);
  EXPECT_EQ(log.final_state(0), 0.0);

  // What a fourth step would do from any nonzero state: start at 2, reject once.
  const LineSearchResult next = ls_backtrack(half_square_gd(), scalar(0.375), 2.0, c);
  EXPECT_EQ(next.eta, 1.0);
  EXPECT_EQ(next.n_rejections, 1);
}

TEST(Lcm, StepLowerBoundOnQuadratic) {
  Rng rng(9);
  for (int i = 0; i < 20; ++i) {
    BacktrackConfig c = cfg_with(0.7, 0.25, 1e-12);
    const RunLog log = run_lcm(half_square_gd(), scalar(rng.uniform(-5.0, 5.0)), c);
    for (const StepRecord& r : log.records) EXPECT_GE(r.eta, 0.25);
  }
}

TEST(Constant, SmallStepMatchesLcr) {
  const FlowSystem fs = half_square_gd();
  const RunLog a = run_constant(fs, scalar(1.0), 0.5, 1000, 1e-8);
  const RunLog b = run_lcr(fs, scalar(1.0), cfg_with(0.5, 0.5, 1e-8));
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t n = 0; n < a.records.size(); ++n) {
    EXPECT_EQ(a.records[n].V_after, b.records[n].V_after);
  }
  EXPECT_EQ(a.final_state, b.final_state);
  EXPECT_EQ(a.dissipation_violations, 0);
}

TEST(Constant, LargeStepDiverges) {
  const RunLog log = run_constant(half_square_gd(), scalar(1.0), 2.5, 10000, 1e-8);
  EXPECT_EQ(log.termination, Termination::diverged);
  EXPECT_EQ(log.dissipation_violations, static_cast<long>(log.records.size()));
  // |y_n| = 1.5^n
  for (std::size_t n = 0; n < log.records.size(); ++n) {
    EXPECT_NEAR(log.records[n].state_norm, std::pow(1.5, n + 1.0), 1e-9 * std::pow(1.5, n + 1.0));
  }
}

TEST(Constant, EquilibriumStartHasNoRecords) {
  const RunLog log = run_constant(half_square_gd(), scalar(0.0), 2.5, 10, 1e-8);
  EXPECT_TRUE(log.records.empty());
  EXPECT_EQ(log.termination, Termination::converged);
}

TEST(Config, ValidationNamesField) {
  auto field_of = [](BacktrackConfig c) -> std::string {
    try {
      validate(c);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return "";
  };
  BacktrackConfig c;
  EXPECT_EQ(field_of(c), "");
  c.lambda = 1.0;
  EXPECT_EQ(field_of(c), "policy.lambda");
  c = {};
  c.f1 = 1.0;
  EXPECT_EQ(field_of(c), "policy.f1");
  c = {};
  c.f2 = 0.5;
  EXPECT_EQ(field_of(c), "policy.f2");
  c = {};
  c.eta_init = 0.0;
  EXPECT_EQ(field_of(c), "policy.eta-init");
  c = {};
  c.epsilon = -1.0;
  EXPECT_EQ(field_of(c), "policy.eps");
  c = {};
  c.accept_slack = -1.0;
  EXPECT_EQ(field_of(c), "policy.accept-slack");
  EXPECT_THROW(run_lcr(half_square_gd(), scalar(1.0), cfg_with(0.0, 1.0, 1e-8)), ConfigError);
}

TEST(Termination, StringRoundTrip) {
  for (Termination t : {Termination::converged, Termination::max_iters,
                        Termination::backtrack_failure, Termination::diverged}) {
    EXPECT_EQ(termination_from_string(to_string(t)), t);
  }
  EXPECT_FALSE(termination_from_string("nope").has_value());
}

// ---- properties over the flow corpus ----

struct CorpusRun {
  std::string label;
  const FlowSystem* fs;
  BacktrackConfig cfg;
  bool memory;
  RunLog log;
};

std::vector<CorpusRun> corpus_runs(const std::vector<testing::NamedFlow>& flows) {
  std::vector<CorpusRun> out;
  Rng rng(77);
  for (const auto& nf : flows) {
    for (bool memory : {false, true}) {
      BacktrackConfig c;
      c.lambda = rng.uniform(0.1, 0.9);
      c.f1 = rng.uniform(1.5, 4.0);
      c.f2 = rng.uniform(1.5, 4.0);
      c.eta_init = std::exp(rng.uniform(-3.0, 1.0));
      c.epsilon = 1e-10;
      c.max_iters = 3000;
      const Vector y0 = testing::random_state(rng, nf.fs);
      RunLog log = memory ? run_lcm(nf.fs, y0, c) : run_lcr(nf.fs, y0, c);
      out.push_back({nf.label, &nf.fs, c, memory, std::move(log)});
    }
  }
  return out;
}

class CorpusProperty : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    flows_ = new std::vector<testing::NamedFlow>(testing::flow_corpus());
    runs_ = new std::vector<CorpusRun>(corpus_runs(*flows_));
  }
  static void TearDownTestSuite() {
    delete runs_;
    delete flows_;
  }
  static std::vector<testing::NamedFlow>* flows_;
  static std::vector<CorpusRun>* runs_;
};
std::vector<testing::NamedFlow>* CorpusProperty::flows_ = nullptr;
std::vector<CorpusRun>* CorpusProperty::runs_ = nullptr;

TEST_F(CorpusProperty, DissipationHoldsOnEveryAcceptedStep) {
  for (const CorpusRun& r : *runs_) {
    for (const StepRecord& s : r.log.records) {
      ASSERT_LE(s.V_after - s.V_before,
                r.cfg.lambda * s.eta * s.Vdot_before + 1e-12 * (1.0 + std::abs(s.V_before)))
          << r.label << " iter " << s.iter;
      ASSERT_GE(s.eta, r.cfg.eta_min);
    }
  }
}

TEST_F(CorpusProperty, LyapunovValueNonIncreasing) {
  for (const CorpusRun& r : *runs_) {
    for (std::size_t n = 1; n < r.log.records.size(); ++n) {
      ASSERT_LE(r.log.records[n].V_before, r.log.records[n - 1].V_before) << r.label;
      ASSERT_EQ(r.log.records[n].V_before, r.log.records[n - 1].V_after) << r.label;
    }
  }
}

TEST_F(CorpusProperty, AcceptedStepsSitOnTheLadder) {
  for (const CorpusRun& r : *runs_) {
    double prev = r.cfg.eta_init;
    for (std::size_t n = 0; n < r.log.records.size(); ++n) {
      const StepRecord& s = r.log.records[n];
      double eta = (r.memory && n > 0) ? r.cfg.f2 * prev : r.cfg.eta_init;
      for (int k = 0; k < s.n_rejections; ++k) eta /= r.cfg.f1;
      ASSERT_EQ(s.eta, eta) << r.label << " iter " << n;
      prev = s.eta;
    }
  }
}

TEST_F(CorpusProperty, EtaSumMatchesRecords) {
  for (const CorpusRun& r : *runs_) {
    double sum = 0.0;
    for (const StepRecord& s : r.log.records) sum += s.eta;
    EXPECT_NEAR(r.log.eta_sum, sum, 1e-12 * (1.0 + sum)) << r.label;
  }
}

TEST_F(CorpusProperty, TerminationIsConsistent) {
  for (const CorpusRun& r : *runs_) {
    ASSERT_LE(r.log.records.size(), static_cast<std::size_t>(r.cfg.max_iters)) << r.label;
    if (r.log.termination == Termination::converged) {
      EXPECT_LE(std::abs(eval_flow(*r.fs, r.log.final_state).Vdot), r.cfg.epsilon) << r.label;
    }
    if (!r.log.records.empty()) {
      ASSERT_TRUE(r.log.records.back().state.has_value()) << r.label;
      EXPECT_EQ(*r.log.records.back().state, r.log.final_state) << r.label;
    }
  }
}

// Property: f depends on V only through differences and Vdot, so shifting R
// by a constant leaves the step sequence and trajectory unchanged. Exact ties
// (f = 0 in exact arithmetic) are decided by the rounding of V + c, so the
// ladder starts at 0.7 to keep rungs off the 0.5 threshold of ||theta||^2.
TEST(ShiftProperty, ConstantShiftKeepsTrajectory) {
  Rng rng(55);
  for (const Objective& base : testing::corpus()) {
    for (double c : {3.0, 1000.0}) {
      Objective shifted = base;
      shifted.value = [v = base.value, c](const Vector& t) { return v(t) + c; };
      for (int rep = 0; rep < 5; ++rep) {
        const Vector y0 = sample_box(rng, base.dim, -2.0, 2.0);
        for (bool memory : {false, true}) {
          for (double p : {2.0, 3.0}) {
            const FlowSystem a = make_pgd(base, PGDParams{p});
            const FlowSystem b = make_pgd(shifted, PGDParams{p});
            BacktrackConfig cfg;
            cfg.epsilon = 1e-6;
            cfg.eta_init = 0.7;
            cfg.max_iters = 2000;
            const RunLog la = memory ? run_lcm(a, y0, cfg) : run_lcr(a, y0, cfg);
            const RunLog lb = memory ? run_lcm(b, y0, cfg) : run_lcr(b, y0, cfg);
            ASSERT_EQ(la.records.size(), lb.records.size()) << base.name << " c=" << c;
            for (std::size_t n = 0; n < la.records.size(); ++n) {
              ASSERT_EQ(la.records[n].eta, lb.records[n].eta)
                  << base.name << " c=" << c << " p=" << p << " step " << n;
            }
            EXPECT_EQ(la.final_state, lb.final_state) << base.name;
          }
        }
      }
    }
  }
}

}  // namespace
}  // namespace lyapctl
