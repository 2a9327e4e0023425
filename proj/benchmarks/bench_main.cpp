#include <benchmark/benchmark.h>

#include "lyapctl/backtrack.hpp"
#include "lyapctl/certify.hpp"
#include "lyapctl/sampling.hpp"

using namespace lyapctl;

namespace {

Vector rosenbrock_start(Index n) {
  Vector y(n);
  for (Index i = 0; i < n; i += 2) {
    y(i) = -1.2;
    y(i + 1) = 1.0;
  }
  return y;
}

void BM_ArmijoGap(benchmark::State& state) {
  const Index n = state.range(0);
  const FlowSystem fs = make_gd(rosenbrock(n));
  const Vector y = rosenbrock_start(n);
  for (auto _ : state) benchmark::DoNotOptimize(armijo_gap(fs, y, 1e-3, 0.5));
}
BENCHMARK(BM_ArmijoGap)->Arg(2)->Arg(64)->Arg(1024);

void BM_LineSearch(benchmark::State& state) {
  const Index n = state.range(0);
  const FlowSystem fs = make_gd(rosenbrock(n));
  const Vector y = rosenbrock_start(n);
  BacktrackConfig cfg;
  int rejections = 0;
  for (auto _ : state) {
    const LineSearchResult r = ls_backtrack(fs, y, 1.0, cfg);
    rejections = r.n_rejections;
    benchmark::DoNotOptimize(r.eta);
  }
  state.counters["rejections"] = rejections;
}
BENCHMARK(BM_LineSearch)->Arg(2)->Arg(64)->Arg(1024);

void BM_RunLcrRosenbrock(benchmark::State& state) {
  const FlowSystem fs = make_gd(rosenbrock(2));
  BacktrackConfig cfg;
  cfg.lambda = 0.1;
  cfg.epsilon = 1e-10;
  cfg.max_iters = 1000000;
  long iters = 0;
  for (auto _ : state) {
    const RunLog log = run_lcr(fs, rosenbrock_start(2), cfg);
    iters = log.wall_iterations;
    benchmark::DoNotOptimize(log.final_state.data());
  }
  state.counters["iterations"] = static_cast<double>(iters);
}
BENCHMARK(BM_RunLcrRosenbrock)->Unit(benchmark::kMillisecond);

void BM_RunLcmMomentum(benchmark::State& state) {
  const FlowSystem fs = make_momentum(quadratic_conditioned(state.range(0), 100.0), 1.0);
  Rng rng(1);
  const Vector y0 = sample_box(rng, fs.dim, -2.0, 2.0);
  BacktrackConfig cfg;
  cfg.epsilon = 1e-10;
  for (auto _ : state) benchmark::DoNotOptimize(run_lcm(fs, y0, cfg).wall_iterations);
}
BENCHMARK(BM_RunLcmMomentum)->Arg(8)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_CertifyStep(benchmark::State& state) {
  const FlowSystem fs = make_gd(rosenbrock(2));
  const Vector y = rosenbrock_start(2);
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(certify_step(fs, y, 0.5, m).eta_max_certified);
}
BENCHMARK(BM_CertifyStep)->Arg(9)->Arg(33)->Arg(129);

void BM_CertifyStepRmsprop(benchmark::State& state) {
  // No analytic Hessian of V here: exercises the finite-difference fallback.
  const FlowSystem fs = make_rmsprop(rosenbrock(2), 1e-2);
  Vector y(4);
  y << 0.5, 0.5, -1.2, 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(certify_step(fs, y, 0.5).eta_max_certified);
}
BENCHMARK(BM_CertifyStepRmsprop);

}  // namespace
BENCHMARK_MAIN();
