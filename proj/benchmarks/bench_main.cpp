#include <benchmark/benchmark.h>

#include "vldp/montecarlo.hpp"
#include "vldp/rate_solver.hpp"
#include "vldp/rng.hpp"

namespace {

vldp::ModelSpec scaling_spec() {
  vldp::ModelSpec s;
  s.kernel = {vldp::KernelSpec::Family::Fractional, 0.3, 0, 0, 1};
  s.u_fn = vldp::FunctionSpec::identity();
  s.sigma_fn = vldp::FunctionSpec::shifted_power(0.3, 0.25);
  s.drift_fn = vldp::FunctionSpec::zero();
  s.disp_fn = vldp::FunctionSpec::square_root();
  s.v0 = 0.04;
  s.rho = -0.5;
  s.horizon = 1.0;
  return s;
}

void BM_BuildWeights(benchmark::State& state) {
  const vldp::Grid grid(state.range(0), 1.0);
  const auto spec = scaling_spec();
  for (auto _ : state) {
    auto w = vldp::build_weights(spec.kernel, grid);
    benchmark::DoNotOptimize(w);
  }
}
BENCHMARK(BM_BuildWeights)->Arg(256)->Arg(1024);

void BM_ApplyKernel(benchmark::State& state) {
  const vldp::Grid grid(state.range(0), 1.0);
  const auto w = vldp::build_weights(scaling_spec().kernel, grid);
  std::vector<double> h(grid.n_steps);
  vldp::Rng rng(1);
  for (auto& v : h) v = std::abs(rng.next_normal());
  for (auto _ : state) {
    auto out = w.apply(h);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_ApplyKernel)->Arg(256)->Arg(1024);

void BM_NormalDraws(benchmark::State& state) {
  vldp::Rng rng(7);
  double acc = 0.0;
  for (auto _ : state) acc += rng.next_normal();
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_NormalDraws);

void BM_SimulatePaths(benchmark::State& state) {
  const auto spec = scaling_spec();
  const vldp::Grid grid(256, 1.0);
  const auto w = vldp::build_weights(spec.kernel, grid);
  vldp::SimulateOptions opts;
  opts.n_threads = 1;
  for (auto _ : state) {
    auto batch = vldp::simulate_batch(spec, w, 0.2, state.range(0), 1, opts);
    benchmark::DoNotOptimize(batch);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulatePaths)->Arg(1000);

void BM_ScalarObjectiveGradient(benchmark::State& state) {
  const auto spec = scaling_spec();
  const vldp::Grid grid(state.range(0), 1.0);
  const vldp::RateProblem prob(spec, grid);
  std::vector<double> c(grid.n_steps, 0.4), grad;
  for (auto _ : state) {
    const double v = prob.scalar_objective(c, 1.0, &grad);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_ScalarObjectiveGradient)->Arg(256)->Arg(400);

void BM_ScalarRateSolve(benchmark::State& state) {
  const auto spec = scaling_spec();
  const vldp::Grid grid(200, 1.0);
  vldp::SolverOptions opts;
  opts.extra_starts = 2;
  opts.n_threads = 1;
  for (auto _ : state) {
    auto res = vldp::minimize_scalar_rate(spec, grid, 0.5, opts);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_ScalarRateSolve);

}  // namespace

BENCHMARK_MAIN();
