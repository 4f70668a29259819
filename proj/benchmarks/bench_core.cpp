#include <benchmark/benchmark.h>

#include "curvfunc/curvature.hpp"
#include "curvfunc/flows.hpp"
#include "curvfunc/models.hpp"
#include "curvfunc/solver.hpp"

using namespace curvfunc;

namespace {

MetricField perturbed_t3(int res) {
  return random_perturbation(flat_torus(3, {1.0, 1.0, 1.0}, res).metric, 0.05, 3, 42);
}

void BM_laplacian(benchmark::State& state) {
  MetricField g = perturbed_t3(static_cast<int>(state.range(0)));
  ScalarField f = random_scalar(g.chart(), 1.0, 3, 7);
  for (auto _ : state) benchmark::DoNotOptimize(laplacian(f, g));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(g.nodes()));
}
BENCHMARK(BM_laplacian)->Arg(16)->Arg(24)->Arg(32);

void BM_scalar_curvature(benchmark::State& state) {
  MetricField g = perturbed_t3(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(scalar_curvature(g));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(g.nodes()));
}
BENCHMARK(BM_scalar_curvature)->Arg(16)->Arg(24)->Arg(32);

void BM_ricci(benchmark::State& state) {
  MetricField g = perturbed_t3(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ricci(g));
}
BENCHMARK(BM_ricci)->Arg(16)->Arg(24);

void BM_perturbation_solve(benchmark::State& state) {
  MetricField g = normalize_volume(conformal_deform(
      flat_torus(3, {1.0, 1.0, 1.0}, static_cast<int>(state.range(0))).metric,
      random_scalar(flat_torus(3, {1.0, 1.0, 1.0}, static_cast<int>(state.range(0)))
                        .metric.chart(),
                    0.1, 2, 42)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_perturbation_v(g));
}
BENCHMARK(BM_perturbation_solve)->Arg(16)->Arg(24);

void BM_perturbed_flow_step(benchmark::State& state) {
  MetricField base = flat_torus(3, {1.0, 1.0, 1.0}, static_cast<int>(state.range(0))).metric;
  MetricField g = normalize_volume(
      conformal_deform(base, random_scalar(base.chart(), 0.1, 2, 42)));
  FlowOptions opt;
  for (auto _ : state) benchmark::DoNotOptimize(perturbed_yamabe_run(g, 1, opt));
}
BENCHMARK(BM_perturbed_flow_step)->Arg(16)->Arg(24);

}  // namespace

BENCHMARK_MAIN();
