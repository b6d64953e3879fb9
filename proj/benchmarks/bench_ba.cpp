#include <benchmark/benchmark.h>

#include "coinfer/blahut_arimoto.hpp"

namespace {

void BM_BaSolveSlope(benchmark::State& state) {
  coinfer::BaConfig config;
  config.grid_points = static_cast<int>(state.range(0));
  const coinfer::BaSourceGrid grid = coinfer::ba_source_grid(1.0, config);
  const double slope = -static_cast<double>(state.range(1));
  for (auto _ : state) {
    auto result = coinfer::ba_solve_slope(grid, slope, 1e-9, 50000);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_BaSolveSlope)
    ->Args({256, 12})
    ->Args({1024, 12})
    ->Args({1024, 55})
    ->Args({4096, 12})
    ->Unit(benchmark::kMillisecond);

void BM_BaDefaultSweep(benchmark::State& state) {
  coinfer::BaConfig config;
  for (auto _ : state) {
    auto curve = coinfer::ba_distortion_rate(1.0, config);
    benchmark::DoNotOptimize(curve);
  }
}
BENCHMARK(BM_BaDefaultSweep)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace
