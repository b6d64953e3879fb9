#include <benchmark/benchmark.h>

#include "coinfer/planner.hpp"

namespace {

coinfer::PlanProblem reference_problem() {
  coinfer::PlanProblem p;
  p.workload = {212.27e9, 321.39e9, 16, 16};
  p.device = {2e9, 32.0, 1.0, 2e-29};
  p.server = {10e9, 128.0, 2.0, 1e-28};
  p.lambda = 1.0;
  p.t0 = 2.0;
  p.e0 = 2.0;
  return p;
}

void BM_FrequencyFeasibility(benchmark::State& state) {
  const coinfer::PlanProblem p = reference_problem();
  for (auto _ : state) {
    auto result = coinfer::frequency_feasibility(3, p);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_FrequencyFeasibility);

void BM_BruteForcePlan(benchmark::State& state) {
  const coinfer::PlanProblem p = reference_problem();
  for (auto _ : state) {
    auto plan = coinfer::brute_force_plan(p);
    benchmark::DoNotOptimize(plan);
  }
}
BENCHMARK(BM_BruteForcePlan);

void BM_ScaPlan(benchmark::State& state) {
  coinfer::PlanProblem p = reference_problem();
  p.workload.b_max = static_cast<int>(state.range(0));
  p.workload.native_bits = std::max(16, p.workload.b_max);
  p.t0 = 1e3;  // loose budgets exercise the full climb to b_max
  p.e0 = 1e3;
  for (auto _ : state) {
    auto result = coinfer::sca_plan(p, 1e-12, 200);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_ScaPlan)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
