#include <benchmark/benchmark.h>

#include <vector>

#include "coinfer/quantizers.hpp"
#include "coinfer/rng.hpp"
#include "coinfer/weight_stats.hpp"

namespace {

std::vector<double> weights(std::size_t n) {
  coinfer::Rng rng(7);
  std::vector<double> out(n);
  for (double& v : out) v = rng.sign() * rng.exponential(1.0);
  return out;
}

void BM_QuantizeUniform(benchmark::State& state) {
  const auto data = weights(static_cast<std::size_t>(state.range(0)));
  const coinfer::QuantScheme scheme{coinfer::QuantKind::Uniform, 5,
                                    coinfer::magnitude_percentile(data, 0.999)};
  for (auto _ : state) {
    auto q = coinfer::quantize_uniform(data, scheme);
    benchmark::DoNotOptimize(q);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QuantizeUniform)->Range(1 << 12, 1 << 20);

void BM_QuantizePotLog(benchmark::State& state) {
  const auto data = weights(static_cast<std::size_t>(state.range(0)));
  const coinfer::QuantScheme scheme{coinfer::QuantKind::PotLog, 5,
                                    coinfer::magnitude_percentile(data, 0.999)};
  for (auto _ : state) {
    auto q = coinfer::quantize_pot_log(data, scheme);
    benchmark::DoNotOptimize(q);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QuantizePotLog)->Range(1 << 12, 1 << 20);

void BM_FitExponential(benchmark::State& state) {
  coinfer::MagnitudeSample sample;
  sample.values = weights(static_cast<std::size_t>(state.range(0)));
  for (double& v : sample.values) v = std::abs(v);
  for (auto _ : state) {
    auto stats = coinfer::fit_exponential(sample);
    benchmark::DoNotOptimize(stats);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitExponential)->Range(1 << 14, 1 << 20);

}  // namespace
