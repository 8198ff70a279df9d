#include <vector>

#include <benchmark/benchmark.h>

#include "hom/analytics.hpp"
#include "hom/kernels.hpp"

namespace {

using namespace hom;

std::vector<GateModel> scan_models() {
  const ExperimentConfig base = calibrate_config(apparatus_config(), 0.80);
  std::vector<GateModel> models;
  for (int k = 0; k < 21; ++k) {
    ExperimentConfig c = base;
    c.delay_ps = -6.0 + 0.6 * k;
    models.emplace_back(c);
  }
  return models;
}

void BM_SparseSerial(benchmark::State& state) {
  const auto models = scan_models();
  const auto gates = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::count_serial(models, gates, 7, kernels::Sampler::sparse));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(gates * models.size()));
}

void BM_SparseParallel(benchmark::State& state) {
  const auto models = scan_models();
  const auto gates = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::count_parallel(models, gates, 7, 0, kernels::Sampler::sparse));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(gates * models.size()));
}

void BM_PerGateSerial(benchmark::State& state) {
  const auto models = scan_models();
  const auto gates = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::count_serial(models, gates, 7, kernels::Sampler::per_gate));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(gates * models.size()));
}

void BM_PerGateParallel(benchmark::State& state) {
  const auto models = scan_models();
  const auto gates = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        kernels::count_parallel(models, gates, 7, 0, kernels::Sampler::per_gate));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(gates * models.size()));
}

}  // namespace

BENCHMARK(BM_SparseSerial)->Arg(1 << 20)->Arg(1 << 26)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SparseParallel)->Arg(1 << 20)->Arg(1 << 26)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PerGateSerial)->Arg(1 << 16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PerGateParallel)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
