// Serial reference vs OpenMP sweep over dense frequency grids.

#include <benchmark/benchmark.h>

#include "niform/lti/frequency.hpp"
#include "niform/lti/model_library.hpp"

using namespace niform::lti;

namespace {

const TransferFunction& plant() {
  static const auto lib = ModelLibrary::builtin();
  return lib.get("uav_velx").tf;
}

template <Exec E>
void BM_FrequencyResponse(benchmark::State& state) {
  const auto grid = FrequencyGrid::log_spaced(1e-3, 1e4, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(frequency_response(plant(), grid, E));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Exec E>
void BM_SniSweep(benchmark::State& state) {
  const auto grid = FrequencyGrid::log_spaced(1e-3, 1e4, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sni_sweep(plant(), grid, E));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_FrequencyResponse<Exec::serial>)->RangeMultiplier(16)->Range(400, 1 << 20);
BENCHMARK(BM_FrequencyResponse<Exec::parallel>)->RangeMultiplier(16)->Range(400, 1 << 20)->UseRealTime();
BENCHMARK(BM_SniSweep<Exec::serial>)->RangeMultiplier(16)->Range(400, 1 << 20);
BENCHMARK(BM_SniSweep<Exec::parallel>)->RangeMultiplier(16)->Range(400, 1 << 20)->UseRealTime();

BENCHMARK_MAIN();
