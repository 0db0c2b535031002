#include <benchmark/benchmark.h>

#include <random>

#include "fovholo/propagation.hpp"

using namespace fovholo;

namespace {

PhaseMap random_map(int n, int channels) {
  PhaseMap p(n, n, channels, 8e-6);
  std::mt19937_64 rng(1);
  for (auto& c : p.channels)
    for (double& v : c.data) v = (rng() >> 11) * 0x1.0p-53 * 6.28;
  return p;
}

void BM_FresnelKernel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(fresnel_transfer(n, n, {0.15, 520e-9, 8e-6}));
}
BENCHMARK(BM_FresnelKernel)->Arg(256)->Arg(512)->Arg(1024);

void BM_Propagate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  PhaseMap p = random_map(n, 1);
  ComplexField f = field_from_phase(p.channels[0], 8e-6);
  TransferKernel k = fresnel_transfer(n, n, {0.15, 520e-9, 8e-6});
  for (auto _ : state) benchmark::DoNotOptimize(propagate(f, k));
}
BENCHMARK(BM_Propagate)->Arg(256)->Arg(512)->Arg(1024);

void BM_ReconstructRgb(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  PhaseMap p = random_map(n, 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(reconstruct_intensity(p, 0.15, default_wavelengths(3)));
}
BENCHMARK(BM_ReconstructRgb)->Arg(256)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
