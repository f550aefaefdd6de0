#include <benchmark/benchmark.h>

#include "evoctrl/evolution_kernel.hpp"

using namespace evoctrl;

namespace {

constexpr double kPi = 3.14159265358979323846;

void BM_BuildKernel(benchmark::State& state) {
  const ModeSet modes = ModeSet::consecutive(static_cast<int>(state.range(0)));
  const TimeGrid grid(kPi, static_cast<int>(state.range(1)));
  const DampingSpec damping = cosine_damping(0.5);
  KernelBuildOptions options;
  options.self_check = false;
  for (auto _ : state) {
    const EvolutionKernel kernel = build_kernel(modes, damping, grid, options);
    benchmark::DoNotOptimize(kernel.sine_sup());
  }
  state.SetComplexityN(state.range(1));
}

void BM_VerifyAxioms(benchmark::State& state) {
  const ModeSet modes = ModeSet::consecutive(8);
  const TimeGrid grid(kPi, static_cast<int>(state.range(0)));
  KernelBuildOptions options;
  options.store_derivatives = false;
  options.self_check = false;
  const EvolutionKernel kernel = build_kernel(modes, cosine_damping(0.5), grid, options);
  for (auto _ : state) {
    const AxiomReport report = verify_axioms(kernel);
    benchmark::DoNotOptimize(report.gronwall_min_slack);
  }
}

}  // namespace

BENCHMARK(BM_BuildKernel)->Args({8, 256})->Args({16, 512})->Args({16, 1024})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VerifyAxioms)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
