#include <benchmark/benchmark.h>

#include "evoctrl/control.hpp"
#include "evoctrl/solve.hpp"

using namespace evoctrl;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Setup {
  Setup(int n_modes, int steps)
      : modes(ModeSet::consecutive(n_modes)),
        grid(kPi, steps),
        damping(cosine_damping(0.5)),
        kernel(build_kernel(modes, damping, grid)),
        input(OperatorMatrix::identity(n_modes)),
        gramian(assemble_gramian(kernel, input)) {}

  ModeSet modes;
  TimeGrid grid;
  DampingSpec damping;
  EvolutionKernel kernel;
  OperatorMatrix input;
  Gramian gramian;
};

SpectralVector smooth_profile(const ModeSet& modes) {
  Eigen::VectorXcd coeffs(modes.dim());
  for (int i = 0; i < modes.dim(); ++i) {
    const double n = static_cast<double>(modes.mode(i));
    coeffs(i) = 1.0 / (n * n);
  }
  return SpectralVector(modes, std::move(coeffs));
}

void BM_AssembleGramian(benchmark::State& state) {
  static const Setup setup(16, 512);
  for (auto _ : state) {
    const Gramian gramian = assemble_gramian(setup.kernel, setup.input);
    benchmark::DoNotOptimize(gramian.lambda_min);
  }
}

void BM_ResolventApply(benchmark::State& state) {
  static const Setup setup(16, 512);
  const SpectralVector probe = smooth_profile(setup.modes);
  for (auto _ : state) {
    const SpectralVector w = resolvent_apply(setup.gramian, 1e-3, probe);
    benchmark::DoNotOptimize(w.coeffs);
  }
}

void BM_PicardSolveLinear(benchmark::State& state) {
  static const Setup setup(16, 512);
  const ControlProblem problem{setup.modes,
                               setup.grid,
                               setup.damping,
                               setup.input,
                               zero_inclusion(setup.modes),
                               smooth_profile(setup.modes),
                               SpectralVector::zero(setup.modes),
                               SpectralVector::zero(setup.modes),
                               1e-2,
                               SolveOptions{}};
  for (auto _ : state) {
    const MildSolution solution = picard_solve(problem, SelectionStrategy{}, setup.kernel,
                                               setup.gramian);
    benchmark::DoNotOptimize(solution.terminal_error);
  }
}

void BM_PicardSolveBounded(benchmark::State& state) {
  static const Setup setup(8, 512);
  ControlProblem problem{setup.modes,
                         setup.grid,
                         setup.damping,
                         OperatorMatrix::identity(8),
                         saturated_state_inclusion(setup.modes, 0.01, 0.005),
                         smooth_profile(setup.modes),
                         SpectralVector::zero(setup.modes),
                         SpectralVector::zero(setup.modes),
                         0.5,
                         SolveOptions{}};
  const Gramian gramian = assemble_gramian(setup.kernel, problem.input);
  for (auto _ : state) {
    const MildSolution solution = picard_solve(problem, SelectionStrategy{}, setup.kernel, gramian);
    benchmark::DoNotOptimize(solution.iterations);
  }
}

}  // namespace

BENCHMARK(BM_AssembleGramian)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ResolventApply)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PicardSolveLinear)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PicardSolveBounded)->Unit(benchmark::kMillisecond);
