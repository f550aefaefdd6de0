// Acceptance suite: one pass/fail line per criterion, exit code = failure count.
// Each criterion builds its own inputs in a scope so the kernel tables are freed
// before the next one runs.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "evoctrl/control.hpp"
#include "evoctrl/evolution_kernel.hpp"
#include "evoctrl/oracle.hpp"
#include "evoctrl/solve.hpp"
#include "evoctrl/spectral.hpp"

using namespace evoctrl;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass;
  std::string detail;
};

SpectralVector smooth_profile(const ModeSet& modes) {
  Eigen::VectorXcd coeffs(modes.dim());
  for (int i = 0; i < modes.dim(); ++i) {
    const double n = static_cast<double>(modes.mode(i));
    coeffs(i) = 1.0 / (n * n);
  }
  return SpectralVector(modes, std::move(coeffs));
}

ControlProblem steering_problem(const ModeSet& modes, const TimeGrid& grid,
                                const DampingSpec& damping, const OperatorMatrix& input,
                                double a) {
  return ControlProblem{modes,
                        grid,
                        damping,
                        input,
                        zero_inclusion(modes),
                        smooth_profile(modes),
                        SpectralVector::zero(modes),
                        SpectralVector::zero(modes),
                        a,
                        SolveOptions{}};
}

// Max over modes of the scaled column deviation between the tabulated kernels
// and the dense oracle started at grid node `source`.
std::pair<double, double> column_deviation(const EvolutionKernel& kernel, int source) {
  const ModeSet& modes = kernel.modes();
  const TimeGrid& grid = kernel.grid();
  const int tail = grid.steps() - source;
  const double t_source = grid.node(source);

  DampingSpec damping = kernel.damping();
  if (source > 0) {
    const DampingSpec& base = kernel.damping();
    damping = DampingSpec{[b = base.b, t_source](double t) { return b(t + t_source); }, base.beta};
  }
  const TimeGrid tail_grid(grid.horizon() - t_source, tail);
  const SpectralVector ones(modes, Eigen::VectorXcd::Ones(modes.dim()));
  const SpectralVector zero = SpectralVector::zero(modes);
  const auto sine_run = oracle::dense_integrate(modes, damping, tail_grid, zero, ones);
  const auto cosine_run = oracle::dense_integrate(modes, damping, tail_grid, ones, zero);

  double worst_q = 0.0, worst_r = 0.0;
  for (int mi = 0; mi < modes.dim(); ++mi) {
    double q_diff = 0.0, q_scale = 0.0, r_diff = 0.0, r_scale = 0.0;
    for (int j = 0; j <= tail; ++j) {
      q_diff = std::max(q_diff,
                        std::abs(kernel.sine(mi, source + j, source) - sine_run.position.samples(mi, j)));
      q_scale = std::max(q_scale, std::abs(sine_run.position.samples(mi, j)));
      r_diff = std::max(r_diff, std::abs(kernel.cosine(mi, source + j, source) -
                                         cosine_run.position.samples(mi, j)));
      r_scale = std::max(r_scale, std::abs(cosine_run.position.samples(mi, j)));
    }
    worst_q = std::max(worst_q, q_diff / q_scale);
    worst_r = std::max(worst_r, r_diff / r_scale);
  }
  return {worst_q, worst_r};
}

Outcome criterion_1_axioms() {
  const ModeSet modes = ModeSet::consecutive(16);
  const TimeGrid grid(kPi, 1024);
  KernelBuildOptions options;
  options.store_derivatives = false;
  const EvolutionKernel kernel = build_kernel(modes, cosine_damping(0.5), grid, options);
  const AxiomReport report = verify_axioms(kernel);

  const bool diag_exact = report.sine_diagonal_max == 0.0;
  const bool derivative_ok = report.dt_identity_violation < 1e-5;
  const bool gronwall_ok = report.gronwall_min_slack >= -1e-9;

  std::ostringstream detail;
  detail << "diag max " << report.sine_diagonal_max << ", dt violation "
         << report.dt_identity_violation << " (< 1e-5), gronwall slack "
         << report.gronwall_min_slack << " (>= -1e-9)";
  return {diag_exact && derivative_ok && gronwall_ok, detail.str()};
}

Outcome criterion_2_oracle_kernels() {
  const ModeSet modes = ModeSet::consecutive(32);
  const TimeGrid grid(kPi, 1024);
  KernelBuildOptions options;
  options.store_derivatives = false;

  bool pass = true;
  std::ostringstream detail;
  for (const bool damped : {false, true}) {
    const DampingSpec damping = damped ? cosine_damping(0.5) : zero_damping();
    const EvolutionKernel kernel = build_kernel(modes, damping, grid, options);
    double worst = 0.0;
    for (int source : {0, 512}) {
      const auto [q_rel, r_rel] = column_deviation(kernel, source);
      worst = std::max({worst, q_rel, r_rel});
    }
    pass = pass && worst < 1e-6;
    detail << (damped ? "damped" : "undamped") << " dense rel " << worst << " (< 1e-6)";

    if (!damped) {
      double closed_worst = 0.0;
      for (int mi = 0; mi < modes.dim(); ++mi) {
        const int n = modes.mode(mi);
        double q_diff = 0.0, r_diff = 0.0;
        for (int j = 0; j <= grid.steps(); ++j) {
          for (int k = 0; k <= j; ++k) {
            const auto [q_ref, r_ref] = oracle::closed_form_kernel(n, grid.node(j), grid.node(k));
            q_diff = std::max(q_diff, std::abs(kernel.sine(mi, j, k) - q_ref));
            r_diff = std::max(r_diff, std::abs(kernel.cosine(mi, j, k) - r_ref));
          }
        }
        closed_worst = std::max({closed_worst, q_diff * n, r_diff});
      }
      pass = pass && closed_worst < 1e-8;
      detail << ", closed form rel " << closed_worst << " (< 1e-8); ";
    }
  }
  return {pass, detail.str()};
}

Outcome criterion_3_gramian() {
  const ModeSet modes = ModeSet::consecutive(16);
  const TimeGrid grid(kPi, 1024);
  KernelBuildOptions options;
  options.store_derivatives = false;
  const EvolutionKernel kernel = build_kernel(modes, zero_damping(), grid, options);
  const Gramian gramian = assemble_gramian(kernel, OperatorMatrix::identity(16));
  const Eigen::VectorXd reference = oracle::quadrature_gramian_reference(modes, kPi);

  double worst = 0.0;
  for (int i = 0; i < modes.dim(); ++i) {
    worst = std::max(worst,
                     std::abs(gramian.matrix.entries(i, i).real() - reference(i)) / reference(i));
  }
  const bool entries_ok = worst < 1e-6;
  const bool hermitian_ok = gramian.hermiticity_residual <= 1e-12;
  const bool psd_ok = gramian.eigenvalues(0) >= -1e-10;

  std::ostringstream detail;
  detail << "diag rel " << worst << " (< 1e-6), hermiticity " << gramian.hermiticity_residual
         << " (<= 1e-12), lambda_min " << gramian.lambda_min << " (>= -1e-10)";
  return {entries_ok && hermitian_ok && psd_ok, detail.str()};
}

Outcome criterion_4_linear_controllability() {
  const ModeSet modes = ModeSet::consecutive(16);
  const TimeGrid grid(kPi, 512);
  const DampingSpec damping = cosine_damping(0.5);
  const EvolutionKernel kernel = build_kernel(modes, damping, grid);
  const OperatorMatrix input = OperatorMatrix::identity(16);
  const Gramian gramian = assemble_gramian(kernel, input);

  ControlProblem problem = steering_problem(modes, grid, damping, input, 1.0);
  const SpectralVector p = residual_target(kernel, problem.initial_position,
                                           problem.initial_velocity, problem.target);
  const double p_norm = norm(p);

  bool pass = gramian.lambda_min > 0.0;
  double previous = std::numeric_limits<double>::infinity();
  double last = 0.0, worst_mismatch = 0.0;
  for (double a : {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    problem.regularization = a;
    const MildSolution solution = picard_solve(problem, SelectionStrategy{}, kernel, gramian);
    const double predicted = linear_terminal_error(gramian, a, p);
    const double mismatch = std::abs(solution.terminal_error - predicted) / predicted;
    worst_mismatch = std::max(worst_mismatch, mismatch);
    pass = pass && solution.converged && mismatch <= 1e-8;
    const double envelope = a / (a + gramian.lambda_min) * p_norm;
    pass = pass && solution.terminal_error <= envelope * (1.0 + 1e-9);
    pass = pass && solution.terminal_error < previous;
    previous = solution.terminal_error;
    last = solution.terminal_error;
  }
  pass = pass && last < 1e-4 * p_norm;

  std::ostringstream detail;
  detail << "resolvent identity mismatch " << worst_mismatch << " (<= 1e-8), final error/||p|| "
         << last / p_norm << " (< 1e-4), strictly decreasing along 1..1e-6";
  return {pass, detail.str()};
}

Outcome criterion_5_bounded_sweep() {
  const ModeSet modes = ModeSet::consecutive(8);
  const TimeGrid grid(kPi, 512);
  const DampingSpec damping = cosine_damping(0.5);
  const EvolutionKernel kernel = build_kernel(modes, damping, grid);
  const OperatorMatrix input = OperatorMatrix::identity(8);
  const Gramian gramian = assemble_gramian(kernel, input);

  ControlProblem problem = steering_problem(modes, grid, damping, input, 1.0);
  Eigen::VectorXcd center(8);
  for (int i = 0; i < 8; ++i) center(i) = 0.05 / modes.mode(i);
  problem.inclusion = constant_inclusion(SpectralVector(modes, center), 0.1);

  const std::vector<double> decades = {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  const ConvergenceTable table =
      sweep_regularization(problem, decades, SelectionStrategy{}, kernel, gramian);

  bool pass = true;
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    pass = pass && table.rows[i].converged;
    if (i > 0) {
      pass = pass && table.rows[i].terminal_error <=
                         table.rows[i - 1].terminal_error * (1.0 + 1e-12);
    }
    if (table.rows[i].contraction_constant < 0.9) {
      problem.regularization = table.rows[i].a;
      const MildSolution solution = picard_solve(problem, SelectionStrategy{}, kernel, gramian);
      for (std::size_t k = 1; k < solution.residual_history.size(); ++k) {
        if (solution.residual_history[k - 1] > 1e-14) {
          const double ratio = solution.residual_history[k] / solution.residual_history[k - 1];
          worst_ratio = std::max(worst_ratio, ratio);
          pass = pass && ratio <= table.rows[i].contraction_constant + 0.1;
        }
      }
    }
  }

  std::ostringstream detail;
  detail << "errors nonincreasing over " << table.rows.size() << " rows, all converged, worst "
         << "residual ratio " << worst_ratio << " (<= budget + 0.1)";
  return {pass, detail.str()};
}

Outcome criterion_6_reduction_chain() {
  const ModeSet modes = ModeSet::consecutive(6);
  const TimeGrid grid(kPi, 256);
  const DampingSpec damping = cosine_damping(0.5);
  const EvolutionKernel kernel = build_kernel(modes, damping, grid);
  const OperatorMatrix input = OperatorMatrix::identity(6);
  const Gramian gramian = assemble_gramian(kernel, input);

  ControlProblem problem = steering_problem(modes, grid, damping, input, 0.5);
  problem.inclusion = saturated_state_inclusion(modes, 0.01, 0.005);
  const SelectionStrategy strategy{};
  const NonlocalSpec none{zero_functional(modes), zero_functional(modes)};

  const MildSolution base = picard_solve(problem, strategy, kernel, gramian);
  const MildSolution via_nonlocal = nonlocal_solve(problem, none, strategy, kernel, gramian);
  const MildSolution via_impulsive =
      impulsive_solve(problem, none, ImpulseSpec{}, strategy, kernel, gramian);

  const auto identical = [](const Trajectory& a, const Trajectory& b) {
    for (Eigen::Index i = 0; i < a.samples.size(); ++i) {
      if (a.samples.data()[i] != b.samples.data()[i]) return false;
    }
    return true;
  };
  const bool pass = identical(base.states, via_nonlocal.states) &&
                    identical(base.states, via_impulsive.states) &&
                    identical(base.controls, via_nonlocal.controls) &&
                    identical(base.controls, via_impulsive.controls) &&
                    identical(base.velocities, via_impulsive.velocities);
  return {pass, pass ? "picard == nonlocal(0) == impulsive(none), trajectories bitwise-equal"
                     : "trajectories differ between the three entry points"};
}

Outcome criterion_7_impulse_consistency() {
  const ModeSet modes = ModeSet::consecutive(8);
  const TimeGrid grid(kPi, 512);
  const DampingSpec damping = zero_damping();
  const EvolutionKernel kernel = build_kernel(modes, damping, grid);
  const OperatorMatrix input = OperatorMatrix::zero(8);  // control forced to zero
  const Gramian gramian = assemble_gramian(kernel, input);

  ControlProblem problem = steering_problem(modes, grid, damping, input, 0.1);
  Eigen::VectorXcd jump_p(8), jump_v(8);
  for (int i = 0; i < 8; ++i) {
    jump_p(i) = 0.1 / modes.mode(i);
    jump_v(i) = -0.05 / modes.mode(i);
  }
  ImpulseSpec impulses;
  impulses.impulses.push_back(Impulse{grid.node(256),
                                      constant_jump(SpectralVector(modes, jump_p)),
                                      constant_jump(SpectralVector(modes, jump_v)), jump_p.norm(),
                                      jump_v.norm()});

  const NonlocalSpec none{zero_functional(modes), zero_functional(modes)};
  const MildSolution solution =
      impulsive_solve(problem, none, impulses, SelectionStrategy{}, kernel, gramian);

  bool pass = solution.converged && solution.impulse_events.size() == 1;
  if (pass) {
    const ImpulseEvent& event = solution.impulse_events.front();
    for (int i = 0; i < modes.dim(); ++i) {
      pass = pass && event.position_post(i) == event.position_pre(i) + jump_p(i);
      pass = pass && event.velocity_post(i) == event.velocity_pre(i) + jump_v(i);
    }
    pass = pass && (event.position_jump - jump_p).norm() == 0.0;
  }

  const auto dense = oracle::dense_integrate(modes, damping, grid, problem.initial_position,
                                             problem.initial_velocity, nullptr, &impulses);
  double worst = 0.0;
  for (int j = 257; j <= grid.steps(); ++j) {
    worst = std::max(worst, (solution.states.samples.col(j) - dense.position.samples.col(j)).norm());
  }
  pass = pass && worst < 1e-6;

  std::ostringstream detail;
  detail << "jump exact, post-impulse oracle deviation " << worst << " (< 1e-6)";
  return {pass, detail.str()};
}

Outcome criterion_8_nonlocal_consistency() {
  const ModeSet modes = ModeSet::consecutive(8);
  const TimeGrid grid(kPi, 512);
  const DampingSpec damping = cosine_damping(0.5);
  const EvolutionKernel kernel = build_kernel(modes, damping, grid);
  const OperatorMatrix input = OperatorMatrix::identity(8);
  const Gramian gramian = assemble_gramian(kernel, input);

  ControlProblem problem = steering_problem(modes, grid, damping, input, 0.1);
  const NonlocalSpec nonlocal{point_evaluation_functional(0.1, 0.0), zero_functional(modes)};
  const MildSolution solution =
      nonlocal_solve(problem, nonlocal, SelectionStrategy{}, kernel, gramian);

  const Eigen::VectorXcd constraint =
      solution.states.samples.col(0) + 0.1 * solution.states.samples.col(0) -
      problem.initial_position.coeffs;
  const double violation = constraint.norm();

  std::ostringstream detail;
  detail << "converged " << (solution.converged ? "yes" : "no") << ", ||x(0)+g(x)-x0|| = "
         << violation << " (< 1e-8)";
  return {solution.converged && violation < 1e-8, detail.str()};
}

Outcome criterion_9_h0_failure() {
  const ModeSet modes = ModeSet::consecutive(8);
  const TimeGrid grid(kPi, 256);
  const DampingSpec damping = zero_damping();
  const EvolutionKernel kernel = build_kernel(modes, damping, grid);
  const OperatorMatrix input = OperatorMatrix::zero(8);
  const Gramian gramian = assemble_gramian(kernel, input);

  const std::vector<double> decades = {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  const std::vector<SpectralVector> probes = {SpectralVector::unit(modes, 0),
                                              SpectralVector::unit(modes, 7),
                                              smooth_profile(modes)};
  const DecayTable table = h0_diagnostic(gramian, decades, probes);
  const bool all_flagged = table.nondecay_probe_ids.size() == probes.size();

  ControlProblem problem = steering_problem(modes, grid, damping, input, 1.0);
  problem.target = SpectralVector(modes, 0.5 * smooth_profile(modes).coeffs);
  const ConvergenceTable sweep =
      sweep_regularization(problem, decades, SelectionStrategy{}, kernel, gramian);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& row : sweep.rows) {
    lo = std::min(lo, row.terminal_error);
    hi = std::max(hi, row.terminal_error);
  }
  const bool constant_error = (hi - lo) <= 1e-12 * hi;

  std::ostringstream detail;
  detail << "flagged probes " << table.nondecay_probe_ids.size() << "/3, sweep flag "
         << (sweep.nondecay_flag ? "set" : "missing") << ", error spread " << (hi - lo);
  return {all_flagged && sweep.nondecay_flag && constant_error, detail.str()};
}

Outcome criterion_10_determinism() {
  const std::filesystem::path cli = EVOCTRL_CLI_PATH;
  const std::filesystem::path scenario =
      std::filesystem::path(EVOCTRL_SCENARIO_DIR) / "determinism_smoke.json";
  const auto base = std::filesystem::temp_directory_path() / "evoctrl_acceptance_det";
  std::filesystem::remove_all(base);

  const auto run_once = [&](const std::string& tag) -> int {
    const auto out = base / tag;
    std::ostringstream command;
    command << cli << " solve --scenario " << scenario << " --out " << out << " > /dev/null";
    const int status = std::system(command.str().c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const int first = run_once("a");
  const int second = run_once("b");

  const auto slurp = [](const std::filesystem::path& path) {
    std::ifstream stream(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << stream.rdbuf();
    return buffer.str();
  };
  const std::string csv_a = slurp(base / "a" / "solution.csv");
  const std::string csv_b = slurp(base / "b" / "solution.csv");
  const bool pass = first == 0 && second == 0 && !csv_a.empty() && csv_a == csv_b;

  std::ostringstream detail;
  detail << "cli exits " << first << "/" << second << ", solution.csv byte-identical: "
         << (csv_a == csv_b ? "yes" : "no");
  return {pass, detail.str()};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* label;
    Outcome (*run)();
  };
  const std::vector<Entry> criteria = {
      {1, "evolution-axiom suite", criterion_1_axioms},
      {2, "oracle kernel equivalence", criterion_2_oracle_kernels},
      {3, "gramian correctness", criterion_3_gramian},
      {4, "linear approximate controllability", criterion_4_linear_controllability},
      {5, "nonlinear bounded sweep", criterion_5_bounded_sweep},
      {6, "reduction chain", criterion_6_reduction_chain},
      {7, "impulse consistency", criterion_7_impulse_consistency},
      {8, "nonlocal consistency", criterion_8_nonlocal_consistency},
      {9, "H0 failure detection", criterion_9_h0_failure},
      {10, "determinism", criterion_10_determinism},
  };

  int failures = 0;
  for (const auto& entry : criteria) {
    Outcome outcome{false, ""};
    try {
      outcome = entry.run();
    } catch (const std::exception& error) {
      outcome = {false, std::string("exception: ") + error.what()};
    }
    if (!outcome.pass) ++failures;
    std::cout << "criterion " << entry.id << " (" << entry.label << "): "
              << (outcome.pass ? "PASS" : "FAIL") << " -- " << outcome.detail << "\n";
  }
  std::cout << (failures == 0 ? "acceptance: all criteria passed"
                              : "acceptance: " + std::to_string(failures) + " criteria FAILED")
            << "\n";
  return failures;
}
