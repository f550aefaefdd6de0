#include "evoctrl/workbench.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "evoctrl/control.hpp"
#include "evoctrl/errors.hpp"
#include "evoctrl/evolution_kernel.hpp"
#include "evoctrl/oracle.hpp"
#include "evoctrl/solve.hpp"

namespace evoctrl {

namespace {

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& header) : stream_(path) {
    if (!stream_) throw std::runtime_error("cannot open output file " + path.string());
    stream_ << header << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) stream_ << ',';
      stream_ << cells[i];
    }
    stream_ << '\n';
  }

 private:
  std::ofstream stream_;
};

struct CheckRow {
  std::string name;
  double value;
  double tolerance;
  bool pass;
};

void append_check(std::vector<CheckRow>& rows, const std::string& name, double value,
                  double tolerance) {
  rows.push_back({name, value, tolerance, value <= tolerance});
}

std::filesystem::path prepare_out_dir(const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  return out_dir;
}

std::string scenario_header(const char* subcommand, const Scenario& scenario) {
  std::ostringstream text;
  text << "== " << subcommand << " : " << scenario.name << " ==\n";
  char digest[32];
  std::snprintf(digest, sizeof(digest), "%016llx",
                static_cast<unsigned long long>(scenario.digest));
  text << "scenario digest: " << digest << "\n";
  text << "modes: " << scenario.modes.size() << ", grid_steps: " << scenario.grid_steps
       << ", horizon: " << format_double(scenario.horizon) << "\n";
  return text.str();
}

struct ColumnAgreement {
  double sine_rel = 0.0;
  double cosine_rel = 0.0;
};

// Kernel columns against the dense first-order integrator. Source node `source`
// is handled by running the oracle with time-shifted damping, which reproduces
// integration started at t_source on the tail grid.
ColumnAgreement oracle_column_agreement(const EvolutionKernel& kernel, int source) {
  const ModeSet& modes = kernel.modes();
  const TimeGrid& grid = kernel.grid();
  const int dim = modes.dim();
  const int tail = grid.steps() - source;
  if (tail < 2) throw std::invalid_argument("oracle_column_agreement: source too close to horizon");

  const double t_source = grid.node(source);
  DampingSpec damping = kernel.damping();
  if (source > 0) {
    const DampingSpec& base = kernel.damping();
    damping = DampingSpec{[b = base.b, t_source](double t) { return b(t + t_source); }, base.beta};
  }
  const TimeGrid tail_grid(grid.horizon() - t_source, tail);

  Eigen::VectorXcd ones_v = Eigen::VectorXcd::Ones(dim);
  const SpectralVector ones(modes, ones_v);
  const SpectralVector zero = SpectralVector::zero(modes);
  const auto from_velocity = oracle::dense_integrate(modes, damping, tail_grid, zero, ones);
  const auto from_position = oracle::dense_integrate(modes, damping, tail_grid, ones, zero);

  ColumnAgreement agreement;
  for (int mi = 0; mi < dim; ++mi) {
    double q_diff = 0.0, q_scale = 0.0, r_diff = 0.0, r_scale = 0.0;
    for (int j = 0; j <= tail; ++j) {
      const dcomplex q_oracle = from_velocity.position.samples(mi, j);
      const dcomplex r_oracle = from_position.position.samples(mi, j);
      q_diff = std::max(q_diff, std::abs(kernel.sine(mi, source + j, source) - q_oracle));
      r_diff = std::max(r_diff, std::abs(kernel.cosine(mi, source + j, source) - r_oracle));
      q_scale = std::max(q_scale, std::abs(q_oracle));
      r_scale = std::max(r_scale, std::abs(r_oracle));
    }
    agreement.sine_rel = std::max(agreement.sine_rel, q_diff / std::max(q_scale, 1e-30));
    agreement.cosine_rel = std::max(agreement.cosine_rel, r_diff / std::max(r_scale, 1e-30));
  }
  return agreement;
}

ColumnAgreement closed_form_agreement(const EvolutionKernel& kernel) {
  const ModeSet& modes = kernel.modes();
  const TimeGrid& grid = kernel.grid();
  ColumnAgreement agreement;
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
    // The closed-form sine kernel peaks near 1/n, the cosine kernel near 1.
    agreement.sine_rel = std::max(agreement.sine_rel, q_diff * n);
    agreement.cosine_rel = std::max(agreement.cosine_rel, r_diff);
  }
  return agreement;
}

void write_check_csv(const std::filesystem::path& path, const std::vector<CheckRow>& rows) {
  CsvWriter csv(path, "check,value,tolerance,pass");
  for (const auto& row : rows) {
    csv.row({row.name, format_double(row.value), format_double(row.tolerance),
             row.pass ? "1" : "0"});
  }
}

std::vector<double> resolve_a_list(const Scenario& scenario) {
  if (!scenario.regularization_list.empty()) return scenario.regularization_list;
  return {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
}

}  // namespace

RunReport run_verify(const Scenario& scenario, const std::filesystem::path& out_dir) {
  const auto out = prepare_out_dir(out_dir);
  BuiltScenario built = build_scenario(scenario);
  const ModeSet& modes = built.problem.modes;
  const TimeGrid& grid = built.problem.grid;
  const int dim = modes.dim();
  const double h = grid.step();
  const double h2 = h * h;
  const double sqrt_dim = std::sqrt(static_cast<double>(dim));
  const int n_max = modes.mode(dim - 1);

  KernelBuildOptions options;
  options.store_derivatives = false;
  const EvolutionKernel kernel = build_kernel(modes, built.problem.damping, grid, options);
  const AxiomReport axioms = verify_axioms(kernel);

  std::vector<CheckRow> rows;
  append_check(rows, "sine_kernel_diagonal_zero", axioms.sine_diagonal_max, 0.0);
  append_check(rows, "cosine_kernel_diagonal_identity", axioms.cosine_diagonal_max_dev, 0.0);
  // Grid-order budgets: the centered differences on a smooth probe carry an
  // h^2/6 constant per mode; sqrt(dim) covers the l2 aggregation with margin.
  append_check(rows, "dt_derivative_identity", axioms.dt_identity_violation, h2 * sqrt_dim);
  append_check(rows, "ds_derivative_identity", axioms.ds_identity_violation, h2 * sqrt_dim);
  append_check(rows, "second_order_relation", axioms.second_order_residual,
               h2 * n_max * sqrt_dim / 3.0);
  append_check(rows, "gronwall_bound_violation", std::max(0.0, -axioms.gronwall_min_slack), 1e-9);
  append_check(rows, "substep_self_check", kernel.self_check_error(), 1e-8);
  append_check(rows, "sine_family_derivative", sine_family_derivative_residual(modes, grid),
               h2 * sqrt_dim);
  if (grid.steps() % 2 == 0) {
    append_check(rows, "cosine_family_integral_identity",
                 cosine_family_identity_residual(modes, grid), 1e-6);
  }

  const ColumnAgreement oracle_check = oracle_column_agreement(kernel, 0);
  append_check(rows, "oracle_sine_column_rel", oracle_check.sine_rel, 1e-6);
  append_check(rows, "oracle_cosine_column_rel", oracle_check.cosine_rel, 1e-6);

  if (built.problem.damping.is_zero()) {
    const ColumnAgreement closed = closed_form_agreement(kernel);
    append_check(rows, "closed_form_sine_rel", closed.sine_rel, 1e-8);
    append_check(rows, "closed_form_cosine_rel", closed.cosine_rel, 1e-8);
  }

  const auto csv_path = out / "axiom_report.csv";
  write_check_csv(csv_path, rows);

  RunReport report;
  report.subcommand = "verify";
  report.output_files.push_back(csv_path.string());
  std::ostringstream text;
  text << scenario_header("verify", scenario);
  bool all_pass = true;
  for (const auto& row : rows) {
    text << (row.pass ? "pass " : "FAIL ") << row.name << ": " << format_double(row.value)
         << " (tolerance " << format_double(row.tolerance) << ")\n";
    all_pass = all_pass && row.pass;
  }
  text << "gronwall min slack: " << format_double(axioms.gronwall_min_slack) << "\n";
  text << "sine kernel sup: " << format_double(kernel.sine_sup())
       << ", cosine kernel sup: " << format_double(kernel.cosine_sup()) << "\n";
  report.exit_code = all_pass ? kExitOk : kExitCheckFailed;
  text << (all_pass ? "verify: all checks passed\n" : "verify: CHECKS FAILED\n");
  report.summary = text.str();
  return report;
}

RunReport run_gramian(const Scenario& scenario, const std::filesystem::path& out_dir) {
  const auto out = prepare_out_dir(out_dir);
  BuiltScenario built = build_scenario(scenario);
  const ModeSet& modes = built.problem.modes;
  const int dim = modes.dim();

  KernelBuildOptions options;
  options.store_derivatives = false;
  const EvolutionKernel kernel = build_kernel(modes, built.problem.damping, built.problem.grid, options);
  const Gramian gramian = assemble_gramian(kernel, built.problem.input);

  // Fixed probe set: lowest mode, highest mode, smooth profile.
  Eigen::VectorXcd smooth(dim);
  for (int i = 0; i < dim; ++i) {
    const double n = static_cast<double>(modes.mode(i));
    smooth(i) = 1.0 / (n * n);
  }
  const std::vector<SpectralVector> probes = {SpectralVector::unit(modes, 0),
                                              SpectralVector::unit(modes, dim - 1),
                                              SpectralVector(modes, smooth)};
  const std::vector<double> a_list = resolve_a_list(scenario);
  const DecayTable table = h0_diagnostic(gramian, a_list, probes);

  const auto decay_path = out / "h0_decay.csv";
  {
    CsvWriter csv(decay_path, "a,probe_id,norm_value");
    for (const auto& row : table.rows) {
      csv.row({format_double(row.a), std::to_string(row.probe_id), format_double(row.norm_value)});
    }
  }
  const auto summary_path = out / "gramian_summary.csv";
  {
    CsvWriter csv(summary_path, "key,value");
    csv.row({"lambda_min", format_double(gramian.lambda_min)});
    csv.row({"lambda_max", format_double(gramian.eigenvalues(dim - 1))});
    csv.row({"hermiticity_residual", format_double(gramian.hermiticity_residual)});
    csv.row({"quadrature_steps", std::to_string(gramian.quadrature_steps)});
    csv.row({"sine_kernel_sup", format_double(kernel.sine_sup())});
    csv.row({"cosine_kernel_sup", format_double(kernel.cosine_sup())});
    csv.row({"time_lipschitz_estimate", format_double(kernel.time_lipschitz())});
  }

  RunReport report;
  report.subcommand = "gramian";
  report.output_files = {summary_path.string(), decay_path.string()};
  std::ostringstream text;
  text << scenario_header("gramian", scenario);
  text << "lambda_min: " << format_double(gramian.lambda_min) << "\n";
  text << "hermiticity residual: " << format_double(gramian.hermiticity_residual) << "\n";
  text << "sine kernel sup: " << format_double(kernel.sine_sup())
       << ", cosine kernel sup: " << format_double(kernel.cosine_sup())
       << ", time lipschitz estimate: " << format_double(kernel.time_lipschitz()) << "\n";
  if (table.nondecay_probe_ids.empty()) {
    text << "resolvent decay: all probes decay as a -> 0\n";
  } else {
    for (int id : table.nondecay_probe_ids) {
      text << "NON-DECAY flag: probe " << id << " shows no resolvent decay\n";
    }
  }
  report.summary = text.str();
  report.exit_code = kExitOk;
  return report;
}

namespace {

void write_solution_csv(const std::filesystem::path& path, const ModeSet& modes,
                        const MildSolution& solution) {
  std::ostringstream header;
  header << "t";
  for (int i = 0; i < modes.dim(); ++i) {
    header << ",re_x" << modes.mode(i) << ",im_x" << modes.mode(i);
  }
  for (int i = 0; i < modes.dim(); ++i) {
    header << ",re_u" << modes.mode(i) << ",im_u" << modes.mode(i);
  }
  CsvWriter csv(path, header.str());
  const TimeGrid& grid = solution.states.grid;
  for (int j = 0; j <= grid.steps(); ++j) {
    std::vector<std::string> cells;
    cells.push_back(format_double(grid.node(j)));
    for (int i = 0; i < modes.dim(); ++i) {
      cells.push_back(format_double(solution.states.samples(i, j).real()));
      cells.push_back(format_double(solution.states.samples(i, j).imag()));
    }
    for (int i = 0; i < modes.dim(); ++i) {
      cells.push_back(format_double(solution.controls.samples(i, j).real()));
      cells.push_back(format_double(solution.controls.samples(i, j).imag()));
    }
    csv.row(cells);
  }
}

void write_impulse_events_csv(const std::filesystem::path& path, const ModeSet& modes,
                              const MildSolution& solution) {
  CsvWriter csv(path, "time,field,mode,re,im");
  const auto emit = [&](const ImpulseEvent& event, const char* field, const Eigen::VectorXcd& v) {
    for (int i = 0; i < modes.dim(); ++i) {
      csv.row({format_double(event.time), field, std::to_string(modes.mode(i)),
               format_double(v(i).real()), format_double(v(i).imag())});
    }
  };
  for (const auto& event : solution.impulse_events) {
    emit(event, "position_pre", event.position_pre);
    emit(event, "position_post", event.position_post);
    emit(event, "position_jump", event.position_jump);
    emit(event, "velocity_pre", event.velocity_pre);
    emit(event, "velocity_post", event.velocity_post);
    emit(event, "velocity_jump", event.velocity_jump);
  }
}

MildSolution dispatch_solve(const BuiltScenario& built, const EvolutionKernel& kernel,
                            const Gramian& gramian) {
  if (built.impulses.has_value()) {
    const NonlocalSpec nonlocal = built.nonlocal.has_value()
                                      ? *built.nonlocal
                                      : NonlocalSpec{zero_functional(built.problem.modes),
                                                     zero_functional(built.problem.modes)};
    return impulsive_solve(built.problem, nonlocal, *built.impulses, built.strategy, kernel, gramian);
  }
  if (built.nonlocal.has_value()) {
    return nonlocal_solve(built.problem, *built.nonlocal, built.strategy, kernel, gramian);
  }
  return picard_solve(built.problem, built.strategy, kernel, gramian);
}

}  // namespace

RunReport run_solve(const Scenario& scenario, const std::filesystem::path& out_dir) {
  const auto out = prepare_out_dir(out_dir);
  BuiltScenario built = build_scenario(scenario);
  const EvolutionKernel kernel = build_kernel(built.problem.modes, built.problem.damping,
                                              built.problem.grid);
  const Gramian gramian = assemble_gramian(kernel, built.problem.input);
  const MildSolution solution = dispatch_solve(built, kernel, gramian);

  RunReport report;
  report.subcommand = "solve";
  const auto solution_path = out / "solution.csv";
  write_solution_csv(solution_path, built.problem.modes, solution);
  report.output_files.push_back(solution_path.string());
  if (!solution.impulse_events.empty()) {
    const auto events_path = out / "impulse_events.csv";
    write_impulse_events_csv(events_path, built.problem.modes, solution);
    report.output_files.push_back(events_path.string());
  }

  std::ostringstream text;
  text << scenario_header("solve", scenario);
  text << "converged: " << (solution.converged ? "yes" : "NO") << " after " << solution.iterations
       << " sweeps\n";
  text << "terminal error: " << format_double(solution.terminal_error) << "\n";
  text << "contraction budget: " << format_double(solution.contraction_constant)
       << (solution.contraction_warning ? " (WARNING: >= 1)" : "") << "\n";
  text << "gramian lambda_min: " << format_double(gramian.lambda_min) << "\n";
  if (!solution.residual_history.empty()) {
    text << "first/last residual: " << format_double(solution.residual_history.front()) << " / "
         << format_double(solution.residual_history.back()) << "\n";
  }
  for (const auto& warning : solution.warnings) text << "warning: " << warning << "\n";
  report.summary = text.str();
  report.exit_code = solution.converged ? kExitOk : kExitNonConverged;
  return report;
}

RunReport run_sweep(const Scenario& scenario, const std::filesystem::path& out_dir) {
  const auto out = prepare_out_dir(out_dir);
  BuiltScenario built = build_scenario(scenario);
  const EvolutionKernel kernel = build_kernel(built.problem.modes, built.problem.damping,
                                              built.problem.grid);
  const Gramian gramian = assemble_gramian(kernel, built.problem.input);
  const std::vector<double> a_list = resolve_a_list(scenario);
  const ConvergenceTable table =
      sweep_regularization(built.problem, a_list, built.strategy, kernel, gramian);

  const auto table_path = out / "convergence_table.csv";
  {
    CsvWriter csv(table_path, "a,terminal_error,iterations,converged,contraction_constant");
    for (const auto& row : table.rows) {
      csv.row({format_double(row.a), format_double(row.terminal_error),
               std::to_string(row.iterations), row.converged ? "1" : "0",
               format_double(row.contraction_constant)});
    }
  }

  bool all_converged = true;
  for (const auto& row : table.rows) all_converged = all_converged && row.converged;

  RunReport report;
  report.subcommand = "sweep";
  report.output_files.push_back(table_path.string());
  std::ostringstream text;
  text << scenario_header("sweep", scenario);
  text << "rows: " << table.rows.size() << ", all converged: " << (all_converged ? "yes" : "NO")
       << "\n";
  text << "terminal error first/last: " << format_double(table.rows.front().terminal_error)
       << " / " << format_double(table.rows.back().terminal_error) << "\n";
  if (table.nondecay_flag) {
    text << "NON-DECAY flag: terminal error does not decrease along the a-list\n";
  }
  report.summary = text.str();
  report.exit_code = all_converged ? kExitOk : kExitNonConverged;
  return report;
}

RunReport run_oracle(const Scenario& scenario, const std::filesystem::path& out_dir) {
  const auto out = prepare_out_dir(out_dir);
  BuiltScenario built = build_scenario(scenario);
  const ModeSet& modes = built.problem.modes;
  const TimeGrid& grid = built.problem.grid;
  const EvolutionKernel kernel = build_kernel(modes, built.problem.damping, grid);

  std::vector<CheckRow> rows;
  for (int source : {0, grid.steps() / 2}) {
    const ColumnAgreement agreement = oracle_column_agreement(kernel, source);
    const std::string suffix = "_source_" + std::to_string(source);
    append_check(rows, "dense_sine_column_rel" + suffix, agreement.sine_rel, 1e-6);
    append_check(rows, "dense_cosine_column_rel" + suffix, agreement.cosine_rel, 1e-6);
  }

  if (built.problem.damping.is_zero()) {
    const ColumnAgreement closed = closed_form_agreement(kernel);
    append_check(rows, "closed_form_sine_rel", closed.sine_rel, 1e-8);
    append_check(rows, "closed_form_cosine_rel", closed.cosine_rel, 1e-8);

    const bool identity_input =
        built.problem.input.entries.isIdentity(0.0);
    if (identity_input) {
      const Gramian gramian = assemble_gramian(kernel, built.problem.input);
      const Eigen::VectorXd reference =
          oracle::quadrature_gramian_reference(modes, grid.horizon());
      double worst = 0.0;
      for (int i = 0; i < modes.dim(); ++i) {
        const double entry = gramian.matrix.entries(i, i).real();
        worst = std::max(worst, std::abs(entry - reference(i)) / std::abs(reference(i)));
      }
      append_check(rows, "gramian_diagonal_rel", worst, 1e-6);
    }
  }

  // Re-feed check: solve the uncontrolled-inclusion-free problem and push the
  // synthesized control through the dense integrator as an external forcing.
  const bool linear = built.problem.inclusion.growth_offset == 0.0 &&
                      built.problem.inclusion.growth_slope == 0.0 && !built.impulses.has_value() &&
                      !built.nonlocal.has_value();
  if (linear) {
    const Gramian gramian = assemble_gramian(kernel, built.problem.input);
    const MildSolution solution = picard_solve(built.problem, built.strategy, kernel, gramian);
    Eigen::MatrixXcd forcing_samples =
        built.problem.input.entries * solution.controls.samples;
    const Trajectory forcing(modes, grid, std::move(forcing_samples));
    const auto dense = oracle::dense_integrate(modes, built.problem.damping, grid,
                                               built.problem.initial_position,
                                               built.problem.initial_velocity, &forcing);
    const double scale = std::max(1.0, solution.states.samples.col(grid.steps()).norm());
    const double diff =
        (dense.position.samples.col(grid.steps()) - solution.states.samples.col(grid.steps()))
            .norm() /
        scale;
    append_check(rows, "trajectory_refeed_terminal_rel", diff, 1e-6);
  }

  const auto csv_path = out / "oracle_report.csv";
  write_check_csv(csv_path, rows);

  RunReport report;
  report.subcommand = "oracle";
  report.output_files.push_back(csv_path.string());
  std::ostringstream text;
  text << scenario_header("oracle", scenario);
  bool all_pass = true;
  for (const auto& row : rows) {
    text << (row.pass ? "pass " : "FAIL ") << row.name << ": " << format_double(row.value)
         << " (tolerance " << format_double(row.tolerance) << ")\n";
    all_pass = all_pass && row.pass;
  }
  text << (all_pass ? "oracle: all checks passed\n" : "oracle: CHECKS FAILED\n");
  report.summary = text.str();
  report.exit_code = all_pass ? kExitOk : kExitCheckFailed;
  return report;
}

RunReport run_command(const std::string& command, const Scenario& scenario,
                      const std::filesystem::path& out_dir) {
  if (command == "verify") return run_verify(scenario, out_dir);
  if (command == "gramian") return run_gramian(scenario, out_dir);
  if (command == "solve") return run_solve(scenario, out_dir);
  if (command == "sweep") return run_sweep(scenario, out_dir);
  if (command == "oracle") return run_oracle(scenario, out_dir);
  throw std::invalid_argument("unknown subcommand '" + command +
                              "' (expected verify, gramian, solve, sweep or oracle)");
}

}  // namespace evoctrl
