#include "evoctrl/solve.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "evoctrl/errors.hpp"

namespace evoctrl {

double gamma_from_growth(double c1, double c2, double horizon) {
  if (c1 < 0.0 || c2 < 0.0 || !(horizon > 0.0)) {
    throw std::invalid_argument("gamma_from_growth: growth constants must be >= 0, horizon > 0");
  }
  return c2 * horizon;
}

double contraction_constant(double sine_bound, double gamma, double input_norm, double a,
                            double horizon) {
  if (sine_bound < 0.0 || gamma < 0.0 || input_norm < 0.0 || horizon < 0.0) {
    throw std::invalid_argument("contraction_constant: inputs must be >= 0");
  }
  if (!(a > 0.0)) throw std::invalid_argument("contraction_constant: a must be positive");
  return sine_bound * gamma *
         (1.0 + sine_bound * sine_bound * input_norm * input_norm * horizon / a);
}

void validate_problem(const ControlProblem& problem) {
  const int dim = problem.modes.dim();
  if (problem.input.dim() != dim) {
    throw std::invalid_argument("ControlProblem: input operator dimension mismatch");
  }
  if (problem.initial_position.modes != problem.modes ||
      problem.initial_velocity.modes != problem.modes || problem.target.modes != problem.modes) {
    throw std::invalid_argument("ControlProblem: state vectors must share the problem mode set");
  }
  if (!(problem.regularization > 0.0) || !std::isfinite(problem.regularization)) {
    throw std::invalid_argument("ControlProblem: regularization must be positive");
  }
  if (!(problem.options.fixed_point_tol > 0.0)) {
    throw std::invalid_argument("ControlProblem: fixed-point tolerance must be positive");
  }
  if (problem.options.max_iterations < 1) {
    throw std::invalid_argument("ControlProblem: max_iterations must be >= 1");
  }
  if (!(problem.options.relaxation > 0.0) || problem.options.relaxation > 1.0) {
    throw std::invalid_argument("ControlProblem: relaxation must be in (0, 1]");
  }
  if (!problem.inclusion.center || !problem.inclusion.radius) {
    throw std::invalid_argument("ControlProblem: inclusion map not set");
  }
  if (problem.inclusion.growth_offset < 0.0 || problem.inclusion.growth_slope < 0.0) {
    throw std::invalid_argument("ControlProblem: growth constants must be >= 0");
  }
}

namespace {

struct PreparedImpulse {
  int node;
  const Impulse* impulse;
};

std::vector<PreparedImpulse> prepare_impulses(const ImpulseSpec* impulses, const TimeGrid& grid) {
  std::vector<PreparedImpulse> prepared;
  if (impulses == nullptr) return prepared;
  int previous = 0;
  for (const auto& impulse : impulses->impulses) {
    const int node = grid.index_of(impulse.time);  // throws for off-grid times
    if (node <= 0 || node >= grid.steps()) {
      throw std::invalid_argument("impulse time " + std::to_string(impulse.time) +
                                  " must lie strictly inside the horizon");
    }
    if (node <= previous && !prepared.empty()) {
      throw std::invalid_argument("impulse times must be strictly increasing");
    }
    if (!impulse.position_jump || !impulse.velocity_jump) {
      throw std::invalid_argument("impulse jump maps must be set");
    }
    if (impulse.position_bound < 0.0 || impulse.velocity_bound < 0.0) {
      throw std::invalid_argument("impulse bounds must be >= 0");
    }
    prepared.push_back({node, &impulse});
    previous = node;
  }
  return prepared;
}

void check_jump_bound(const Eigen::VectorXcd& value, double bound, double time, const char* which) {
  const double magnitude = value.norm();
  if (magnitude > bound + 1e-9 * (1.0 + bound)) {
    throw DiagnosticError(std::string(which) + " jump at t = " + std::to_string(time) +
                          " exceeds its declared bound: " + std::to_string(magnitude) + " > " +
                          std::to_string(bound));
  }
}

class Selector {
 public:
  Selector(const SetValuedMap& map, const SelectionStrategy& strategy, const ModeSet& modes,
           const TimeGrid& grid)
      : map_(map), strategy_(strategy), modes_(modes), grid_(grid) {
    if (strategy.kind == SelectionStrategy::Kind::random_extreme) {
      // One frozen unit direction per node, drawn up front from the scenario seed,
      // so re-selection along successive iterates stays a deterministic map.
      std::mt19937_64 engine(strategy.seed);
      std::normal_distribution<double> gauss(0.0, 1.0);
      directions_.resize(modes.dim(), grid.steps() + 1);
      for (int j = 0; j <= grid.steps(); ++j) {
        Eigen::VectorXcd dir(modes.dim());
        double norm_sq = 0.0;
        do {
          for (int i = 0; i < modes.dim(); ++i) {
            const double re = gauss(engine);
            const double im = gauss(engine);
            dir(i) = dcomplex(re, im);
          }
          norm_sq = dir.squaredNorm();
        } while (norm_sq < 1e-30);
        directions_.col(j) = dir / std::sqrt(norm_sq);
      }
    }
  }

  Eigen::VectorXcd operator()(int node, const Eigen::VectorXcd& state) const {
    const double t = grid_.node(node);
    const SpectralVector x(modes_, state);
    const SpectralVector center = map_.center(t, x);
    const double radius = map_.radius(t, x);
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
      throw DiagnosticError("inclusion radius is negative or non-finite at t = " + std::to_string(t));
    }
    const double budget = map_.growth_offset + map_.growth_slope * state.norm();
    if (center.coeffs.norm() + radius > budget + 1e-9 * (1.0 + budget)) {
      throw DiagnosticError("set-valued map violates its growth envelope at t = " +
                            std::to_string(t));
    }
    switch (strategy_.kind) {
      case SelectionStrategy::Kind::center:
        return center.coeffs;
      case SelectionStrategy::Kind::min_norm_shift: {
        const double center_norm = center.coeffs.norm();
        if (center_norm <= radius) return Eigen::VectorXcd::Zero(modes_.dim());
        return center.coeffs * (1.0 - radius / center_norm);
      }
      case SelectionStrategy::Kind::random_extreme:
        return center.coeffs + radius * directions_.col(node);
    }
    throw std::logic_error("unknown selection strategy");
  }

 private:
  const SetValuedMap& map_;
  SelectionStrategy strategy_;
  ModeSet modes_;
  TimeGrid grid_;
  Eigen::MatrixXcd directions_;
};

MildSolution solve_mild(const ControlProblem& problem, const NonlocalSpec* nonlocal,
                        const ImpulseSpec* impulse_spec, const SelectionStrategy& strategy,
                        const EvolutionKernel& kernel, const Gramian& gramian) {
  validate_problem(problem);
  if (kernel.modes() != problem.modes || kernel.grid() != problem.grid) {
    throw std::invalid_argument("solve: kernel was built for a different mode set or grid");
  }
  if (!kernel.has_derivatives()) {
    throw std::invalid_argument("solve: kernel must be built with derivative tabulation");
  }
  if (gramian.matrix.dim() != problem.modes.dim()) {
    throw std::invalid_argument("solve: Gramian dimension mismatch");
  }
  if (nonlocal != nullptr && (!nonlocal->g.map || !nonlocal->h.map)) {
    throw std::invalid_argument("solve: nonlocal functionals must be set");
  }

  const ModeSet& modes = problem.modes;
  const TimeGrid& grid = problem.grid;
  const int dim = modes.dim();
  const int steps = grid.steps();
  const double h = grid.step();
  const double a = problem.regularization;
  const double omega = problem.options.relaxation;
  const Eigen::MatrixXcd& B = problem.input.entries;
  const Eigen::MatrixXcd B_adjoint = B.adjoint();

  const std::vector<PreparedImpulse> impulses = prepare_impulses(impulse_spec, grid);
  const Selector select(problem.inclusion, strategy, modes, grid);

  MildSolution solution{Trajectory::zero(modes, grid), Trajectory::zero(modes, grid),
                        Trajectory::zero(modes, grid), Trajectory::zero(modes, grid),
                        {},   0.0, 0, false, {}, 0.0, false, {}};

  const double gamma =
      gamma_from_growth(problem.inclusion.growth_offset, problem.inclusion.growth_slope,
                        grid.horizon());
  solution.contraction_constant =
      contraction_constant(kernel.sine_sup(), gamma, operator_norm(problem.input), a,
                           grid.horizon());
  if (solution.contraction_constant >= 1.0) {
    solution.contraction_warning = true;
    solution.warnings.push_back("fixed-point budget " +
                                std::to_string(solution.contraction_constant) +
                                " is >= 1; the iteration may not contract");
  }

  // Partial trapezoid sums of S(t_j, .) phi over [0, t_j], split one-sidedly at
  // impulse nodes so that no quadrature panel straddles a jump.
  const auto quad_into = [&](const Eigen::MatrixXcd& phi_pre,
                             const std::vector<Eigen::VectorXcd>& phi_post_delta, int j,
                             bool derivative, Eigen::VectorXcd& out) {
    out.setZero();
    if (j == 0) return;
    const auto table_value = [&](int mi, int row, int col) {
      return derivative ? kernel.sine_dt(mi, row, col) : kernel.sine(mi, row, col);
    };
    for (int k = 0; k <= j; ++k) {
      const double weight = (k == 0 || k == j) ? h / 2.0 : h;
      for (int mi = 0; mi < dim; ++mi) out(mi) += weight * table_value(mi, j, k) * phi_pre(mi, k);
    }
    for (std::size_t ii = 0; ii < impulses.size(); ++ii) {
      const int node = impulses[ii].node;
      if (node >= j) break;
      for (int mi = 0; mi < dim; ++mi) {
        out(mi) += h / 2.0 * table_value(mi, j, node) * phi_post_delta[ii](mi);
      }
    }
  };

  // Initial iterate: uncontrolled, unforced evolution of the raw initial data.
  Eigen::MatrixXcd states(dim, steps + 1);
  for (int j = 0; j <= steps; ++j) {
    for (int mi = 0; mi < dim; ++mi) {
      states(mi, j) = kernel.cosine(mi, j, 0) * problem.initial_position.coeffs(mi) +
                      kernel.sine(mi, j, 0) * problem.initial_velocity.coeffs(mi);
    }
  }

  // Last-sweep artifacts, reused for the velocity pass and the reported solution.
  Eigen::VectorXcd x0_eff = problem.initial_position.coeffs;
  Eigen::VectorXcd y0_eff = problem.initial_velocity.coeffs;
  Eigen::MatrixXcd selections(dim, steps + 1);
  Eigen::MatrixXcd controls(dim, steps + 1);
  Eigen::MatrixXcd phi(dim, steps + 1);
  std::vector<Eigen::VectorXcd> phi_post_delta;
  std::vector<Eigen::VectorXcd> jump_pos_values, jump_vel_values;

  Eigen::VectorXcd quad(dim);
  Eigen::VectorXcd g_prev(dim), h_prev(dim);
  double previous_residual = 0.0;
  bool lipschitz_warned = false;
  bool converged = false;
  int sweeps = 0;
  while (sweeps < problem.options.max_iterations) {
    ++sweeps;

    if (nonlocal != nullptr) {
      const Trajectory current(modes, grid, states);
      const Eigen::VectorXcd g_value = nonlocal->g.map(current).coeffs;
      const Eigen::VectorXcd h_value = nonlocal->h.map(current).coeffs;
      // Sampled Lipschitz check: consecutive iterates differ by the previous
      // residual in the sup norm, so the functional increments must stay within
      // the declared constants.
      if (sweeps > 1 && previous_residual > 1e-13 && !lipschitz_warned) {
        const double budget = previous_residual * (1.0 + 1e-9) + 1e-13;
        if ((g_value - g_prev).norm() > nonlocal->g.lipschitz * budget ||
            (h_value - h_prev).norm() > nonlocal->h.lipschitz * budget) {
          lipschitz_warned = true;
          solution.warnings.push_back(
              "nonlocal functional exceeded its declared Lipschitz constant on sampled iterates");
        }
      }
      g_prev = g_value;
      h_prev = h_value;
      x0_eff = problem.initial_position.coeffs - g_value;
      y0_eff = problem.initial_velocity.coeffs - h_value;
    }

    for (int j = 0; j <= steps; ++j) selections.col(j) = select(j, states.col(j));

    jump_pos_values.clear();
    jump_vel_values.clear();
    phi_post_delta.clear();
    for (const auto& prepared : impulses) {
      const SpectralVector pre(modes, states.col(prepared.node));
      Eigen::VectorXcd jump_p = prepared.impulse->position_jump(pre).coeffs;
      Eigen::VectorXcd jump_v = prepared.impulse->velocity_jump(pre).coeffs;
      check_jump_bound(jump_p, prepared.impulse->position_bound, prepared.impulse->time, "position");
      check_jump_bound(jump_v, prepared.impulse->velocity_bound, prepared.impulse->time, "velocity");
      const Eigen::VectorXcd post = states.col(prepared.node) + jump_p;
      const Eigen::VectorXcd f_post = select(prepared.node, post);
      phi_post_delta.push_back(f_post - selections.col(prepared.node));
      jump_pos_values.push_back(std::move(jump_p));
      jump_vel_values.push_back(std::move(jump_v));
    }

    // Residual target: everything the terminal state owes except the control term.
    Eigen::VectorXcd p = problem.target.coeffs;
    for (int mi = 0; mi < dim; ++mi) {
      p(mi) -= kernel.cosine(mi, steps, 0) * x0_eff(mi) + kernel.sine(mi, steps, 0) * y0_eff(mi);
    }
    quad_into(selections, phi_post_delta, steps, false, quad);
    p -= quad;
    for (std::size_t ii = 0; ii < impulses.size(); ++ii) {
      const int node = impulses[ii].node;
      for (int mi = 0; mi < dim; ++mi) {
        p(mi) -= kernel.cosine(mi, steps, node) * jump_pos_values[ii](mi) +
                 kernel.sine(mi, steps, node) * jump_vel_values[ii](mi);
      }
    }

    const Eigen::VectorXcd w = resolvent_apply(gramian, a, SpectralVector(modes, p)).coeffs;
    Eigen::VectorXcd weighted(dim);
    for (int j = 0; j <= steps; ++j) {
      for (int mi = 0; mi < dim; ++mi) weighted(mi) = std::conj(kernel.sine(mi, steps, j)) * w(mi);
      controls.col(j) = B_adjoint * weighted;
    }

    // The control is continuous across jumps, so the post-side quadrature deltas
    // of f + B u coincide with the selection deltas already collected.
    for (int j = 0; j <= steps; ++j) phi.col(j) = selections.col(j) + B * controls.col(j);

    Eigen::MatrixXcd next(dim, steps + 1);
    for (int j = 0; j <= steps; ++j) {
      quad_into(phi, phi_post_delta, j, false, quad);
      for (int mi = 0; mi < dim; ++mi) {
        quad(mi) += kernel.cosine(mi, j, 0) * x0_eff(mi) + kernel.sine(mi, j, 0) * y0_eff(mi);
      }
      for (std::size_t ii = 0; ii < impulses.size(); ++ii) {
        const int node = impulses[ii].node;
        if (node >= j) break;
        for (int mi = 0; mi < dim; ++mi) {
          quad(mi) += kernel.cosine(mi, j, node) * jump_pos_values[ii](mi) +
                      kernel.sine(mi, j, node) * jump_vel_values[ii](mi);
        }
      }
      next.col(j) = quad;
    }

    if (omega < 1.0) next = (1.0 - omega) * states + omega * next;

    double residual = 0.0;
    for (int j = 0; j <= steps; ++j) {
      residual = std::max(residual, (next.col(j) - states.col(j)).norm());
    }
    states.swap(next);
    solution.residual_history.push_back(residual);
    previous_residual = residual;
    if (residual < problem.options.fixed_point_tol) {
      converged = true;
      break;
    }
  }

  solution.iterations = sweeps;
  solution.converged = converged;
  if (!converged) {
    solution.warnings.push_back("fixed-point iteration did not reach tolerance " +
                                std::to_string(problem.options.fixed_point_tol) + " within " +
                                std::to_string(problem.options.max_iterations) + " sweeps");
  }

  // Velocity trajectory from the derivative kernels, with the last sweep's data.
  Eigen::MatrixXcd velocities(dim, steps + 1);
  for (int j = 0; j <= steps; ++j) {
    quad_into(phi, phi_post_delta, j, true, quad);
    for (int mi = 0; mi < dim; ++mi) {
      quad(mi) += kernel.cosine_dt(mi, j, 0) * x0_eff(mi) + kernel.sine_dt(mi, j, 0) * y0_eff(mi);
    }
    for (std::size_t ii = 0; ii < impulses.size(); ++ii) {
      const int node = impulses[ii].node;
      if (node >= j) break;
      for (int mi = 0; mi < dim; ++mi) {
        quad(mi) += kernel.cosine_dt(mi, j, node) * jump_pos_values[ii](mi) +
                    kernel.sine_dt(mi, j, node) * jump_vel_values[ii](mi);
      }
    }
    velocities.col(j) = quad;
  }

  // Impulse events are recomputed at the final trajectory so that the reported
  // jumps equal the maps evaluated at the reported pre-impulse states exactly.
  for (const auto& prepared : impulses) {
    ImpulseEvent event;
    event.time = prepared.impulse->time;
    event.node = prepared.node;
    event.position_pre = states.col(prepared.node);
    const SpectralVector pre(modes, event.position_pre);
    event.position_jump = prepared.impulse->position_jump(pre).coeffs;
    event.position_post = event.position_pre + event.position_jump;
    event.velocity_pre = velocities.col(prepared.node);
    event.velocity_jump = prepared.impulse->velocity_jump(pre).coeffs;
    event.velocity_post = event.velocity_pre + event.velocity_jump;
    solution.impulse_events.push_back(std::move(event));
  }

  solution.terminal_error = (states.col(steps) - problem.target.coeffs).norm();
  solution.states = Trajectory(modes, grid, std::move(states));
  solution.velocities = Trajectory(modes, grid, std::move(velocities));
  solution.controls = Trajectory(modes, grid, std::move(controls));
  solution.selections = Trajectory(modes, grid, std::move(selections));
  return solution;
}

}  // namespace

MildSolution picard_solve(const ControlProblem& problem, const SelectionStrategy& strategy,
                          const EvolutionKernel& kernel, const Gramian& gramian) {
  return solve_mild(problem, nullptr, nullptr, strategy, kernel, gramian);
}

MildSolution nonlocal_solve(const ControlProblem& problem, const NonlocalSpec& nonlocal,
                            const SelectionStrategy& strategy, const EvolutionKernel& kernel,
                            const Gramian& gramian) {
  return solve_mild(problem, &nonlocal, nullptr, strategy, kernel, gramian);
}

MildSolution impulsive_solve(const ControlProblem& problem, const NonlocalSpec& nonlocal,
                             const ImpulseSpec& impulses, const SelectionStrategy& strategy,
                             const EvolutionKernel& kernel, const Gramian& gramian) {
  return solve_mild(problem, &nonlocal, &impulses, strategy, kernel, gramian);
}

namespace {

std::pair<EvolutionKernel, Gramian> build_solver_inputs(const ControlProblem& problem) {
  EvolutionKernel kernel = build_kernel(problem.modes, problem.damping, problem.grid);
  Gramian gramian = assemble_gramian(kernel, problem.input);
  return {std::move(kernel), std::move(gramian)};
}

}  // namespace

MildSolution picard_solve(const ControlProblem& problem, const SelectionStrategy& strategy) {
  const auto [kernel, gramian] = build_solver_inputs(problem);
  return picard_solve(problem, strategy, kernel, gramian);
}

MildSolution nonlocal_solve(const ControlProblem& problem, const NonlocalSpec& nonlocal,
                            const SelectionStrategy& strategy) {
  const auto [kernel, gramian] = build_solver_inputs(problem);
  return nonlocal_solve(problem, nonlocal, strategy, kernel, gramian);
}

MildSolution impulsive_solve(const ControlProblem& problem, const NonlocalSpec& nonlocal,
                             const ImpulseSpec& impulses, const SelectionStrategy& strategy) {
  const auto [kernel, gramian] = build_solver_inputs(problem);
  return impulsive_solve(problem, nonlocal, impulses, strategy, kernel, gramian);
}

ConvergenceTable sweep_regularization(const ControlProblem& problem,
                                      const std::vector<double>& a_list,
                                      const SelectionStrategy& strategy,
                                      const EvolutionKernel& kernel, const Gramian& gramian) {
  if (a_list.empty()) throw std::invalid_argument("sweep_regularization: empty a-list");
  for (std::size_t i = 0; i < a_list.size(); ++i) {
    if (!(a_list[i] > 0.0)) {
      throw std::invalid_argument("sweep_regularization: a-list entries must be positive");
    }
    if (i > 0 && !(a_list[i] < a_list[i - 1])) {
      throw std::invalid_argument("sweep_regularization: a-list must be strictly decreasing");
    }
  }
  if (problem.inclusion.growth_slope != 0.0) {
    throw std::invalid_argument(
        "sweep_regularization: requires a bounded inclusion (growth slope zero)");
  }

  ConvergenceTable table;
  for (double a : a_list) {
    ControlProblem row_problem = problem;
    row_problem.regularization = a;
    const MildSolution solved = picard_solve(row_problem, strategy, kernel, gramian);
    table.rows.push_back({a, solved.terminal_error, solved.iterations, solved.converged,
                          solved.contraction_constant});
  }
  const double first = table.rows.front().terminal_error;
  const double last = table.rows.back().terminal_error;
  table.nondecay_flag = table.rows.size() > 1 && last >= first * (1.0 - 1e-9) && first > 0.0;
  return table;
}

ConvergenceTable sweep_regularization(const ControlProblem& problem,
                                      const std::vector<double>& a_list,
                                      const SelectionStrategy& strategy) {
  const auto [kernel, gramian] = build_solver_inputs(problem);
  return sweep_regularization(problem, a_list, strategy, kernel, gramian);
}

}  // namespace evoctrl
