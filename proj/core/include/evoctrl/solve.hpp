#pragma once

#include <string>
#include <vector>

#include "evoctrl/control.hpp"
#include "evoctrl/damping.hpp"
#include "evoctrl/evolution_kernel.hpp"
#include "evoctrl/inclusion.hpp"
#include "evoctrl/spectral.hpp"
#include "evoctrl/time_grid.hpp"
#include "evoctrl/trajectory.hpp"

namespace evoctrl {

struct SolveOptions {
  double fixed_point_tol = 1e-9;  // sup-norm residual between sweeps
  int max_iterations = 200;
  double relaxation = 1.0;  // damped update weight in (0, 1]
};

struct ControlProblem {
  ModeSet modes;
  TimeGrid grid;
  DampingSpec damping;
  OperatorMatrix input;  // B
  SetValuedMap inclusion;
  SpectralVector initial_position;
  SpectralVector initial_velocity;
  SpectralVector target;
  double regularization = 1e-2;
  SolveOptions options;
};

void validate_problem(const ControlProblem& problem);

struct ImpulseEvent {
  double time = 0.0;
  int node = 0;
  Eigen::VectorXcd position_pre, position_post, position_jump;
  Eigen::VectorXcd velocity_pre, velocity_post, velocity_jump;
};

struct MildSolution {
  Trajectory states;      // left limits at every node
  Trajectory velocities;  // left limits, from the derivative kernels
  Trajectory controls;
  Trajectory selections;  // chosen f(t_j) along the final iterate
  std::vector<ImpulseEvent> impulse_events;
  double terminal_error = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;
  double contraction_constant = 0.0;
  bool contraction_warning = false;
  std::vector<std::string> warnings;
};

/// Growth limit of the inclusion over the horizon: c2 * T.
double gamma_from_growth(double c1, double c2, double horizon);

/// Fixed-point budget N gamma (1 + N^2 M_B^2 T / a); the solver warns at >= 1.
double contraction_constant(double sine_bound, double gamma, double input_norm, double a,
                            double horizon);

// Mild solution by damped Picard iteration on the controlled integral equation:
// selections are re-chosen from the current iterate each sweep and the control is
// resynthesized from the current residual target. Non-convergence is reported in
// the returned status, never silently truncated.
MildSolution picard_solve(const ControlProblem& problem, const SelectionStrategy& strategy,
                          const EvolutionKernel& kernel, const Gramian& gramian);

/// Variant with initial data corrected by trajectory functionals g, h.
MildSolution nonlocal_solve(const ControlProblem& problem, const NonlocalSpec& nonlocal,
                            const SelectionStrategy& strategy, const EvolutionKernel& kernel,
                            const Gramian& gramian);

/// Variant with state and velocity jumps at fixed interior grid nodes.
MildSolution impulsive_solve(const ControlProblem& problem, const NonlocalSpec& nonlocal,
                             const ImpulseSpec& impulses, const SelectionStrategy& strategy,
                             const EvolutionKernel& kernel, const Gramian& gramian);

// Convenience overloads that build the kernel and Gramian internally.
MildSolution picard_solve(const ControlProblem& problem, const SelectionStrategy& strategy);
MildSolution nonlocal_solve(const ControlProblem& problem, const NonlocalSpec& nonlocal,
                            const SelectionStrategy& strategy);
MildSolution impulsive_solve(const ControlProblem& problem, const NonlocalSpec& nonlocal,
                             const ImpulseSpec& impulses, const SelectionStrategy& strategy);

struct ConvergenceTable {
  struct Row {
    double a = 0.0;
    double terminal_error = 0.0;
    int iterations = 0;
    bool converged = false;
    double contraction_constant = 0.0;
  };
  std::vector<Row> rows;
  bool nondecay_flag = false;
};

// Terminal-error study along a strictly decreasing regularization list. Requires a
// bounded inclusion (growth slope zero). Rows record per-solve convergence; a
// non-converged row does not stop the sweep.
ConvergenceTable sweep_regularization(const ControlProblem& problem,
                                      const std::vector<double>& a_list,
                                      const SelectionStrategy& strategy,
                                      const EvolutionKernel& kernel, const Gramian& gramian);

ConvergenceTable sweep_regularization(const ControlProblem& problem,
                                      const std::vector<double>& a_list,
                                      const SelectionStrategy& strategy);

}  // namespace evoctrl
