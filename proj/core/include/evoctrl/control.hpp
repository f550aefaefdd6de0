#pragma once

#include <vector>

#include "evoctrl/evolution_kernel.hpp"
#include "evoctrl/spectral.hpp"
#include "evoctrl/trajectory.hpp"

namespace evoctrl {

/// Controllability Gramian over [0, T] with its cached eigenvalue decomposition.
struct Gramian {
  OperatorMatrix matrix;
  Eigen::VectorXd eigenvalues;  // ascending
  double lambda_min = 0.0;
  int quadrature_steps = 0;
  double hermiticity_residual = 0.0;  // ||U - U*|| / ||U||
};

// Composite-trapezoid quadrature of S(T, s) B B* S*(T, s) over the kernel grid.
// Reusing the tabulated kernel nodes keeps the Gramian and the mild-solution
// quadrature consistent, which makes the linear terminal identity exact.
Gramian assemble_gramian(const EvolutionKernel& kernel, const OperatorMatrix& B);

/// Solves (a I + Gramian) w = v; Hermitian factorization plus one refinement pass.
SpectralVector resolvent_apply(const Gramian& gramian, double a, const SpectralVector& v);

/// p = x_target - C(T,0) x0 - S(T,0) y0 - integral of S(T,s) f(s) ds.
SpectralVector residual_target(const EvolutionKernel& kernel, const SpectralVector& x0,
                               const SpectralVector& y0, const SpectralVector& x_target,
                               const Trajectory* f_traj = nullptr);

/// u(t) = B* S*(T, t) (a I + Gramian)^{-1} p_hat at a single grid node.
SpectralVector control_law(const EvolutionKernel& kernel, const OperatorMatrix& B,
                           const Gramian& gramian, double a, const SpectralVector& p_hat, double t);

/// Full control trajectory; factors the resolvent once.
Trajectory control_trajectory(const EvolutionKernel& kernel, const OperatorMatrix& B,
                              const Gramian& gramian, double a, const SpectralVector& p_hat);

/// ||a (a I + Gramian)^{-1} p||: the exact terminal miss of the linear problem.
double linear_terminal_error(const Gramian& gramian, double a, const SpectralVector& p);

struct DecayTable {
  struct Row {
    double a;
    int probe_id;
    double norm_value;
  };
  std::vector<Row> rows;
  std::vector<int> nondecay_probe_ids;  // probes whose values fail to decay
  double lambda_min = 0.0;
};

// Tabulates ||a (a I + Gramian)^{-1} v|| along a decreasing a-list for each probe.
// A probe is flagged when the final value shows no material decrease from the
// first (covers both growth and the constant values of a singular Gramian).
DecayTable h0_diagnostic(const Gramian& gramian, const std::vector<double>& a_list,
                         const std::vector<SpectralVector>& probes);

}  // namespace evoctrl
