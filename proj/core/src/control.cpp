#include "evoctrl/control.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "evoctrl/errors.hpp"

namespace evoctrl {

namespace {

void require_positive(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::invalid_argument("regularization parameter must be positive and finite");
  }
}

Eigen::VectorXcd resolvent_solve(const Gramian& gramian, double a, const Eigen::VectorXcd& v) {
  require_positive(a);
  if (v.size() != gramian.matrix.dim()) {
    throw std::invalid_argument("resolvent: dimension mismatch");
  }
  Eigen::MatrixXcd shifted = gramian.matrix.entries;
  shifted.diagonal().array() += a;
  const Eigen::LDLT<Eigen::MatrixXcd> factor(shifted);
  Eigen::VectorXcd w = factor.solve(v);
  w += factor.solve(v - shifted * w);  // one refinement pass
  return w;
}

}  // namespace

Gramian assemble_gramian(const EvolutionKernel& kernel, const OperatorMatrix& B) {
  const int dim = kernel.modes().dim();
  if (B.dim() != dim) {
    throw std::invalid_argument("assemble_gramian: input operator dimension " +
                                std::to_string(B.dim()) + " does not match mode count " +
                                std::to_string(dim));
  }
  const int steps = kernel.grid().steps();
  const double h = kernel.grid().step();
  const Eigen::MatrixXcd W = B.entries * B.entries.adjoint();

  Eigen::MatrixXcd upsilon = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::VectorXcd d(dim);
  for (int k = 0; k <= steps; ++k) {
    for (int i = 0; i < dim; ++i) d(i) = kernel.sine(i, steps, k);
    const double weight = (k == 0 || k == steps) ? h / 2.0 : h;
    upsilon.noalias() += weight * W.cwiseProduct(d * d.adjoint());
  }
  if (!upsilon.allFinite()) {
    throw DiagnosticError("assemble_gramian: non-finite quadrature result");
  }

  Gramian gramian{OperatorMatrix(upsilon), {}, 0.0, steps, 0.0};
  const double scale = upsilon.norm();
  gramian.hermiticity_residual =
      scale > 0.0 ? (upsilon - upsilon.adjoint()).norm() / scale : 0.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(upsilon, Eigen::EigenvaluesOnly);
  gramian.eigenvalues = eig.eigenvalues();
  gramian.lambda_min = gramian.eigenvalues(0);
  return gramian;
}

SpectralVector resolvent_apply(const Gramian& gramian, double a, const SpectralVector& v) {
  return SpectralVector(v.modes, resolvent_solve(gramian, a, v.coeffs));
}

SpectralVector residual_target(const EvolutionKernel& kernel, const SpectralVector& x0,
                               const SpectralVector& y0, const SpectralVector& x_target,
                               const Trajectory* f_traj) {
  const ModeSet& modes = kernel.modes();
  if (x0.modes != modes || y0.modes != modes || x_target.modes != modes) {
    throw std::invalid_argument("residual_target: mode set mismatch");
  }
  const int dim = modes.dim();
  const int steps = kernel.grid().steps();
  const double h = kernel.grid().step();

  Eigen::VectorXcd p = x_target.coeffs;
  for (int i = 0; i < dim; ++i) {
    p(i) -= kernel.cosine(i, steps, 0) * x0.coeffs(i) + kernel.sine(i, steps, 0) * y0.coeffs(i);
  }
  if (f_traj != nullptr) {
    if (f_traj->modes != modes || f_traj->grid != kernel.grid()) {
      throw std::invalid_argument("residual_target: forcing must be sampled on the kernel grid");
    }
    for (int k = 0; k <= steps; ++k) {
      const double weight = (k == 0 || k == steps) ? h / 2.0 : h;
      for (int i = 0; i < dim; ++i) {
        p(i) -= weight * kernel.sine(i, steps, k) * f_traj->samples(i, k);
      }
    }
  }
  return SpectralVector(modes, std::move(p));
}

SpectralVector control_law(const EvolutionKernel& kernel, const OperatorMatrix& B,
                           const Gramian& gramian, double a, const SpectralVector& p_hat,
                           double t) {
  const int node = kernel.grid().index_of(t);
  const int dim = kernel.modes().dim();
  if (B.dim() != dim || p_hat.modes != kernel.modes()) {
    throw std::invalid_argument("control_law: dimension mismatch");
  }
  const Eigen::VectorXcd w = resolvent_solve(gramian, a, p_hat.coeffs);
  Eigen::VectorXcd weighted(dim);
  const int steps = kernel.grid().steps();
  for (int i = 0; i < dim; ++i) weighted(i) = std::conj(kernel.sine(i, steps, node)) * w(i);
  return SpectralVector(kernel.modes(), B.entries.adjoint() * weighted);
}

Trajectory control_trajectory(const EvolutionKernel& kernel, const OperatorMatrix& B,
                              const Gramian& gramian, double a, const SpectralVector& p_hat) {
  const int dim = kernel.modes().dim();
  if (B.dim() != dim || p_hat.modes != kernel.modes()) {
    throw std::invalid_argument("control_trajectory: dimension mismatch");
  }
  const int steps = kernel.grid().steps();
  const Eigen::VectorXcd w = resolvent_solve(gramian, a, p_hat.coeffs);
  const Eigen::MatrixXcd b_adjoint = B.entries.adjoint();
  Eigen::MatrixXcd u(dim, steps + 1);
  Eigen::VectorXcd weighted(dim);
  for (int j = 0; j <= steps; ++j) {
    for (int i = 0; i < dim; ++i) weighted(i) = std::conj(kernel.sine(i, steps, j)) * w(i);
    u.col(j) = b_adjoint * weighted;
  }
  return Trajectory(kernel.modes(), kernel.grid(), std::move(u));
}

double linear_terminal_error(const Gramian& gramian, double a, const SpectralVector& p) {
  return a * resolvent_solve(gramian, a, p.coeffs).norm();
}

DecayTable h0_diagnostic(const Gramian& gramian, const std::vector<double>& a_list,
                         const std::vector<SpectralVector>& probes) {
  if (a_list.empty()) throw std::invalid_argument("h0_diagnostic: empty a-list");
  for (std::size_t i = 0; i < a_list.size(); ++i) {
    require_positive(a_list[i]);
    if (i > 0 && !(a_list[i] < a_list[i - 1])) {
      throw std::invalid_argument("h0_diagnostic: a-list must be strictly decreasing");
    }
  }

  DecayTable table;
  table.lambda_min = gramian.lambda_min;
  for (int probe_id = 0; probe_id < static_cast<int>(probes.size()); ++probe_id) {
    double first = 0.0, last = 0.0;
    for (std::size_t ai = 0; ai < a_list.size(); ++ai) {
      const double value = linear_terminal_error(gramian, a_list[ai], probes[static_cast<std::size_t>(probe_id)]);
      table.rows.push_back({a_list[ai], probe_id, value});
      if (ai == 0) first = value;
      last = value;
    }
    if (last >= first * (1.0 - 1e-9) && first > 0.0) {
      table.nondecay_probe_ids.push_back(probe_id);
    }
  }
  return table;
}

}  // namespace evoctrl
