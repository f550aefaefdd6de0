#include "evoctrl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "evoctrl/errors.hpp"

namespace evoctrl {
namespace oracle {

namespace {

constexpr int kRefinement = 4;      // substeps per grid interval
constexpr double kBlowUp = 1e12;

// Sliding-cubic interpolation of grid samples: full-order Lagrange cubic on the
// four nodes nearest to t, one-sided at the ends.
class ForcingInterpolant {
 public:
  ForcingInterpolant(const Trajectory* forcing, const TimeGrid& grid)
      : forcing_(forcing), grid_(grid) {}

  Eigen::VectorXcd operator()(double t, int dim) const {
    if (forcing_ == nullptr) return Eigen::VectorXcd::Zero(dim);
    const int steps = grid_.steps();
    int base = static_cast<int>(std::floor(t / grid_.step()));
    base = std::clamp(base - 1, 0, std::max(0, steps - 3));
    const int count = std::min(4, steps + 1);
    double weights[4] = {0, 0, 0, 0};
    for (int i = 0; i < count; ++i) {
      double w = 1.0;
      for (int l = 0; l < count; ++l) {
        if (l == i) continue;
        w *= (t - grid_.node(base + l)) / (grid_.node(base + i) - grid_.node(base + l));
      }
      weights[i] = w;
    }
    Eigen::VectorXcd value = Eigen::VectorXcd::Zero(dim);
    for (int i = 0; i < count; ++i) value += weights[i] * forcing_->samples.col(base + i);
    return value;
  }

 private:
  const Trajectory* forcing_;
  TimeGrid grid_;
};

}  // namespace

DenseTrajectory dense_integrate(const ModeSet& modes, const DampingSpec& damping,
                                const TimeGrid& grid, const SpectralVector& x0,
                                const SpectralVector& y0, const Trajectory* forcing,
                                const ImpulseSpec* impulses) {
  const int dim = modes.dim();
  if (x0.modes != modes || y0.modes != modes) {
    throw std::invalid_argument("dense_integrate: initial data mode set mismatch");
  }
  if (forcing != nullptr && (forcing->modes != modes || forcing->grid != grid)) {
    throw std::invalid_argument("dense_integrate: forcing must be sampled on the same grid");
  }

  std::map<int, const Impulse*> impulse_at;
  if (impulses != nullptr) {
    for (const auto& impulse : impulses->impulses) {
      const int node = grid.index_of(impulse.time);
      if (node <= 0 || node >= grid.steps()) {
        throw std::invalid_argument("dense_integrate: impulse time " + std::to_string(impulse.time) +
                                    " must be strictly inside the horizon");
      }
      impulse_at[node] = &impulse;
    }
  }

  ForcingInterpolant force(forcing, grid);
  Eigen::VectorXcd multipliers(dim);  // -n^2 per mode
  for (int i = 0; i < dim; ++i) {
    const double n = static_cast<double>(modes.mode(i));
    multipliers(i) = dcomplex(-n * n, 0.0);
  }
  Eigen::VectorXd mode_values(dim);
  for (int i = 0; i < dim; ++i) mode_values(i) = static_cast<double>(modes.mode(i));

  auto rhs_vel = [&](double t, const Eigen::VectorXcd& pos) -> Eigen::VectorXcd {
    const double b = damping.b(t);
    Eigen::VectorXcd acc(dim);
    for (int i = 0; i < dim; ++i) {
      acc(i) = (multipliers(i) + dcomplex(0.0, mode_values(i) * b)) * pos(i);
    }
    return acc + force(t, dim);
  };

  const int steps = grid.steps();
  Eigen::MatrixXcd pos_out(dim, steps + 1), vel_out(dim, steps + 1);
  Eigen::VectorXcd pos = x0.coeffs, vel = y0.coeffs;
  pos_out.col(0) = pos;
  vel_out.col(0) = vel;

  // Endpoint stages are sampled just inside the substep so piecewise-constant
  // damping with jumps on grid nodes integrates one-sidedly.
  constexpr double kStageInset = 1e-9;
  const double hs = grid.step() / kRefinement;
  for (int j = 0; j < steps; ++j) {
    for (int sub = 0; sub < kRefinement; ++sub) {
      const double t = grid.node(j) + sub * hs;
      const Eigen::VectorXcd k1p = vel;
      const Eigen::VectorXcd k1v = rhs_vel(t + kStageInset * hs, pos);
      const Eigen::VectorXcd k2p = vel + 0.5 * hs * k1v;
      const Eigen::VectorXcd k2v = rhs_vel(t + 0.5 * hs, pos + 0.5 * hs * k1p);
      const Eigen::VectorXcd k3p = vel + 0.5 * hs * k2v;
      const Eigen::VectorXcd k3v = rhs_vel(t + 0.5 * hs, pos + 0.5 * hs * k2p);
      const Eigen::VectorXcd k4p = vel + hs * k3v;
      const Eigen::VectorXcd k4v = rhs_vel(t + (1.0 - kStageInset) * hs, pos + hs * k3p);
      pos += hs / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
      vel += hs / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    if (!pos.allFinite() || pos.cwiseAbs().maxCoeff() > kBlowUp) {
      throw DiagnosticError("dense_integrate: state blow-up near t = " + std::to_string(grid.node(j + 1)));
    }
    pos_out.col(j + 1) = pos;
    vel_out.col(j + 1) = vel;
    const auto hit = impulse_at.find(j + 1);
    if (hit != impulse_at.end()) {
      const SpectralVector pre(modes, pos);
      pos += hit->second->position_jump(pre).coeffs;
      vel += hit->second->velocity_jump(pre).coeffs;
    }
  }

  return DenseTrajectory{Trajectory(modes, grid, std::move(pos_out)),
                         Trajectory(modes, grid, std::move(vel_out))};
}

std::pair<dcomplex, dcomplex> closed_form_kernel(int n, double t, double s) {
  if (n < 1) throw std::invalid_argument("closed_form_kernel: mode index must be >= 1");
  const double tau = t - s;
  const double dn = static_cast<double>(n);
  return {dcomplex(std::sin(dn * tau) / dn, 0.0), dcomplex(std::cos(dn * tau), 0.0)};
}

Eigen::VectorXd quadrature_gramian_reference(const ModeSet& modes, double horizon) {
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("quadrature_gramian_reference: horizon must be positive");
  }
  Eigen::VectorXd diag(modes.dim());
  for (int i = 0; i < modes.dim(); ++i) {
    const double n = static_cast<double>(modes.mode(i));
    diag(i) = horizon / (2.0 * n * n) - std::sin(2.0 * n * horizon) / (4.0 * n * n * n);
  }
  return diag;
}

}  // namespace oracle
}  // namespace evoctrl
