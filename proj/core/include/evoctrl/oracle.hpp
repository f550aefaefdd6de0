#pragma once

#include <utility>

#include "evoctrl/damping.hpp"
#include "evoctrl/inclusion.hpp"
#include "evoctrl/spectral.hpp"
#include "evoctrl/trajectory.hpp"

namespace evoctrl {
namespace oracle {

struct DenseTrajectory {
  Trajectory position;
  Trajectory velocity;
};

// Brute-force reference integrator: first-order form (pos' = vel,
// vel' = A(t) pos + forcing) stepped at 4x the grid resolution with RK4.
// Forcing samples are interpolated by sliding cubics. Impulse resets are applied
// when a node carrying one is crossed; the recorded node value is the pre-impulse
// state. Deliberately a different discretization from the kernel tables, so
// agreement between the two is evidence rather than tautology.
DenseTrajectory dense_integrate(const ModeSet& modes, const DampingSpec& damping,
                                const TimeGrid& grid, const SpectralVector& x0,
                                const SpectralVector& y0, const Trajectory* forcing = nullptr,
                                const ImpulseSpec* impulses = nullptr);

/// Undamped kernels in closed form: (sin(n (t-s)) / n, cos(n (t-s))).
std::pair<dcomplex, dcomplex> closed_form_kernel(int n, double t, double s);

/// Diagonal of the controllability Gramian for B = I without damping:
/// entry_n = T / (2 n^2) - sin(2 n T) / (4 n^3), evaluated analytically.
Eigen::VectorXd quadrature_gramian_reference(const ModeSet& modes, double horizon);

}  // namespace oracle
}  // namespace evoctrl
