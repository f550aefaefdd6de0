#pragma once

#include <functional>
#include <vector>

namespace evoctrl {

/// Time-dependent damping amplitude b(t) together with its sup bound over the horizon.
struct DampingSpec {
  std::function<double(double)> b;
  double beta = 0.0;  // sup of |b| over [0, T]

  bool is_zero() const { return beta == 0.0; }
};

DampingSpec zero_damping();

/// b(t) = amplitude * cos(t); sup is |amplitude| (attained at t = 0).
DampingSpec cosine_damping(double amplitude);

/// b(t) = amplitude * sin(t); sup depends on whether the horizon reaches pi/2.
DampingSpec sine_damping(double amplitude, double horizon);

// b(t) = values[i] on [times[i], times[i+1]), with times[0] == 0. The kernel and
// oracle integrators sample coefficients strictly inside each step, so pieces are
// integrated one-sidedly provided the breakpoints sit on grid nodes.
DampingSpec piecewise_constant_damping(std::vector<double> times, std::vector<double> values);

}  // namespace evoctrl
