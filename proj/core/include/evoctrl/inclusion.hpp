#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "evoctrl/spectral.hpp"
#include "evoctrl/trajectory.hpp"

namespace evoctrl {

// Ball-valued right-hand side F(t, x) = { center(t, x) + v : ||v|| <= radius(t, x) }
// with a declared growth envelope ||center|| + radius <= offset + slope * ||x||.
struct SetValuedMap {
  std::function<SpectralVector(double, const SpectralVector&)> center;
  std::function<double(double, const SpectralVector&)> radius;
  double growth_offset = 0.0;  // c1
  double growth_slope = 0.0;   // c2
};

SetValuedMap zero_inclusion(const ModeSet& modes);
SetValuedMap constant_inclusion(const SpectralVector& center, double radius);
/// center = factor * x, unbounded growth with slope |factor|.
SetValuedMap linear_state_inclusion(const ModeSet& modes, double factor, double radius);
/// center = factor * x / (1 + ||x||): x-dependent but uniformly bounded by |factor|.
SetValuedMap saturated_state_inclusion(const ModeSet& modes, double factor, double radius);

/// Throws DiagnosticError if the growth envelope fails at the sampled point.
void check_growth_envelope(const SetValuedMap& map, double t, const SpectralVector& x);

struct SelectionStrategy {
  enum class Kind { center, min_norm_shift, random_extreme };
  Kind kind = Kind::center;
  std::uint64_t seed = 0;  // drives random_extreme only
};

/// Trajectory functional with a declared Lipschitz constant (sup-norm to state norm).
struct TrajectoryFunctional {
  std::function<SpectralVector(const Trajectory&)> map;
  double lipschitz = 0.0;
};

TrajectoryFunctional zero_functional(const ModeSet& modes);
TrajectoryFunctional constant_functional(const SpectralVector& value);
/// epsilon * x(t_star); t_star must be a grid node when evaluated.
TrajectoryFunctional point_evaluation_functional(double epsilon, double t_star);
/// epsilon * mean of the trajectory over all grid nodes.
TrajectoryFunctional mean_functional(double epsilon);

/// Nonlocal initial constraint: x(0) + g(x) = x0, x'(0) + h(x) = y0.
struct NonlocalSpec {
  TrajectoryFunctional g;
  TrajectoryFunctional h;
};

struct Impulse {
  double time = 0.0;
  std::function<SpectralVector(const SpectralVector&)> position_jump;
  std::function<SpectralVector(const SpectralVector&)> velocity_jump;
  double position_bound = 0.0;  // declared sup of ||I(x)||, checked on sampled states
  double velocity_bound = 0.0;
};

std::function<SpectralVector(const SpectralVector&)> constant_jump(const SpectralVector& value);
std::function<SpectralVector(const SpectralVector&)> scaled_jump(double factor);

struct ImpulseSpec {
  std::vector<Impulse> impulses;
};

}  // namespace evoctrl
