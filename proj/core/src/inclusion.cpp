#include "evoctrl/inclusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "evoctrl/errors.hpp"

namespace evoctrl {

SetValuedMap zero_inclusion(const ModeSet& modes) {
  SetValuedMap map;
  map.center = [modes](double, const SpectralVector&) { return SpectralVector::zero(modes); };
  map.radius = [](double, const SpectralVector&) { return 0.0; };
  return map;
}

SetValuedMap constant_inclusion(const SpectralVector& center, double radius) {
  if (radius < 0.0) throw std::invalid_argument("constant_inclusion: radius must be >= 0");
  SetValuedMap map;
  map.center = [center](double, const SpectralVector&) { return center; };
  map.radius = [radius](double, const SpectralVector&) { return radius; };
  map.growth_offset = norm(center) + radius;
  map.growth_slope = 0.0;
  return map;
}

SetValuedMap linear_state_inclusion(const ModeSet& modes, double factor, double radius) {
  if (radius < 0.0) throw std::invalid_argument("linear_state_inclusion: radius must be >= 0");
  SetValuedMap map;
  map.center = [modes, factor](double, const SpectralVector& x) {
    return SpectralVector(modes, factor * x.coeffs);
  };
  map.radius = [radius](double, const SpectralVector&) { return radius; };
  map.growth_offset = radius;
  map.growth_slope = std::abs(factor);
  return map;
}

SetValuedMap saturated_state_inclusion(const ModeSet& modes, double factor, double radius) {
  if (radius < 0.0) throw std::invalid_argument("saturated_state_inclusion: radius must be >= 0");
  SetValuedMap map;
  map.center = [modes, factor](double, const SpectralVector& x) {
    return SpectralVector(modes, factor / (1.0 + x.coeffs.norm()) * x.coeffs);
  };
  map.radius = [radius](double, const SpectralVector&) { return radius; };
  map.growth_offset = std::abs(factor) + radius;
  map.growth_slope = 0.0;
  return map;
}

void check_growth_envelope(const SetValuedMap& map, double t, const SpectralVector& x) {
  const double lhs = norm(map.center(t, x)) + map.radius(t, x);
  const double budget = map.growth_offset + map.growth_slope * norm(x);
  if (lhs > budget + 1e-9 * (1.0 + budget)) {
    throw DiagnosticError("set-valued map violates its growth envelope at t = " + std::to_string(t) +
                          ": ||center|| + radius = " + std::to_string(lhs) + " > " +
                          std::to_string(budget));
  }
}

TrajectoryFunctional zero_functional(const ModeSet& modes) {
  return TrajectoryFunctional{[modes](const Trajectory&) { return SpectralVector::zero(modes); }, 0.0};
}

TrajectoryFunctional constant_functional(const SpectralVector& value) {
  return TrajectoryFunctional{[value](const Trajectory&) { return value; }, 0.0};
}

TrajectoryFunctional point_evaluation_functional(double epsilon, double t_star) {
  auto map = [epsilon, t_star](const Trajectory& x) {
    const int j = x.grid.index_of(t_star);
    return SpectralVector(x.modes, epsilon * x.samples.col(j));
  };
  return TrajectoryFunctional{std::move(map), std::abs(epsilon)};
}

TrajectoryFunctional mean_functional(double epsilon) {
  auto map = [epsilon](const Trajectory& x) {
    return SpectralVector(x.modes, epsilon * x.samples.rowwise().mean());
  };
  return TrajectoryFunctional{std::move(map), std::abs(epsilon)};
}

std::function<SpectralVector(const SpectralVector&)> constant_jump(const SpectralVector& value) {
  return [value](const SpectralVector&) { return value; };
}

std::function<SpectralVector(const SpectralVector&)> scaled_jump(double factor) {
  return [factor](const SpectralVector& x) { return SpectralVector(x.modes, factor * x.coeffs); };
}

}  // namespace evoctrl
