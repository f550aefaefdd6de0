#include "evoctrl/damping.hpp"

#include <cmath>
#include <stdexcept>

namespace evoctrl {

DampingSpec zero_damping() {
  return DampingSpec{[](double) { return 0.0; }, 0.0};
}

DampingSpec cosine_damping(double amplitude) {
  if (!std::isfinite(amplitude)) throw std::invalid_argument("cosine_damping: amplitude must be finite");
  return DampingSpec{[amplitude](double t) { return amplitude * std::cos(t); }, std::abs(amplitude)};
}

DampingSpec sine_damping(double amplitude, double horizon) {
  if (!std::isfinite(amplitude)) throw std::invalid_argument("sine_damping: amplitude must be finite");
  if (!(horizon > 0.0)) throw std::invalid_argument("sine_damping: horizon must be positive");
  const double peak = horizon >= M_PI / 2.0 ? 1.0 : std::sin(horizon);
  return DampingSpec{[amplitude](double t) { return amplitude * std::sin(t); }, std::abs(amplitude) * peak};
}

DampingSpec piecewise_constant_damping(std::vector<double> times, std::vector<double> values) {
  if (times.empty() || times.size() != values.size()) {
    throw std::invalid_argument("piecewise_constant_damping: times and values must be non-empty and equal-sized");
  }
  if (times.front() != 0.0) {
    throw std::invalid_argument("piecewise_constant_damping: first breakpoint must be 0");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw std::invalid_argument("piecewise_constant_damping: breakpoints must be strictly increasing");
    }
  }
  double beta = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("piecewise_constant_damping: non-finite value");
    beta = std::max(beta, std::abs(v));
  }
  auto lookup = [times = std::move(times), values = std::move(values)](double t) {
    std::size_t i = times.size();
    while (i > 0 && times[i - 1] > t) --i;
    return values[i == 0 ? 0 : i - 1];
  };
  return DampingSpec{std::move(lookup), beta};
}

}  // namespace evoctrl
