#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace evoctrl {

/// Uniform grid t_j = j*T/M on [0, T]. Endpoints are exact.
class TimeGrid {
 public:
  TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw std::invalid_argument("TimeGrid: horizon must be positive and finite");
    }
    if (steps < 2) {
      throw std::invalid_argument("TimeGrid: at least 2 steps required");
    }
  }

  double horizon() const { return horizon_; }
  int steps() const { return steps_; }
  double step() const { return horizon_ / steps_; }

  double node(int j) const { return horizon_ * (static_cast<double>(j) / steps_); }

  /// Maps a time to its grid index; rejects times that are not grid nodes.
  int index_of(double t) const {
    const long j = std::lround(t / horizon_ * steps_);
    const double tol = 1e-9 * std::max(1.0, horizon_);
    if (j < 0 || j > steps_ || std::abs(t - node(static_cast<int>(j))) > tol) {
      throw std::invalid_argument("TimeGrid: time " + std::to_string(t) + " is not a grid node");
    }
    return static_cast<int>(j);
  }

  bool operator==(const TimeGrid& other) const {
    return horizon_ == other.horizon_ && steps_ == other.steps_;
  }
  bool operator!=(const TimeGrid& other) const { return !(*this == other); }

 private:
  double horizon_;
  int steps_;
};

}  // namespace evoctrl
