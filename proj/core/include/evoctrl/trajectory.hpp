#pragma once

#include <stdexcept>
#include <utility>

#include "evoctrl/spectral.hpp"
#include "evoctrl/time_grid.hpp"

namespace evoctrl {

/// Grid-sampled curve in the truncated state space; column j holds the value at t_j.
struct Trajectory {
  Trajectory(ModeSet mode_set, TimeGrid time_grid, Eigen::MatrixXcd values)
      : modes(std::move(mode_set)), grid(time_grid), samples(std::move(values)) {
    if (samples.rows() != modes.dim() || samples.cols() != grid.steps() + 1) {
      throw std::invalid_argument("Trajectory: sample matrix must be dim x (steps+1)");
    }
  }

  static Trajectory zero(const ModeSet& modes, const TimeGrid& grid) {
    return Trajectory(modes, grid, Eigen::MatrixXcd::Zero(modes.dim(), grid.steps() + 1));
  }

  SpectralVector at(int j) const { return SpectralVector(modes, samples.col(j)); }

  ModeSet modes;
  TimeGrid grid;
  Eigen::MatrixXcd samples;
};

}  // namespace evoctrl
