#pragma once

#include <cmath>
#include <random>

#include "evoctrl/solve.hpp"
#include "evoctrl/spectral.hpp"

namespace testutil {

inline constexpr double kPi = 3.14159265358979323846;

inline evoctrl::SpectralVector random_vector(const evoctrl::ModeSet& modes, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXcd coeffs(modes.dim());
  for (int i = 0; i < modes.dim(); ++i) coeffs(i) = evoctrl::dcomplex(gauss(rng), gauss(rng));
  return evoctrl::SpectralVector(modes, std::move(coeffs));
}

inline evoctrl::OperatorMatrix random_matrix(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) m(r, c) = evoctrl::dcomplex(gauss(rng), gauss(rng));
  }
  return evoctrl::OperatorMatrix(std::move(m));
}

/// Smooth displacement profile 1/n^2 over the mode set.
inline evoctrl::SpectralVector smooth_profile(const evoctrl::ModeSet& modes, double scale = 1.0) {
  Eigen::VectorXcd coeffs(modes.dim());
  for (int i = 0; i < modes.dim(); ++i) {
    const double n = static_cast<double>(modes.mode(i));
    coeffs(i) = scale / (n * n);
  }
  return evoctrl::SpectralVector(modes, std::move(coeffs));
}

inline evoctrl::ControlProblem linear_problem(const evoctrl::ModeSet& modes,
                                              const evoctrl::TimeGrid& grid,
                                              const evoctrl::DampingSpec& damping, double a) {
  return evoctrl::ControlProblem{modes,
                                 grid,
                                 damping,
                                 evoctrl::OperatorMatrix::identity(modes.dim()),
                                 evoctrl::zero_inclusion(modes),
                                 smooth_profile(modes),
                                 evoctrl::SpectralVector::zero(modes),
                                 evoctrl::SpectralVector::zero(modes),
                                 a,
                                 evoctrl::SolveOptions{}};
}

}  // namespace testutil
