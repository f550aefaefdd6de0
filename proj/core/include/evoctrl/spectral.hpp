#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace evoctrl {

using dcomplex = std::complex<double>;

/// Ordered set of positive mode indices spanning the truncated state space.
class ModeSet {
 public:
  explicit ModeSet(std::vector<int> modes);

  /// Modes 1..count.
  static ModeSet consecutive(int count);

  const std::vector<int>& values() const { return modes_; }
  int dim() const { return static_cast<int>(modes_.size()); }
  int mode(int index) const { return modes_[static_cast<std::size_t>(index)]; }

  bool operator==(const ModeSet& other) const { return modes_ == other.modes_; }
  bool operator!=(const ModeSet& other) const { return !(*this == other); }

 private:
  std::vector<int> modes_;
};

/// State vector as complex coefficients over a ModeSet.
struct SpectralVector {
  SpectralVector(ModeSet mode_set, Eigen::VectorXcd coefficients);

  static SpectralVector zero(const ModeSet& modes);
  /// Basis vector with a 1 at position `index` (0-based position, not mode number).
  static SpectralVector unit(const ModeSet& modes, int index);

  ModeSet modes;
  Eigen::VectorXcd coeffs;
};

/// Dense operator in the mode basis.
struct OperatorMatrix {
  explicit OperatorMatrix(Eigen::MatrixXcd matrix);

  static OperatorMatrix identity(int dim);
  static OperatorMatrix zero(int dim);
  static OperatorMatrix diagonal(const Eigen::VectorXcd& entries);

  int dim() const { return static_cast<int>(entries.rows()); }

  Eigen::MatrixXcd entries;
};

/// l2 pairing, conjugate-linear in the first argument.
dcomplex inner_product(const SpectralVector& u, const SpectralVector& v);

double norm(const SpectralVector& u);

/// Generator of the unperturbed dynamics: coefficient n scales by -n^2.
SpectralVector apply_A(const SpectralVector& x);

/// Conjugate transpose.
OperatorMatrix adjoint(const OperatorMatrix& m);

/// Spectral norm (largest singular value).
double operator_norm(const OperatorMatrix& m);

}  // namespace evoctrl
