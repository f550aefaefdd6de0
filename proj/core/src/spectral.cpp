#include "evoctrl/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace evoctrl {

namespace {

void require_finite(const Eigen::VectorXcd& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite coefficient");
  }
}

}  // namespace

ModeSet::ModeSet(std::vector<int> modes) : modes_(std::move(modes)) {
  if (modes_.empty()) {
    throw std::invalid_argument("ModeSet: at least one mode required");
  }
  int previous = 0;
  for (int n : modes_) {
    if (n < 1) {
      throw std::invalid_argument("ModeSet: mode indices must be >= 1, got " + std::to_string(n));
    }
    if (n <= previous) {
      throw std::invalid_argument("ModeSet: mode indices must be strictly increasing");
    }
    previous = n;
  }
}

ModeSet ModeSet::consecutive(int count) {
  if (count < 1) {
    throw std::invalid_argument("ModeSet: count must be >= 1");
  }
  std::vector<int> modes(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) modes[static_cast<std::size_t>(i)] = i + 1;
  return ModeSet(std::move(modes));
}

SpectralVector::SpectralVector(ModeSet mode_set, Eigen::VectorXcd coefficients)
    : modes(std::move(mode_set)), coeffs(std::move(coefficients)) {
  if (coeffs.size() != modes.dim()) {
    throw std::invalid_argument("SpectralVector: coefficient count " + std::to_string(coeffs.size()) +
                                " does not match mode count " + std::to_string(modes.dim()));
  }
  require_finite(coeffs, "SpectralVector");
}

SpectralVector SpectralVector::zero(const ModeSet& modes) {
  return SpectralVector(modes, Eigen::VectorXcd::Zero(modes.dim()));
}

SpectralVector SpectralVector::unit(const ModeSet& modes, int index) {
  if (index < 0 || index >= modes.dim()) {
    throw std::invalid_argument("SpectralVector::unit: index out of range");
  }
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(modes.dim());
  c(index) = 1.0;
  return SpectralVector(modes, std::move(c));
}

OperatorMatrix::OperatorMatrix(Eigen::MatrixXcd matrix) : entries(std::move(matrix)) {
  if (entries.rows() != entries.cols()) {
    throw std::invalid_argument("OperatorMatrix: matrix must be square");
  }
  if (!entries.allFinite()) {
    throw std::invalid_argument("OperatorMatrix: non-finite entry");
  }
}

OperatorMatrix OperatorMatrix::identity(int dim) {
  return OperatorMatrix(Eigen::MatrixXcd::Identity(dim, dim));
}

OperatorMatrix OperatorMatrix::zero(int dim) {
  return OperatorMatrix(Eigen::MatrixXcd::Zero(dim, dim));
}

OperatorMatrix OperatorMatrix::diagonal(const Eigen::VectorXcd& entries) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(entries.size(), entries.size());
  m.diagonal() = entries;
  return OperatorMatrix(std::move(m));
}

dcomplex inner_product(const SpectralVector& u, const SpectralVector& v) {
  if (u.modes != v.modes) {
    throw std::invalid_argument("inner_product: mode sets differ");
  }
  return u.coeffs.dot(v.coeffs);
}

double norm(const SpectralVector& u) { return u.coeffs.norm(); }

SpectralVector apply_A(const SpectralVector& x) {
  Eigen::VectorXcd out(x.coeffs.size());
  for (int i = 0; i < x.modes.dim(); ++i) {
    const double n = static_cast<double>(x.modes.mode(i));
    out(i) = -n * n * x.coeffs(i);
  }
  return SpectralVector(x.modes, std::move(out));
}

OperatorMatrix adjoint(const OperatorMatrix& m) { return OperatorMatrix(m.entries.adjoint()); }

double operator_norm(const OperatorMatrix& m) {
  if (m.dim() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m.entries);
  return svd.singularValues()(0);
}

}  // namespace evoctrl
