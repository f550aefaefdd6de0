#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "evoctrl/control.hpp"
#include "evoctrl/oracle.hpp"
#include "helpers.hpp"

using namespace evoctrl;
using testutil::kPi;

namespace {

Gramian diagonal_gramian(const Eigen::VectorXd& lambdas) {
  Eigen::VectorXcd entries = lambdas.cast<dcomplex>();
  Gramian gramian{OperatorMatrix::diagonal(entries), lambdas, lambdas.minCoeff(), 0, 0.0};
  std::sort(gramian.eigenvalues.begin(), gramian.eigenvalues.end());
  gramian.lambda_min = gramian.eigenvalues(0);
  return gramian;
}

}  // namespace

TEST_CASE("assembled gramian matches the analytic diagonal at T = pi") {
  const ModeSet modes = ModeSet::consecutive(8);
  const TimeGrid grid(kPi, 512);
  const EvolutionKernel kernel = build_kernel(modes, zero_damping(), grid);
  const Gramian gramian = assemble_gramian(kernel, OperatorMatrix::identity(8));

  const Eigen::VectorXd reference = oracle::quadrature_gramian_reference(modes, kPi);
  for (int i = 0; i < 8; ++i) {
    const dcomplex entry = gramian.matrix.entries(i, i);
    CHECK(std::abs(entry.imag()) < 1e-14);
    CHECK(std::abs(entry.real() - reference(i)) / reference(i) < 1e-6);
  }
  CHECK(std::abs(gramian.matrix.entries(0, 0).real() - kPi / 2.0) < 1e-8);
  CHECK(gramian.hermiticity_residual < 1e-12);
  CHECK(gramian.lambda_min > 0.0);
  CHECK(gramian.eigenvalues(0) >= -1e-10);
}

TEST_CASE("assembled gramian tracks the analytic formula away from the resonant horizon") {
  const ModeSet modes = ModeSet::consecutive(6);
  const TimeGrid grid(2.0, 1024);
  const EvolutionKernel kernel = build_kernel(modes, zero_damping(), grid);
  const Gramian gramian = assemble_gramian(kernel, OperatorMatrix::identity(6));
  const Eigen::VectorXd reference = oracle::quadrature_gramian_reference(modes, 2.0);
  for (int i = 0; i < 6; ++i) {
    CHECK(std::abs(gramian.matrix.entries(i, i).real() - reference(i)) / reference(i) < 1e-5);
  }
}

TEST_CASE("zero input operator yields the zero gramian") {
  const ModeSet modes = ModeSet::consecutive(4);
  const TimeGrid grid(kPi, 128);
  const EvolutionKernel kernel = build_kernel(modes, zero_damping(), grid);
  const Gramian gramian = assemble_gramian(kernel, OperatorMatrix::zero(4));
  CHECK(gramian.matrix.entries.norm() == 0.0);
  CHECK(std::abs(gramian.lambda_min) < 1e-14);
}

TEST_CASE("resolvent solves and limits") {
  const ModeSet modes = ModeSet::consecutive(3);
  std::mt19937_64 rng(31);

  SUBCASE("zero gramian divides by a") {
    const Gramian zero = diagonal_gramian(Eigen::VectorXd::Zero(3));
    const SpectralVector v = testutil::random_vector(modes, rng);
    const SpectralVector w = resolvent_apply(zero, 0.25, v);
    CHECK((w.coeffs - v.coeffs / 0.25).norm() < 1e-14 * v.coeffs.norm());
  }

  SUBCASE("diagonal gramian divides componentwise") {
    Eigen::VectorXd lambdas(3);
    lambdas << 0.5, 2.0, 7.0;
    const Gramian gramian = diagonal_gramian(lambdas);
    const SpectralVector v = testutil::random_vector(modes, rng);
    const SpectralVector w = resolvent_apply(gramian, 0.1, v);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(w.coeffs(i) - v.coeffs(i) / (0.1 + lambdas(i))) < 1e-13);
    }
  }

  SUBCASE("large a recovers the identity") {
    Eigen::VectorXd lambdas(3);
    lambdas << 1.0, 3.0, 0.2;
    const Gramian gramian = diagonal_gramian(lambdas);
    const SpectralVector v = testutil::random_vector(modes, rng);
    const double a = 1e12;
    Eigen::VectorXcd scaled = a * resolvent_apply(gramian, a, v).coeffs;
    CHECK((scaled - v.coeffs).norm() < 1e-10 * v.coeffs.norm());
  }

  SUBCASE("rejects nonpositive a") {
    const Gramian zero = diagonal_gramian(Eigen::VectorXd::Zero(3));
    const SpectralVector v = testutil::random_vector(modes, rng);
    CHECK_THROWS_AS(resolvent_apply(zero, 0.0, v), std::invalid_argument);
    CHECK_THROWS_AS(resolvent_apply(zero, -1.0, v), std::invalid_argument);
  }
}

TEST_CASE("resolvent identity and contraction on random hermitian PSD matrices") {
  const ModeSet modes = ModeSet::consecutive(6);
  std::mt19937_64 rng(37);
  for (int rep = 0; rep < 10; ++rep) {
    const OperatorMatrix raw = testutil::random_matrix(6, rng);
    Eigen::MatrixXcd psd = raw.entries * raw.entries.adjoint();
    Gramian gramian{OperatorMatrix(psd), {}, 0.0, 0, 0.0};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(psd, Eigen::EigenvaluesOnly);
    gramian.eigenvalues = eig.eigenvalues();
    gramian.lambda_min = gramian.eigenvalues(0);

    for (double a : {1.0, 1e-3, 1e-6}) {
      const SpectralVector v = testutil::random_vector(modes, rng);
      const SpectralVector w = resolvent_apply(gramian, a, v);
      Eigen::MatrixXcd shifted = psd;
      shifted.diagonal().array() += a;
      CHECK((shifted * w.coeffs - v.coeffs).norm() <= 1e-10 * v.coeffs.norm());
      CHECK(a * w.coeffs.norm() <= v.coeffs.norm() * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("residual target") {
  const ModeSet modes = ModeSet::consecutive(4);
  const TimeGrid grid(kPi, 256);
  const EvolutionKernel kernel = build_kernel(modes, zero_damping(), grid);
  std::mt19937_64 rng(41);

  SUBCASE("zero data passes the target through") {
    const SpectralVector target = testutil::random_vector(modes, rng);
    const SpectralVector p = residual_target(kernel, SpectralVector::zero(modes),
                                             SpectralVector::zero(modes), target);
    CHECK((p.coeffs - target.coeffs).norm() == 0.0);
  }

  SUBCASE("the free endpoint is its own target") {
    const SpectralVector x0 = testutil::random_vector(modes, rng);
    const SpectralVector y0 = testutil::random_vector(modes, rng);
    Eigen::VectorXcd free_end(modes.dim());
    for (int i = 0; i < modes.dim(); ++i) {
      free_end(i) = kernel.cosine(i, grid.steps(), 0) * x0.coeffs(i) +
                    kernel.sine(i, grid.steps(), 0) * y0.coeffs(i);
    }
    const SpectralVector p = residual_target(kernel, x0, y0, SpectralVector(modes, free_end));
    CHECK(p.coeffs.norm() == 0.0);
  }

  SUBCASE("pinned undamped value at T = pi") {
    const SpectralVector p = residual_target(kernel, SpectralVector::unit(modes, 0),
                                             SpectralVector::zero(modes),
                                             SpectralVector::zero(modes));
    CHECK(std::abs(p.coeffs(0) - dcomplex(1.0)) < 1e-8);  // -cos(pi) = 1
  }

  SUBCASE("forcing enters through the kernel-weighted quadrature") {
    Trajectory f = Trajectory::zero(modes, grid);
    f.samples.row(0).setConstant(dcomplex(1.0, 0.0));
    const SpectralVector p = residual_target(kernel, SpectralVector::zero(modes),
                                             SpectralVector::zero(modes),
                                             SpectralVector::zero(modes), &f);
    // -integral of sin(pi - s) ds over [0, pi] = -2.
    CHECK(std::abs(p.coeffs(0) - dcomplex(-2.0)) < 1e-4);
    CHECK(p.coeffs(1) == dcomplex(0.0));  // unforced mode stays untouched
  }
}

TEST_CASE("control law structure") {
  const ModeSet modes = ModeSet::consecutive(1);
  const TimeGrid grid(kPi, 256);
  const EvolutionKernel kernel = build_kernel(modes, zero_damping(), grid);
  const OperatorMatrix B = OperatorMatrix::identity(1);
  const Gramian gramian = assemble_gramian(kernel, B);
  const double a = 0.2;

  SUBCASE("zero residual gives a zero control") {
    const SpectralVector u = control_law(kernel, B, gramian, a, SpectralVector::zero(modes),
                                         grid.node(100));
    CHECK(u.coeffs.norm() == 0.0);
  }

  SUBCASE("the control vanishes at the horizon") {
    const SpectralVector u = control_law(kernel, B, gramian, a, SpectralVector::unit(modes, 0),
                                         grid.horizon());
    CHECK(u.coeffs.norm() == 0.0);
  }

  SUBCASE("single-mode closed form") {
    const double lambda = gramian.matrix.entries(0, 0).real();
    for (int j : {0, 50, 137, 200}) {
      const double t = grid.node(j);
      const SpectralVector u = control_law(kernel, B, gramian, a, SpectralVector::unit(modes, 0), t);
      const double expected = std::sin(kPi - t) / (a + lambda);
      CHECK(std::abs(u.coeffs(0) - dcomplex(expected)) < 1e-8);
    }
  }

  SUBCASE("trajectory evaluation matches the pointwise law") {
    const SpectralVector p_hat = SpectralVector::unit(modes, 0);
    const Trajectory u = control_trajectory(kernel, B, gramian, a, p_hat);
    for (int j : {0, 17, 255}) {
      const SpectralVector point = control_law(kernel, B, gramian, a, p_hat, grid.node(j));
      CHECK((u.samples.col(j) - point.coeffs).norm() < 1e-14);
    }
  }
}

TEST_CASE("linear terminal error formulas") {
  const ModeSet modes = ModeSet::consecutive(3);
  std::mt19937_64 rng(43);
  Eigen::VectorXd lambdas(3);
  lambdas << 0.3, 1.0, 4.0;
  const Gramian gramian = diagonal_gramian(lambdas);

  CHECK(linear_terminal_error(gramian, 0.5, SpectralVector::zero(modes)) == 0.0);

  for (int rep = 0; rep < 10; ++rep) {
    const SpectralVector p = testutil::random_vector(modes, rng);
    const double a = 0.1 * (rep + 1);
    double expected_sq = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double factor = a / (a + lambdas(i));
      expected_sq += factor * factor * std::norm(p.coeffs(i));
    }
    const double measured = linear_terminal_error(gramian, a, p);
    CHECK(measured == doctest::Approx(std::sqrt(expected_sq)).epsilon(1e-11));
    CHECK(measured <= a / (a + gramian.lambda_min) * p.coeffs.norm() * (1.0 + 1e-12));
  }

  // Monotone decrease along a decreasing a-grid for a definite gramian.
  const SpectralVector p = testutil::random_vector(modes, rng);
  double previous = std::numeric_limits<double>::infinity();
  for (double a = 1.0; a > 1e-8; a /= 10.0) {
    const double error = linear_terminal_error(gramian, a, p);
    CHECK(error < previous);
    previous = error;
  }
}

TEST_CASE("resolvent decay diagnostic") {
  const ModeSet modes = ModeSet::consecutive(3);
  const std::vector<double> a_list = {1.0, 1e-1, 1e-2, 1e-3, 1e-4};
  Eigen::VectorXd lambdas(3);
  lambdas << 0.5, 1.5, 3.0;
  const Gramian definite = diagonal_gramian(lambdas);
  const Gramian singular = diagonal_gramian(Eigen::VectorXd::Zero(3));

  std::vector<SpectralVector> probes = {SpectralVector::unit(modes, 0),
                                        testutil::smooth_profile(modes),
                                        SpectralVector::zero(modes)};

  SUBCASE("definite gramian decays and raises no flags") {
    const DecayTable table = h0_diagnostic(definite, a_list, probes);
    CHECK(table.rows.size() == a_list.size() * probes.size());
    CHECK(table.lambda_min == doctest::Approx(0.5));
    // Non-trivial probes decay monotonically toward zero.
    CHECK(table.rows[a_list.size() - 1].norm_value < 1e-3 * table.rows[0].norm_value);
    CHECK(table.nondecay_probe_ids.empty());
  }

  SUBCASE("singular gramian keeps the probe norm and is flagged") {
    const DecayTable table = h0_diagnostic(singular, a_list, probes);
    for (std::size_t row = 0; row < a_list.size(); ++row) {
      CHECK(table.rows[row].norm_value == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(table.nondecay_probe_ids == std::vector<int>{0, 1});  // zero probe stays unflagged
  }

  SUBCASE("zero probe rows are identically zero") {
    const DecayTable table = h0_diagnostic(definite, a_list, probes);
    for (const auto& row : table.rows) {
      if (row.probe_id == 2) CHECK(row.norm_value == 0.0);
    }
  }

  SUBCASE("a-list must be strictly decreasing and positive") {
    CHECK_THROWS_AS(h0_diagnostic(definite, {1.0, 1.0}, probes), std::invalid_argument);
    CHECK_THROWS_AS(h0_diagnostic(definite, {1.0, -0.5}, probes), std::invalid_argument);
    CHECK_THROWS_AS(h0_diagnostic(definite, {}, probes), std::invalid_argument);
  }
}
