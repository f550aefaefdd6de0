#include "evoctrl/evolution_kernel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "evoctrl/errors.hpp"

namespace evoctrl {

namespace {

// 2x2 complex fundamental matrix: top row holds kernel values (r, q), bottom row
// their time derivatives. Columns are the (1,0) and (0,1) initial-data solutions.
struct Mat2 {
  dcomplex a, b, c, d;
};

inline Mat2 identity2() { return Mat2{1.0, 0.0, 0.0, 1.0}; }

inline Mat2 mul(const Mat2& x, const Mat2& y) {
  return Mat2{x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
              x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

// Y' = [[0, 1], [coeff(t), 0]] Y, classical RK4 with stage coefficients
// c0 = coeff(t), cm = coeff(t + hs/2), c1 = coeff(t + hs).
inline void rk4_substep(Mat2& y, double hs, dcomplex c0, dcomplex cm, dcomplex c1) {
  const double h2 = hs / 2.0;
  const Mat2 k1{y.c, y.d, c0 * y.a, c0 * y.b};
  const Mat2 y2{y.a + h2 * k1.a, y.b + h2 * k1.b, y.c + h2 * k1.c, y.d + h2 * k1.d};
  const Mat2 k2{y2.c, y2.d, cm * y2.a, cm * y2.b};
  const Mat2 y3{y.a + h2 * k2.a, y.b + h2 * k2.b, y.c + h2 * k2.c, y.d + h2 * k2.d};
  const Mat2 k3{y3.c, y3.d, cm * y3.a, cm * y3.b};
  const Mat2 y4{y.a + hs * k3.a, y.b + hs * k3.b, y.c + hs * k3.c, y.d + hs * k3.d};
  const Mat2 k4{y4.c, y4.d, c1 * y4.a, c1 * y4.b};
  const double h6 = hs / 6.0;
  y.a += h6 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
  y.b += h6 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
  y.c += h6 * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c);
  y.d += h6 * (k1.d + 2.0 * k2.d + 2.0 * k3.d + k4.d);
}

inline dcomplex mode_coefficient(int n, double b_value) {
  return dcomplex(-static_cast<double>(n) * n, n * b_value);
}

int substep_count(int n, double h, double max_phase) {
  const double needed = n * h / max_phase;
  return std::max(1, static_cast<int>(std::ceil(needed)));
}

// Stage coefficients are sampled just inside the substep, so a coefficient jump
// sitting exactly on a substep boundary is integrated one-sidedly from both
// sides. For smooth damping the inward shift perturbs nothing measurable.
constexpr double kStageInset = 1e-9;

// Propagator of one grid interval [t0, t0 + h] with m RK4 substeps.
Mat2 interval_propagator(int n, const DampingSpec& damping, double t0, double h, int m) {
  Mat2 y = identity2();
  const double hs = h / m;
  for (int i = 0; i < m; ++i) {
    const double ts = t0 + i * hs;
    const dcomplex c0 = mode_coefficient(n, damping.b(ts + kStageInset * hs));
    const dcomplex cm = mode_coefficient(n, damping.b(ts + hs / 2.0));
    const dcomplex c1 = mode_coefficient(n, damping.b(ts + (1.0 - kStageInset) * hs));
    rk4_substep(y, hs, c0, cm, c1);
  }
  return y;
}

struct ModeBuildResult {
  double q_sup = 0.0;
  double r_sup = 0.0;
  double lipschitz = 0.0;
  double self_check = 0.0;
};

}  // namespace

EvolutionKernel build_kernel(const ModeSet& modes, const DampingSpec& damping, const TimeGrid& grid,
                             const KernelBuildOptions& options) {
  if (!damping.b) throw std::invalid_argument("build_kernel: damping function not set");
  if (damping.beta < 0.0 || !std::isfinite(damping.beta)) {
    throw std::invalid_argument("build_kernel: damping bound must be finite and nonnegative");
  }
  if (!(options.max_phase_per_substep > 0.0)) {
    throw std::invalid_argument("build_kernel: max_phase_per_substep must be positive");
  }

  EvolutionKernel kernel(modes, damping, grid);
  const int dim = modes.dim();
  const int steps = grid.steps();
  const double h = grid.step();
  const std::size_t tri_size =
      static_cast<std::size_t>(steps + 1) * (static_cast<std::size_t>(steps) + 2) / 2;

  kernel.has_derivatives_ = options.store_derivatives;
  kernel.tables_.resize(static_cast<std::size_t>(dim));
  kernel.substeps_.resize(static_cast<std::size_t>(dim));
  std::vector<ModeBuildResult> results(static_cast<std::size_t>(dim));

  auto build_mode = [&](int mi) {
    const int n = modes.mode(mi);
    const int m = substep_count(n, h, options.max_phase_per_substep);
    kernel.substeps_[static_cast<std::size_t>(mi)] = m;

    std::vector<Mat2> prop(static_cast<std::size_t>(steps));
    for (int j = 0; j < steps; ++j) {
      prop[static_cast<std::size_t>(j)] = interval_propagator(n, damping, grid.node(j), h, m);
    }

    auto& table = kernel.tables_[static_cast<std::size_t>(mi)];
    table.q.resize(tri_size);
    table.r.resize(tri_size);
    if (options.store_derivatives) {
      table.qd.resize(tri_size);
      table.rd.resize(tri_size);
    }

    ModeBuildResult res;
    res.r_sup = 1.0;  // diagonal
    const auto store = [&](int j, int k, const Mat2& y) {
      const std::size_t idx = kernel.tri(j, k);
      table.q[idx] = y.b;
      table.r[idx] = y.a;
      if (options.store_derivatives) {
        table.qd[idx] = y.d;
        table.rd[idx] = y.c;
      }
    };

    for (int k = 0; k <= steps; ++k) {
      Mat2 y = identity2();
      store(k, k, y);
      for (int j = k; j < steps; ++j) {
        const Mat2 prev = y;
        y = mul(prop[static_cast<std::size_t>(j)], y);
        if (std::abs(y.a) > options.instability_threshold ||
            std::abs(y.b) > options.instability_threshold) {
          throw DiagnosticError("build_kernel: integration diverged for mode " + std::to_string(n) +
                                " near t = " + std::to_string(grid.node(j + 1)));
        }
        store(j + 1, k, y);
        res.q_sup = std::max(res.q_sup, std::abs(y.b));
        res.r_sup = std::max(res.r_sup, std::abs(y.a));
        res.lipschitz = std::max(res.lipschitz, std::abs(y.b - prev.b) / h);
      }
    }

    if (options.self_check) {
      // Halved substeps over the longest interval of integration (source 0).
      Mat2 y = identity2();
      double worst = 0.0;
      for (int j = 0; j < steps; ++j) {
        y = mul(interval_propagator(n, damping, grid.node(j), h, 2 * m), y);
        const std::size_t idx = kernel.tri(j + 1, 0);
        worst = std::max(worst, static_cast<double>(n) * std::abs(y.b - table.q[idx]));
        worst = std::max(worst, std::abs(y.a - table.r[idx]));
      }
      res.self_check = worst;
    }
    results[static_cast<std::size_t>(mi)] = res;
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(dim));
  if (workers <= 1) {
    for (int mi = 0; mi < dim; ++mi) build_mode(mi);
  } else {
    std::atomic<int> next{0};
    std::vector<std::future<void>> tasks;
    tasks.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      tasks.push_back(std::async(std::launch::async, [&] {
        for (int mi = next.fetch_add(1); mi < dim; mi = next.fetch_add(1)) build_mode(mi);
      }));
    }
    for (auto& task : tasks) task.get();
  }

  for (const auto& res : results) {
    kernel.sine_sup_ = std::max(kernel.sine_sup_, res.q_sup);
    kernel.cosine_sup_ = std::max(kernel.cosine_sup_, res.r_sup);
    kernel.time_lipschitz_ = std::max(kernel.time_lipschitz_, res.lipschitz);
    kernel.self_check_error_ = std::max(kernel.self_check_error_, res.self_check);
  }
  return kernel;
}

namespace {

void check_pair(const EvolutionKernel& kernel, double t, double s, int& j, int& k) {
  j = kernel.grid().index_of(t);
  k = kernel.grid().index_of(s);
  if (k > j) throw std::invalid_argument("evolution kernel: requires s <= t");
}

void check_modes(const EvolutionKernel& kernel, const SpectralVector& x) {
  if (x.modes != kernel.modes()) {
    throw std::invalid_argument("evolution kernel: mode set of argument differs from kernel");
  }
}

}  // namespace

SpectralVector evolution_apply(const EvolutionKernel& kernel, double t, double s,
                               const SpectralVector& x) {
  check_modes(kernel, x);
  int j, k;
  check_pair(kernel, t, s, j, k);
  Eigen::VectorXcd out(x.coeffs.size());
  for (int i = 0; i < x.modes.dim(); ++i) out(i) = kernel.sine(i, j, k) * x.coeffs(i);
  return SpectralVector(x.modes, std::move(out));
}

SpectralVector cosine_evolution_apply(const EvolutionKernel& kernel, double t, double s,
                                      const SpectralVector& x) {
  check_modes(kernel, x);
  int j, k;
  check_pair(kernel, t, s, j, k);
  Eigen::VectorXcd out(x.coeffs.size());
  for (int i = 0; i < x.modes.dim(); ++i) out(i) = kernel.cosine(i, j, k) * x.coeffs(i);
  return SpectralVector(x.modes, std::move(out));
}

SpectralVector adjoint_evolution_apply(const EvolutionKernel& kernel, double t, double s,
                                       const SpectralVector& x) {
  check_modes(kernel, x);
  int j, k;
  check_pair(kernel, t, s, j, k);
  Eigen::VectorXcd out(x.coeffs.size());
  for (int i = 0; i < x.modes.dim(); ++i) out(i) = std::conj(kernel.sine(i, j, k)) * x.coeffs(i);
  return SpectralVector(x.modes, std::move(out));
}

SpectralVector cosine_apply(double t, const SpectralVector& x) {
  Eigen::VectorXcd out(x.coeffs.size());
  for (int i = 0; i < x.modes.dim(); ++i) out(i) = std::cos(x.modes.mode(i) * t) * x.coeffs(i);
  return SpectralVector(x.modes, std::move(out));
}

SpectralVector sine_apply(double t, const SpectralVector& x) {
  Eigen::VectorXcd out(x.coeffs.size());
  for (int i = 0; i < x.modes.dim(); ++i) {
    const double n = static_cast<double>(x.modes.mode(i));
    out(i) = std::sin(n * t) / n * x.coeffs(i);
  }
  return SpectralVector(x.modes, std::move(out));
}

namespace {

// Smooth probe: coefficient 1/n^2 per mode, the decay that keeps finite-difference
// checks of the operator identities at grid order uniformly over the mode set.
Eigen::VectorXd smooth_probe(const ModeSet& modes) {
  Eigen::VectorXd w(modes.dim());
  for (int i = 0; i < modes.dim(); ++i) {
    const double n = static_cast<double>(modes.mode(i));
    w(i) = 1.0 / (n * n);
  }
  return w;
}

// q_n(t_{j-1}, t_j): one grid interval integrated backward from (0, 1) at t_j.
dcomplex backward_sine_value(const EvolutionKernel& kernel, int mode_index, int j, int m) {
  const int n = kernel.modes().mode(mode_index);
  const double h = kernel.grid().step();
  const double hs = -h / m;
  Mat2 y = identity2();
  const double t_start = kernel.grid().node(j);
  for (int i = 0; i < m; ++i) {
    const double ts = t_start + i * hs;
    const dcomplex c0 = mode_coefficient(n, kernel.damping().b(ts + kStageInset * hs));
    const dcomplex cm = mode_coefficient(n, kernel.damping().b(ts + hs / 2.0));
    const dcomplex c1 = mode_coefficient(n, kernel.damping().b(ts + (1.0 - kStageInset) * hs));
    rk4_substep(y, hs, c0, cm, c1);
  }
  return y.b;
}

}  // namespace

AxiomReport verify_axioms(const EvolutionKernel& kernel) {
  const ModeSet& modes = kernel.modes();
  const TimeGrid& grid = kernel.grid();
  const int dim = modes.dim();
  const int steps = grid.steps();
  const double h = grid.step();
  const Eigen::VectorXd w = smooth_probe(modes);
  const double w_norm = w.norm();

  AxiomReport report;
  report.fd_step = h;

  for (int mi = 0; mi < dim; ++mi) {
    for (int j = 0; j <= steps; ++j) {
      report.sine_diagonal_max = std::max(report.sine_diagonal_max, std::abs(kernel.sine(mi, j, j)));
      report.cosine_diagonal_max_dev =
          std::max(report.cosine_diagonal_max_dev, std::abs(kernel.cosine(mi, j, j) - 1.0));
    }
  }

  // Backward one-step values q_n(t_{j-1}, t_j), shared by both derivative checks.
  Eigen::MatrixXcd backward(dim, steps + 1);
  for (int mi = 0; mi < dim; ++mi) {
    const int m = kernel.substeps(mi);
    for (int j = 1; j <= steps; ++j) backward(mi, j) = backward_sine_value(kernel, mi, j, m);
  }

  for (int j = 1; j < steps; ++j) {
    double dt_sq = 0.0;
    double ds_sq = 0.0;
    for (int mi = 0; mi < dim; ++mi) {
      const dcomplex fd_t = (kernel.sine(mi, j + 1, j) - backward(mi, j)) / (2.0 * h);
      const dcomplex fd_s = (backward(mi, j + 1) - kernel.sine(mi, j, j - 1)) / (2.0 * h);
      dt_sq += std::norm((fd_t - 1.0) * w(mi));
      ds_sq += std::norm((fd_s + 1.0) * w(mi));
    }
    report.dt_identity_violation = std::max(report.dt_identity_violation, std::sqrt(dt_sq) / w_norm);
    report.ds_identity_violation = std::max(report.ds_identity_violation, std::sqrt(ds_sq) / w_norm);
  }

  // Second-order relation, spot-checked on two source columns.
  const int stride = std::max(1, steps / 16);
  for (int k : {0, steps / 2}) {
    for (int j = k + 1; j < steps; j += stride) {
      const double t = grid.node(j);
      double err_sq = 0.0;
      double ref_sq = 0.0;
      for (int mi = 0; mi < dim; ++mi) {
        const dcomplex fd2 =
            (kernel.sine(mi, j + 1, k) - 2.0 * kernel.sine(mi, j, k) + kernel.sine(mi, j - 1, k)) /
            (h * h);
        const dcomplex target =
            mode_coefficient(modes.mode(mi), kernel.damping().b(t)) * kernel.sine(mi, j, k);
        err_sq += std::norm((fd2 - target) * w(mi));
        ref_sq += std::norm(target * w(mi));
      }
      const double denom = std::max(std::sqrt(ref_sq), 1e-12);
      report.second_order_residual = std::max(report.second_order_residual, std::sqrt(err_sq) / denom);
    }
  }

  // Exponential bound: |q_n(t, s)| <= e^{beta (t - s)} / n at every tabulated pair.
  const double beta = kernel.damping().beta;
  std::vector<double> growth(static_cast<std::size_t>(steps) + 1);
  for (int d = 0; d <= steps; ++d) growth[static_cast<std::size_t>(d)] = std::exp(beta * h * d);
  double min_slack = std::numeric_limits<double>::infinity();
  for (int mi = 0; mi < dim; ++mi) {
    const double inv_n = 1.0 / modes.mode(mi);
    for (int j = 0; j <= steps; ++j) {
      for (int k = 0; k <= j; ++k) {
        const double slack = growth[static_cast<std::size_t>(j - k)] * inv_n - std::abs(kernel.sine(mi, j, k));
        min_slack = std::min(min_slack, slack);
      }
    }
  }
  report.gronwall_min_slack = min_slack;
  report.gronwall_ok = min_slack >= -1e-9;
  return report;
}

double cosine_family_identity_residual(const ModeSet& modes, const TimeGrid& grid) {
  const int dim = modes.dim();
  const int steps = grid.steps();
  const double h = grid.step();
  const Eigen::VectorXd w = smooth_probe(modes);
  const double w_norm = w.norm();

  // Composite Simpson of sin(n s)/n over [0, t_j] for even j, grown panel by panel.
  Eigen::VectorXd integral = Eigen::VectorXd::Zero(dim);
  double worst = 0.0;
  for (int j = 2; j <= steps; j += 2) {
    double err_sq = 0.0;
    for (int mi = 0; mi < dim; ++mi) {
      const double n = static_cast<double>(modes.mode(mi));
      const double f0 = std::sin(n * grid.node(j - 2)) / n;
      const double f1 = std::sin(n * grid.node(j - 1)) / n;
      const double f2 = std::sin(n * grid.node(j)) / n;
      integral(mi) += h / 3.0 * (f0 + 4.0 * f1 + f2);
      const double lhs = std::cos(n * grid.node(j)) - 1.0;
      const double rhs = -n * n * integral(mi);
      err_sq += std::norm((lhs - rhs) * w(mi));
    }
    worst = std::max(worst, std::sqrt(err_sq) / w_norm);
  }
  return worst;
}

double sine_family_derivative_residual(const ModeSet& modes, const TimeGrid& grid) {
  const int dim = modes.dim();
  const int steps = grid.steps();
  const double h = grid.step();
  const Eigen::VectorXd w = smooth_probe(modes);
  const double w_norm = w.norm();

  double worst = 0.0;
  for (int j = 1; j < steps; ++j) {
    double err_sq = 0.0;
    for (int mi = 0; mi < dim; ++mi) {
      const double n = static_cast<double>(modes.mode(mi));
      const double fd =
          (std::sin(n * grid.node(j + 1)) - std::sin(n * grid.node(j - 1))) / (2.0 * h * n);
      err_sq += std::norm((fd - std::cos(n * grid.node(j))) * w(mi));
    }
    worst = std::max(worst, std::sqrt(err_sq) / w_norm);
  }
  return worst;
}

}  // namespace evoctrl
