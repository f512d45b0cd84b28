#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bflab/errors.hpp"
#include "bflab/kernel.hpp"

namespace bflab {

namespace {

// Periodic spectral differentiation matrix with the Nyquist mode zeroed
// (skew-symmetric, null space {1, (-1)^i}).
Eigen::MatrixXd spectral_derivative_matrix(const Grid& grid) {
  const int n = grid.n();
  const double h = kTwoPi / n;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int m = i - j;
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      d(i, j) = 0.5 * sign / std::tan(0.5 * m * h);
    }
  }
  return d * grid.base_wavenumber();
}

}  // namespace

ConformalOperator1D::ConformalOperator1D(const MetricSpec& metric, const Grid& grid)
    : grid_(grid) {
  if (grid.dim() != 1 || metric.dim != 1)
    throw std::invalid_argument("ConformalOperator1D: dimension must be 1");
  if (grid.n() > 512) throw std::invalid_argument("ConformalOperator1D: at most 512 points");
  const int n = grid.n();
  const auto g = metric.conformal_factor(grid);
  w_.resize(n);
  for (int i = 0; i < n; ++i) w_(i) = std::sqrt(g[i]);
  dv_ = w_ * grid.spacing();
  d_ = spectral_derivative_matrix(grid);

  const Eigen::VectorXd winv = w_.cwiseInverse();
  const Eigen::VectorXd wsqrt = w_.cwiseSqrt();
  const Eigen::VectorXd wisqrt = wsqrt.cwiseInverse();
  // M = W^{-1/2} D W^{-1/2} is skew, S = M^2 = W^{1/2} Delta W^{-1/2} is symmetric.
  const Eigen::MatrixXd m = wisqrt.asDiagonal() * d_ * wisqrt.asDiagonal();
  Eigen::MatrixXd s = m * m;
  s = 0.5 * (s + s.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  if (eig.info() != Eigen::Success)
    throw NumericalFailure("ConformalOperator1D: eigendecomposition failed");

  const Eigen::VectorXd& lam = eig.eigenvalues();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::abs(lam(a)) < std::abs(lam(b)); });
  // The two smallest |lambda| span {W^{1/2} 1, W^{1/2} (-1)^i}; keep only W^{1/2} 1.
  q_.resize(n, n - 1);
  mu_.resize(n - 1);
  q_.col(0) = wsqrt / wsqrt.norm();
  mu_(0) = 0.0;
  for (int c = 2; c < n; ++c) {
    const int idx = order[c];
    q_.col(c - 1) = eig.eigenvectors().col(idx);
    mu_(c - 1) = lam(idx) * lam(idx);
  }

  const Eigen::MatrixXd lap = winv.asDiagonal() * d_ * winv.asDiagonal() * d_;
  l_ = lap * lap;

  Eigen::VectorXd alt(n);
  for (int i = 0; i < n; ++i) alt(i) = (i % 2 == 0) ? 1.0 : -1.0;
  const double c = alt.dot(w_) / w_.sum();
  const Eigen::VectorXd v = alt - Eigen::VectorXd::Constant(n, c);
  const Eigen::VectorXd wv = w_.cwiseProduct(v);
  pi_ = v * wv.transpose() / v.dot(wv);
}

Eigen::MatrixXd ConformalOperator1D::laplacian() const {
  const Eigen::VectorXd winv = w_.cwiseInverse();
  return winv.asDiagonal() * d_ * winv.asDiagonal() * d_;
}

Eigen::MatrixXd ConformalOperator1D::semigroup(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("semigroup: t must be nonnegative");
  const Eigen::VectorXd e = (-t * mu_).array().exp();
  const Eigen::VectorXd wsqrt = w_.cwiseSqrt();
  const Eigen::MatrixXd core = q_ * e.asDiagonal() * q_.transpose();
  return wsqrt.cwiseInverse().asDiagonal() * core * wsqrt.asDiagonal();
}

Eigen::MatrixXd ConformalOperator1D::kernel(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("kernel: t must be positive");
  const Eigen::VectorXd e = (-t * mu_).array().exp();
  const Eigen::MatrixXd core = q_ * e.asDiagonal() * q_.transpose();
  const Eigen::VectorXd s = (w_.cwiseSqrt() * std::sqrt(grid_.spacing())).cwiseInverse();
  Eigen::MatrixXd b = s.asDiagonal() * core * s.asDiagonal();
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      const double avg = 0.5 * (b(i, j) + b(j, i));
      b(i, j) = avg;
      b(j, i) = avg;
    }
  return b;
}

KernelTable reference_kernel(const MetricSpec& metric, const Grid& grid,
                             const std::vector<double>& times) {
  ConformalOperator1D op(metric, grid);
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(times.size());
  for (double t : times) {
    if (!(t > 0.0)) throw std::invalid_argument("reference_kernel: times must be positive");
    mats.push_back(op.kernel(t));
  }
  return KernelTable::dense(grid, times, std::move(mats), op.volume_weights(),
                            KernelConstruction::MatrixExponential, metric.is_flat());
}

RescalingResult rescaling_convergence(const MetricSpec& metric, const Grid& grid, int k,
                                      const std::vector<double>& t_sequence,
                                      std::size_t x_index) {
  if (k < 0 || k > 6) throw std::invalid_argument("rescaling_convergence: 0 <= k <= 6");
  if (x_index >= grid.size()) throw std::invalid_argument("rescaling_convergence: bad x_index");
  ConformalOperator1D op(metric, grid);
  const double nu = nu_constant(1, k);
  const double mu_max = op.rates().maxCoeff();
  const int n = grid.n();
  const Eigen::VectorXd& w = op.density();
  RescalingResult out;
  for (double t : t_sequence) {
    if (!(t > 0.0)) throw std::invalid_argument("rescaling_convergence: times must be positive");
    // Highest retained mode must be damped below the truncation floor.
    if (std::exp(-mu_max * t) > 1e-12) {
      out.dropped_times.push_back(t);
      continue;
    }
    const Eigen::MatrixXd b = op.kernel(t);
    std::vector<double> row(n);
    for (int j = 0; j < n; ++j) row[j] = b(Eigen::Index(x_index), j);
    SpectralField f(grid, row);
    for (int r = 0; r < k; ++r) {
      const auto df = derivative(f, {1});
      std::vector<double> s(n);
      for (int j = 0; j < n; ++j) s[j] = df[j] / w(j);
      f = SpectralField(grid, std::move(s));
    }
    std::vector<double> fw(n);
    for (int j = 0; j < n; ++j) fw[j] = f[j] * w(j);
    const double value = std::pow(t, 0.25 * k) * l1_norm_bandlimited(SpectralField(grid, fw));
    out.rows.push_back({t, value, nu, std::abs(value - nu) / nu});
  }
  if (!out.dropped_times.empty())
    out.warning = std::to_string(out.dropped_times.size()) +
                  " time(s) below the grid resolution were dropped";
  return out;
}

}  // namespace bflab
