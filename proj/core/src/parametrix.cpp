#include "bflab/parametrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bflab/errors.hpp"

namespace bflab {

namespace {

// exp(-1/s) for s > 0.
double mollifier_tail(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

// Smooth step: 0 for s <= 0, 1 for s >= 1.
double smooth_step(double s) {
  const double a = mollifier_tail(s), b = mollifier_tail(1.0 - s);
  return a / (a + b);
}

double periodic_distance(double x, double c, double period) {
  double d = std::fmod(std::abs(x - c), period);
  return std::min(d, period - d);
}

double metric_factor(const MetricSpec& metric, double x) {
  if (metric.is_flat()) return 1.0;
  const double p = metric.profile ? metric.profile(x, 0.0) : std::cos(x);
  return 1.0 + metric.epsilon * p;
}

}  // namespace

ChartCover make_cover(const Grid& grid, int n_charts) {
  if (grid.dim() != 1) throw std::invalid_argument("make_cover: dimension must be 1");
  if (n_charts < 2) throw std::invalid_argument("make_cover: need at least two charts");
  const double L = grid.period();
  ChartCover c;
  c.n_charts = n_charts;
  // B_{r0/2} balls must cover; B_{7 r0/8} must not wrap.
  c.r0 = std::min(1.5 * L / n_charts, 0.99 * 4.0 * L / 7.0);
  const int n = grid.n();
  std::vector<std::vector<double>> bumps;
  std::vector<double> sum(n, 0.0);
  for (int nu = 0; nu < n_charts; ++nu) {
    const double center = nu * L / n_charts;
    c.centers.push_back(center);
    std::vector<double> b(n), p(n);
    for (int i = 0; i < n; ++i) {
      const double d = periodic_distance(grid.coord(i), center, L);
      const double s = d / (0.5 * c.r0);
      b[i] = s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
      sum[i] += b[i];
      p[i] = smooth_step((7.0 * c.r0 / 8.0 - d) / (c.r0 / 8.0));
    }
    bumps.push_back(std::move(b));
    c.psi.emplace_back(grid, std::move(p));
  }
  for (int i = 0; i < n; ++i)
    if (!(sum[i] > 0.0)) throw std::logic_error("make_cover: charts do not cover the circle");
  std::vector<double> total(n, 0.0);
  for (int nu = 0; nu < n_charts; ++nu) {
    std::vector<double> phi(n);
    for (int i = 0; i < n; ++i) {
      phi[i] = bumps[nu][i] / sum[i];
      total[i] += phi[i];
      // psi_nu = 1 on supp phi_nu.
      if (phi[i] > 0.0 && c.psi[nu][i] != 1.0)
        throw std::logic_error("make_cover: psi is not 1 on the support of phi");
    }
    c.phi.emplace_back(grid, std::move(phi));
  }
  for (double v : total) c.partition_error = std::max(c.partition_error, std::abs(v - 1.0));
  if (c.partition_error > 1e-12) throw std::logic_error("make_cover: partition of unity fails");
  return c;
}

FrozenKernelFamily::FrozenKernelFamily(const MetricSpec& metric, const Grid& grid)
    : metric_(metric), grid_(grid) {
  if (grid.dim() != 1) throw std::invalid_argument("FrozenKernelFamily: dimension must be 1");
  const int n = grid.n();
  a_.resize(n);
  for (int j = 0; j < n; ++j) a_(j) = coefficient_at(grid.coord(j));
  if (!(a_.minCoeff() > 0.0)) throw std::invalid_argument("FrozenKernelFamily: a must be > 0");
  cos_.resize(n, n / 2 + 1);
  sin_.resize(n, n / 2 + 1);
  for (int i = 0; i < n; ++i)
    for (int m = 0; m <= n / 2; ++m) {
      const double th = m * grid.base_wavenumber() * grid.coord(i);
      cos_(i, m) = std::cos(th);
      // The Nyquist mode enters as cos(k d) alone; its sine part vanishes on the grid.
      sin_(i, m) = (2 * m == n) ? 0.0 : std::sin(th);
    }
}

double FrozenKernelFamily::coefficient_at(double xi) const {
  const double g = metric_factor(metric_, xi);
  if (!(g > 0.0)) throw std::invalid_argument("FrozenKernelFamily: metric must be positive");
  return 1.0 / (g * g);
}

Eigen::MatrixXd FrozenKernelFamily::amplitudes(const Eigen::VectorXd& a, double t, int p) const {
  if (!(t > 0.0)) throw std::invalid_argument("frozen kernel: t must be > 0");
  const int n = grid_.n();
  const double k0 = grid_.base_wavenumber();
  Eigen::MatrixXd amp = Eigen::MatrixXd::Zero(n / 2 + 1, a.size());
  for (int m = (p > 0 ? 1 : 0); m <= n / 2; ++m) {
    const double k = m * k0;
    const double k4 = k * k * k * k;
    const double c = (m == 0 || 2 * m == n ? 1.0 : 2.0) * std::pow(k, p) / grid_.period();
    for (Eigen::Index j = 0; j < a.size(); ++j) amp(m, j) = c * std::exp(-a(j) * k4 * t);
  }
  return amp;
}

Eigen::MatrixXd FrozenKernelFamily::evaluate(const Eigen::MatrixXd& amp, int p) const {
  // (ik)^p e^{ikd} + (-ik)^p e^{-ikd} = 2 k^p Re(i^p e^{ikd}).
  switch (((p % 4) + 4) % 4) {
    case 0: return cos_ * amp;
    case 1: return -(sin_ * amp);
    case 2: return -(cos_ * amp);
    default: return sin_ * amp;
  }
}

Eigen::VectorXd FrozenKernelFamily::periodic(double a, double t, int p) const {
  return evaluate(amplitudes(Eigen::VectorXd::Constant(1, a), t, p), p).col(0);
}

Eigen::MatrixXd FrozenKernelFamily::periodic_columns(double t, int p) const {
  return evaluate(amplitudes(a_, t, p), p);
}

double frozen_kernel(const FrozenKernelFamily& family, double x, double t, double xi) {
  if (!(t > 0.0)) throw std::invalid_argument("frozen_kernel: t must be > 0");
  const double s = std::pow(family.coefficient_at(xi) * t, -0.25);
  return s * euclidean_kernel_1d(0, s * x, 1.0);
}

Parametrix::Parametrix(const MetricSpec& metric, const Grid& grid, int n_charts)
    : metric_(metric),
      grid_(grid),
      cover_(make_cover(grid, n_charts)),
      family_(metric, grid),
      op_(std::make_shared<ConformalOperator1D>(metric, grid)) {
  const int n = grid.n();
  chi_ = Eigen::MatrixXd::Zero(n, n);
  for (int nu = 0; nu < n_charts; ++nu)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) chi_(i, j) += cover_.psi[nu][i] * cover_.phi[nu][j];
  // Pi = v (w v)^T / (v . w v) with v the alternating mode made dV-orthogonal to 1.
  const auto& w = op_->density();
  Eigen::VectorXd alt(n);
  for (int i = 0; i < n; ++i) alt(i) = (i % 2 == 0) ? 1.0 : -1.0;
  null_v_ = alt - Eigen::VectorXd::Constant(n, alt.dot(w) / w.sum());
  null_u_ = w.cwiseProduct(null_v_) / null_v_.dot(w.cwiseProduct(null_v_));
}

void Parametrix::project_out(Eigen::MatrixXd& m) const {
  m -= null_v_ * (null_u_.transpose() * m);
}

Eigen::MatrixXd Parametrix::assemble(double t, int p, bool time_derivative) const {
  const int n = grid_.n();
  const auto& a = family_.coefficients();
  const auto& w = op_->density();
  Eigen::MatrixXd z(n, n);
  // d_t G = -a d^4 G.
  const Eigen::MatrixXd g = family_.periodic_columns(t, time_derivative ? p + 4 : p);
  for (int j = 0; j < n; ++j) {
    const double s = (time_derivative ? -a(j) : 1.0) / w(j);
    for (int i = 0; i < n; ++i) z(i, j) = s * chi_(i, j) * g((i - j + n) % n, j);
  }
  return z;
}

Eigen::MatrixXd Parametrix::z_unprojected(double t) const { return assemble(t, 0, false); }

Eigen::MatrixXd Parametrix::z(double t) const {
  Eigen::MatrixXd z = z_unprojected(t);
  project_out(z);
  return z;
}

Eigen::MatrixXd Parametrix::z_fourth_derivative(double t) const {
  const auto& d = op_->first_derivative();
  const Eigen::MatrixXd d2 = d * d;
  return d2 * (d2 * z(t));
}

Eigen::MatrixXd Parametrix::defect(double t) const {
  const Eigen::MatrixXd z = z_unprojected(t);
  Eigen::MatrixXd k = -(assemble(t, 0, true) + op_->bilaplacian() * z);
  project_out(k);
  return k;
}

DefectGroups Parametrix::defect_groups(double t) const {
  const int n = grid_.n();
  DefectGroups out;
  out.total = defect(t);
  // Delta_g^2 u = A^2 u'''' + c3 u''' + c2 u'' + c1 u' with A = 1/g, B = A'/2.
  std::vector<double> ax(n);
  for (int i = 0; i < n; ++i) ax[i] = 1.0 / metric_factor(metric_, grid_.coord(i));
  const SpectralField A(grid_, ax);
  const auto A1 = derivative(A, {1}), A2 = derivative(A, {2});
  const auto B = 0.5 * A1, B1 = 0.5 * A2, B2 = 0.5 * derivative(A, {3});
  Eigen::VectorXd c3(n), c2(n), c1(n);
  for (int i = 0; i < n; ++i) {
    c3(i) = A[i] * (2.0 * A1[i] + B[i]) + A[i] * B[i];
    c2(i) = A[i] * (A2[i] + 2.0 * B1[i]) + B[i] * (A1[i] + B[i]);
    c1(i) = A[i] * B2[i] + B[i] * B1[i];
  }
  const auto& a = family_.coefficients();
  const auto& w = op_->density();
  out.freezing.resize(n, n);
  out.lower_order.resize(n, n);
  const auto g4 = family_.periodic_columns(t, 4), g3 = family_.periodic_columns(t, 3),
             g2 = family_.periodic_columns(t, 2), g1 = family_.periodic_columns(t, 1);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int m = (i - j + n) % n;
      const double s = -chi_(i, j) / w(j);
      out.freezing(i, j) = s * (A[i] * A[i] - a(j)) * g4(m, j);
      out.lower_order(i, j) = s * (c3(i) * g3(m, j) + c2(i) * g2(m, j) + c1(i) * g1(m, j));
    }
  }
  out.remainder = out.total - out.freezing - out.lower_order;
  return out;
}

ParametrixTable build_parametrix(const MetricSpec& metric, const Grid& grid,
                                 const std::vector<double>& times, int n_charts) {
  auto p = std::make_shared<const Parametrix>(metric, grid, n_charts);
  std::vector<Eigen::MatrixXd> z;
  z.reserve(times.size());
  for (double t : times) {
    if (!(t > 0.0)) throw std::invalid_argument("build_parametrix: times must be > 0");
    z.push_back(p->z(t));
  }
  return {p, KernelTable::dense(grid, times, std::move(z), p->volume_weights(),
                                KernelConstruction::Parametrix, metric.is_flat())};
}

DefectTable defect(const ParametrixTable& parametrix, const std::vector<double>& times) {
  const auto& p = *parametrix.parametrix;
  const auto& dv = p.volume_weights();
  DefectTable d;
  d.times = times;
  for (double t : times) {
    auto g = p.defect_groups(t);
    d.sup_norm.push_back(g.total.cwiseAbs().maxCoeff());
    d.z4_sup_norm.push_back(p.z_fourth_derivative(t).cwiseAbs().maxCoeff());
    d.row_integral.push_back((g.total * dv).cwiseAbs().maxCoeff());
    d.groups.push_back(std::move(g));
  }
  return d;
}

double row_l1_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::VectorXd& dv) {
  const Eigen::VectorXd num = (a - b).cwiseAbs() * dv;
  const Eigen::VectorXd den = b.cwiseAbs() * dv;
  return num.cwiseQuotient(den).maxCoeff();
}

}  // namespace bflab
