#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bflab/calabi.hpp"
#include "bflab/errors.hpp"

namespace bflab {

namespace {

SpectralField zip(const SpectralField& a, const SpectralField& b,
                  double (*op)(double, double)) {
  std::vector<double> s(a.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = op(a[i], b[i]);
  return SpectralField(a.grid(), std::move(s));
}

SpectralField divide(const SpectralField& a, const SpectralField& b) {
  return zip(a, b, [](double x, double y) { return x / y; });
}

SpectralField multiply(const SpectralField& a, const SpectralField& b) {
  return zip(a, b, [](double x, double y) { return x * y; });
}

SpectralField gradient_norm_squared(const SpectralField& f) {
  const auto fx = derivative(f, {1, 0}), fy = derivative(f, {0, 1});
  return zip(fx, fy, [](double x, double y) { return x * x + y * y; });
}

void require_kahler(const KahlerPotential& p) {
  const double m = p.density().min();
  if (!(m > 0.0)) {
    std::ostringstream os;
    os << "Kahler condition violated: min h = " << m;
    throw KahlerViolation(os.str());
  }
}

}  // namespace

SpectralField ddbar(const SpectralField& f) { return 0.25 * laplacian(f); }

SpectralField kahler_laplacian(const SpectralField& f, const SpectralField& g0) {
  return divide(ddbar(f), g0);
}

SpectralField kahler_bilaplacian(const SpectralField& f, const SpectralField& g0) {
  return kahler_laplacian(kahler_laplacian(f, g0), g0);
}

KahlerPotential::KahlerPotential(const SpectralField& phi, const MetricSpec& background)
    : phi_(phi.grid()), background_(background), g0_(phi.grid()), h_(phi.grid()) {
  if (phi.grid().dim() != 2 || background.dim != 2)
    throw std::invalid_argument("KahlerPotential: the torus must be two-dimensional");
  std::vector<double> s = phi.samples();
  const double m = phi.mean();
  for (double& v : s) v -= m;
  phi_ = SpectralField(phi.grid(), std::move(s));
  g0_ = background.conformal_factor(phi.grid());
  h_ = g0_ + ddbar(phi_);
}

std::string DeltaBand::message() const {
  std::ostringstream os;
  os << "delta-band check " << (pass ? "passed" : "failed") << ": h/g ranges over [" << min_h
     << ", " << max_h << "], required inside (" << 1.0 - delta << ", " << 1.0 + delta << ")";
  return os.str();
}

DeltaBand delta_band_check(const KahlerPotential& p, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta_band_check: delta in (0, 1)");
  const auto ratio = divide(p.density(), p.background_density());
  DeltaBand b;
  b.delta = delta;
  b.min_h = ratio.min();
  b.max_h = ratio.max();
  b.pass = b.min_h > 1.0 - delta && b.max_h < 1.0 + delta;
  return b;
}

SpectralField scalar_curvature(const KahlerPotential& p) {
  require_kahler(p);
  const auto logh = pointwise_map(p.density(), [](double v) { return std::log(v); });
  return -1.0 * divide(ddbar(logh), p.density());
}

double average_curvature(const KahlerPotential& p) {
  const auto& g0 = p.background_density();
  if (p.background().is_flat()) return 0.0;
  const auto ric = -1.0 * ddbar(pointwise_map(g0, [](double v) { return std::log(v); }));
  return ric.integral() / g0.integral();
}

NonlinearityTerms nonlinearity_terms(const KahlerPotential& p) {
  require_kahler(p);
  const auto& g0 = p.background_density();
  const auto& h = p.density();
  // phi_{,z zbar} = g0 w, phi_{,z zbar z} = g0 w_z, phi_{,z zbar z zbar} = g0 w_{z zbar}.
  const auto w = kahler_laplacian(p.phi(), g0);
  const auto wzz = ddbar(w);
  const auto wz2 = 0.25 * gradient_norm_squared(w);
  const std::size_t N = h.size();
  std::vector<double> q(N), c(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double hi = 1.0 / h[i], gi = 1.0 / g0[i];
    q[i] = -(hi * hi - gi * gi) * g0[i] * wzz[i];
    c[i] = hi * hi * hi * g0[i] * g0[i] * wz2[i];
  }
  NonlinearityTerms t{SpectralField(h.grid(), std::move(q)), SpectralField(h.grid(), std::move(c)),
                      SpectralField(h.grid()), SpectralField(h.grid())};
  if (p.background().is_flat()) {
    t.ricci = SpectralField(h.grid(), std::vector<double>(N, 0.0));
  } else {
    const auto ric = -1.0 * ddbar(pointwise_map(g0, [](double v) { return std::log(v); }));
    const double rbar = average_curvature(p);
    std::vector<double> r(N);
    for (std::size_t i = 0; i < N; ++i) r[i] = ric[i] / h[i] - rbar;
    t.ricci = SpectralField(h.grid(), std::move(r));
  }
  t.total = t.quartic + t.cubic + t.ricci;
  return t;
}

SpectralField nonlinearity(const KahlerPotential& p) { return nonlinearity_terms(p).total; }

double calabi_energy(const KahlerPotential& p) {
  const auto r = scalar_curvature(p);
  const double rbar = average_curvature(p);
  const auto& h = p.density();
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) s += (r[i] - rbar) * (r[i] - rbar) * h[i];
  return s * h.grid().cell_volume();
}

double c1_norm(const SpectralField& a) {
  double g = 0.0;
  const auto gn = gradient_norm_squared(a);
  for (double v : gn.samples()) g = std::max(g, std::sqrt(v));
  return std::max(a.sup_norm(), g);
}

double c1_distance(const SpectralField& a, const SpectralField& b) { return c1_norm(a - b); }

std::string to_string(FlowSolver s) {
  return s == FlowSolver::SemiImplicit ? "semi-implicit" : "duhamel-fixed-point";
}

FlowSolver parse_flow_solver(const std::string& name) {
  if (name == "semi-implicit") return FlowSolver::SemiImplicit;
  if (name == "duhamel-fixed-point") return FlowSolver::DuhamelFixedPoint;
  throw std::invalid_argument("unknown solver '" + name + "' (semi-implicit, duhamel-fixed-point)");
}

void FlowConfig::validate() const {
  if (grid.dim() != 2) throw std::invalid_argument("flow.grid: dimension must be 2");
  if (!(T > 0.0)) throw std::invalid_argument("flow.T: must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("flow.delta: must lie in (0, 1)");
  if (!(dt > 0.0)) throw std::invalid_argument("flow.dt: must be > 0");
  if (!(dt_fraction > 0.0 && dt_fraction <= 1.0))
    throw std::invalid_argument("flow.dt_fraction: must lie in (0, 1]");
  if (!(dt_min > 0.0)) throw std::invalid_argument("flow.dt_min: must be > 0");
  if (max_halvings < 0) throw std::invalid_argument("flow.max_halvings: must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("flow.alpha: must lie in (0, 1)");
  if (!(fp_tolerance > 0.0)) throw std::invalid_argument("flow.fp_tolerance: must be > 0");
  if (fp_max_iterations < 1) throw std::invalid_argument("flow.fp_max_iterations: must be >= 1");
  if (time_slices < 4) throw std::invalid_argument("flow.time_slices: must be >= 4");
  if (!(time_ratio > 1.0)) throw std::invalid_argument("flow.time_ratio: must be > 1");
}

}  // namespace bflab
