#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bflab/errors.hpp"
#include "bflab/kernel.hpp"
#include "bflab/quadrature.hpp"

namespace bflab {

namespace {

constexpr double kPi = std::numbers::pi;

// Integrand exponent along Im xi = c, real part only.
double log_magnitude(double u, double c, double t, double x) {
  const double u2 = u * u;
  const double c2 = c * c;
  return -t * (u2 * u2 - 6.0 * u2 * c2 + c2 * c2) - c * x;
}

}  // namespace

double euclidean_kernel_1d(int k, double x, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("euclidean_kernel_1d: t must be positive");
  if (k < 0) throw std::invalid_argument("euclidean_kernel_1d: negative derivative order");
  if (x < 0.0) return (k % 2 == 0 ? 1.0 : -1.0) * euclidean_kernel_1d(k, -x, t);

  // The contour passes through the two upper saddles of -t xi^4 + i xi x,
  // where |integrand| peaks, so no cancellation is left on it.
  const double c = x > 0.0 ? 0.5 * std::cbrt(x / (4.0 * t)) : 0.0;
  const double us = std::sqrt(3.0) * c;
  const double peak = std::max(log_magnitude(us, c, t, x), log_magnitude(0.0, c, t, x));
  double U = std::max(std::pow(50.0 / t, 0.25), 2.0 * us + 1e-300);
  while (log_magnitude(U, c, t, x) - peak > -46.0 - 0.5 * k * std::log1p(U * U + c * c)) U *= 1.25;

  const double rate = std::abs(x) + 4.0 * t * (3.0 * U * U * c + c * c * c) + 4.0 * t * U * U * U;
  const int panels = 8 + static_cast<int>(std::ceil(U * rate / kPi));
  const auto& rule = gauss_legendre(32);
  const cplx I(0.0, 1.0);
  const double width = 2.0 * U / panels;
  cplx sum(0.0, 0.0);
  for (int p = 0; p < panels; ++p) {
    const double a = -U + p * width;
    const double mid = a + 0.5 * width;
    cplx part(0.0, 0.0);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double u = mid + 0.5 * width * rule.nodes[q];
      const cplx xi(u, c);
      const cplx xi2 = xi * xi;
      const cplx expo = -t * xi2 * xi2 + I * xi * x;
      cplx f = std::exp(expo);
      if (k > 0) f *= std::pow(I * xi, k);
      part += rule.weights[q] * f;
    }
    sum += part * (0.5 * width);
  }
  return sum.real() / (2.0 * kPi);
}

std::vector<double> euclidean_kernel_2d_components(int k, double r, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("euclidean_kernel_2d: t must be positive");
  if (k < 0) throw std::invalid_argument("euclidean_kernel_2d: negative derivative order");
  r = std::abs(r);
  // Angular harmonics a_m of cos^j sin^(k-j), exact by trapezoid in theta.
  const int nt = 64;
  std::vector<std::vector<cplx>> harm(k + 1, std::vector<cplx>(2 * k + 1));
  for (int j = 0; j <= k; ++j) {
    for (int m = -k; m <= k; ++m) {
      cplx a(0.0, 0.0);
      for (int s = 0; s < nt; ++s) {
        const double th = kTwoPi * s / nt;
        a += std::pow(std::cos(th), j) * std::pow(std::sin(th), k - j) *
             std::polar(1.0, -m * th);
      }
      harm[j][m + k] = a / double(nt);
    }
  }
  const double rho_max = std::pow(46.0 / t, 0.25) + 1.0;
  const int panels = 16 + static_cast<int>(std::ceil(rho_max * r / kPi));
  const auto& rule = gauss_legendre(32);
  // Radial moments R_m = int rho^{k+1} e^{-t rho^4} J_m(rho r) d rho, m = 0..k.
  std::vector<double> radial(k + 1, 0.0);
  const double width = rho_max / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * width;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double rho = mid + 0.5 * width * rule.nodes[q];
      const double rho2 = rho * rho;
      const double base = 0.5 * width * rule.weights[q] * std::pow(rho, k + 1) *
                          std::exp(-t * rho2 * rho2);
      for (int m = 0; m <= k; ++m) radial[m] += base * std::cyl_bessel_j(double(m), rho * r);
    }
  }
  const cplx I(0.0, 1.0);
  std::vector<double> out(k + 1);
  for (int j = 0; j <= k; ++j) {
    cplx s(0.0, 0.0);
    for (int m = -k; m <= k; ++m) {
      const int am = std::abs(m);
      const double jm = (m < 0 && am % 2 == 1) ? -radial[am] : radial[am];
      s += harm[j][m + k] * std::pow(I, m) * jm;
    }
    out[j] = (std::pow(I, k) * s).real() / kTwoPi;
  }
  return out;
}

KernelProfile euclidean_kernel_profile(int dim, int k, double t, std::vector<double> radii) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("euclidean_kernel_profile: dim 1 or 2");
  if (!(t > 0.0)) throw std::invalid_argument("euclidean_kernel_profile: t must be positive");
  if (k < 0) throw std::invalid_argument("euclidean_kernel_profile: negative derivative order");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] < 0.0 || (i > 0 && !(radii[i] > radii[i - 1])))
      throw std::invalid_argument("euclidean_kernel_profile: radii must increase from >= 0");
  }
  KernelProfile p{dim, k, t, std::move(radii), {}};
  p.values.reserve(p.radii.size());
  for (double r : p.radii) {
    double v;
    if (dim == 1) {
      v = euclidean_kernel_1d(k, r, t);
    } else {
      const auto comps = euclidean_kernel_2d_components(k, r, t);
      if (k == 0) {
        v = comps[0];
      } else {
        double acc = 0.0, binom = 1.0;
        for (int j = 0; j <= k; ++j) {
          acc += binom * comps[j] * comps[j];
          binom = binom * (k - j) / (j + 1);
        }
        v = std::sqrt(acc);
      }
    }
    if (!std::isfinite(v))
      throw NumericalFailure("euclidean_kernel_profile: non-finite value at r = " +
                             std::to_string(r));
    p.values.push_back(v);
  }
  return p;
}

CsvTable KernelProfile::to_csv() const {
  CsvTable table({"radius", "value"});
  for (std::size_t i = 0; i < radii.size(); ++i) table.add({radii[i], values[i]});
  return table;
}

double nu_constant(int dim, int k, const NuOptions& options) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("nu_constant: dim 1 or 2");
  if (k < 0 || k > 6) throw std::invalid_argument("nu_constant: 0 <= k <= 6");
  if (dim == 1) {
    auto f = [k](double x) { return euclidean_kernel_1d(k, x, 1.0); };
    return 2.0 * integrate_abs(f, 0.0, options.radius, options.scan_points, options.abs_tol);
  }
  auto radial = [k](double r) {
    const auto comps = euclidean_kernel_2d_components(k, r, 1.0);
    // On the x-axis the k = 1 norm is |d_x b|; the signed value lets zeros be bracketed.
    if (k <= 1) return comps[k];
    double acc = 0.0, binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      acc += binom * comps[j] * comps[j];
      binom = binom * (k - j) / (j + 1);
    }
    return std::sqrt(acc);
  };
  auto weighted = [&radial](double r) { return kTwoPi * r * radial(r); };
  return integrate_abs(weighted, 0.0, options.radius, options.scan_points / 4, options.abs_tol);
}

DecayFit decay_fit(const KernelProfile& profile, const DecayFitOptions& options) {
  const double r0 = options.window_start * std::pow(profile.t, 0.25);
  std::vector<double> rho, logv;
  std::vector<std::size_t> window;
  for (std::size_t i = 0; i < profile.radii.size(); ++i) {
    if (profile.radii[i] >= r0 && std::abs(profile.values[i]) > options.floor) window.push_back(i);
  }
  if (window.size() < 3)
    throw InsufficientData("decay_fit: fewer than three tail values above the floating floor");
  bool sign_change = false;
  for (std::size_t a = 1; a < window.size(); ++a) {
    if ((profile.values[window[a]] < 0.0) != (profile.values[window[a - 1]] < 0.0))
      sign_change = true;
  }
  for (std::size_t a = 0; a < window.size(); ++a) {
    const std::size_t i = window[a];
    const double v = std::abs(profile.values[i]);
    if (sign_change) {
      const bool left = a == 0 || v >= std::abs(profile.values[window[a - 1]]);
      const bool right = a + 1 == window.size() || v >= std::abs(profile.values[window[a + 1]]);
      if (!(left && right) || a == 0 || a + 1 == window.size()) continue;
    }
    rho.push_back(profile.radii[i]);
    logv.push_back(std::log(v));
  }
  if (rho.size() < 3) throw InsufficientData("decay_fit: fewer than three envelope peaks");

  auto linear_fit = [&](double p, double& logC, double& delta) {
    const double n = static_cast<double>(rho.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      const double x = std::pow(rho[i], p);
      sx += x;
      sy += logv[i];
      sxx += x * x;
      sxy += x * logv[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    logC = (sy - slope * sx) / n;
    delta = -slope;
    double ss = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      const double r = logv[i] - (logC - delta * std::pow(rho[i], p));
      ss += r * r;
    }
    return ss;
  };
  auto objective = [&](double p) {
    double a, b;
    return linear_fit(p, a, b);
  };
  const auto best = boost::math::tools::brent_find_minima(objective, 0.3, 4.0, 50);
  DecayFit fit;
  double logC = 0.0, delta = 0.0;
  const double ss = linear_fit(best.first, logC, delta);
  fit.exponent = best.first;
  fit.C = std::exp(logC);
  fit.delta = delta;
  fit.rms = std::sqrt(ss / rho.size());
  fit.points = rho.size();
  return fit;
}

}  // namespace bflab
