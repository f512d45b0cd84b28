#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "bflab/errors.hpp"
#include "bflab/kernel.hpp"

namespace {

using namespace bflab;
using mp = boost::multiprecision::cpp_bin_float_50;

constexpr int kTerms = 400;

// Sums c_m x^{2m-k} over m with 2m >= k, stopping once terms are negligible.
double sum_series(const std::vector<mp>& c, int k, double xd) {
  const mp x = xd;
  mp sum = 0;
  for (int m = 0; m < kTerms; ++m) {
    const int p = 2 * m - k;
    if (p < 0) continue;
    const mp term = c[m] * (p == 0 ? mp(1) : boost::multiprecision::pow(x, p));
    sum += term;
    if (p > 20 && abs(term) < 1e-40 * (abs(sum) + 1e-30)) break;
  }
  return static_cast<double>(sum);
}

// Taylor series of the entire function B(x) = (1/pi) int_0^inf exp(-s^4) cos(x s) ds:
// B(x) = (1/4pi) sum_m (-1)^m Gamma((2m+1)/4) x^{2m} / (2m)!, differentiated k times.
const std::vector<mp>& coefficients_1d(int k) {
  static std::map<int, std::vector<mp>> cache;
  auto& c = cache[k];
  if (c.empty()) {
    using boost::multiprecision::tgamma;
    const mp pi4 = 4 * boost::math::constants::pi<mp>();
    for (int m = 0; m < kTerms; ++m) {
      const int p = std::max(2 * m - k, 0);
      mp v = tgamma(mp(2 * m + 1) / 4) / tgamma(mp(p + 1)) / pi4;
      c.push_back(m % 2 ? mp(-v) : v);
    }
  }
  return c;
}

// Radial profile in the plane: (1/2pi) int_0^inf exp(-s^4) J_0(r s) s ds
// = (1/8pi) sum_m (-1)^m Gamma((m+1)/2) r^{2m} / (4^m (m!)^2), differentiated k times in r.
const std::vector<mp>& coefficients_2d(int k) {
  static std::map<int, std::vector<mp>> cache;
  auto& c = cache[k];
  if (c.empty()) {
    using boost::multiprecision::tgamma;
    const mp pi8 = 8 * boost::math::constants::pi<mp>();
    for (int m = 0; m < kTerms; ++m) {
      const int p = std::max(2 * m - k, 0);
      mp v = tgamma(mp(m + 1) / 2) * tgamma(mp(2 * m + 1)) /
             (boost::multiprecision::pow(mp(4), m) * tgamma(mp(m + 1)) * tgamma(mp(m + 1)) *
              tgamma(mp(p + 1)) * pi8);
      c.push_back(m % 2 ? mp(-v) : v);
    }
  }
  return c;
}

double series_1d(int k, double x) { return sum_series(coefficients_1d(k), k, x); }
double series_2d(int k, double r) { return sum_series(coefficients_2d(k), k, r); }

TEST(EuclideanKernel, CentreValueIsClosedForm) {
  EXPECT_NEAR(euclidean_kernel_1d(0, 0.0, 1.0), std::tgamma(1.25) / std::numbers::pi, 1e-15);
  EXPECT_NEAR(euclidean_kernel_2d_components(0, 0.0, 1.0)[0], 1.0 / (8.0 * std::sqrt(std::numbers::pi)), 1e-15);
}

TEST(EuclideanKernel, MatchesSeriesOracle1D) {
  for (int k = 0; k <= 3; ++k)
    for (double x : {0.0, 0.3, 1.0, 2.5, 4.0, 7.5, 12.0}) {
      const double ref = series_1d(k, x);
      EXPECT_NEAR(euclidean_kernel_1d(k, x, 1.0), ref, 1e-13) << "k=" << k << " x=" << x;
    }
}

TEST(EuclideanKernel, MatchesSeriesOracle2D) {
  for (int k = 0; k <= 2; ++k)
    for (double r : {0.0, 0.5, 1.5, 3.0, 6.0, 10.0}) {
      const auto c = euclidean_kernel_2d_components(k, r, 1.0);
      // Component [k] is the pure x-derivative, which along (r, 0) is the radial derivative.
      EXPECT_NEAR(c[k], series_2d(k, r), 1e-13) << "k=" << k << " r=" << r;
    }
}

TEST(EuclideanKernel, ParabolicScalingProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-8.0, 8.0), ut(-6.0, 2.0);
  for (int i = 0; i < 40; ++i) {
    const double x = ux(rng), t = std::pow(10.0, ut(rng));
    const int k = i % 3;
    const double lhs = euclidean_kernel_1d(k, x, t);
    const double rhs = std::pow(t, -(1.0 + k) / 4.0) * euclidean_kernel_1d(k, x * std::pow(t, -0.25), 1.0);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(EuclideanKernel, ParityProperty) {
  for (int k = 0; k <= 3; ++k)
    for (double x : {0.7, 3.1, 9.0}) {
      const double s = (k % 2) ? -1.0 : 1.0;
      EXPECT_NEAR(euclidean_kernel_1d(k, -x, 1.0), s * euclidean_kernel_1d(k, x, 1.0), 1e-15);
    }
}

TEST(EuclideanKernel, DecayExponentIsFourThirds) {
  std::vector<double> r;
  for (double x = 0.0; x <= 60.0; x += 0.1) r.push_back(x);
  const auto fit = decay_fit(euclidean_kernel_profile(1, 0, 1.0, r));
  EXPECT_NEAR(fit.exponent, 4.0 / 3.0, 0.05);
  EXPECT_GT(fit.delta, 0.0);
}

// Independent route for nu: bracket zeros of the series oracle, integrate each
// sign-definite piece with Gauss-Kronrod.
double oracle_l1(int k, double radius) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [k](double x) { return series_1d(k, x); };
  double total = 0.0, a = 0.0;
  double fa = f(a);
  const double step = 0.05;
  for (double b = step; b <= radius + 1e-12; b += step) {
    const double fb = f(b);
    if (fa == 0.0 || fa * fb < 0.0) {
      auto tol = [](double l, double u) { return std::abs(u - l) < 1e-14; };
      const auto root = boost::math::tools::bisect(f, b - step, b, tol);
      const double z = 0.5 * (root.first + root.second);
      total += std::abs(gauss_kronrod<double, 31>::integrate(f, a, z, 8, 1e-14));
      a = z;
    }
    fa = fb;
  }
  total += std::abs(gauss_kronrod<double, 31>::integrate(f, a, radius, 8, 1e-14));
  return 2.0 * total;
}

TEST(NuConstants, AgreeWithIndependentQuadrature1D) {
  EXPECT_NEAR(nu_constant(1, 0), oracle_l1(0, 40.0), 1e-9);
  EXPECT_NEAR(nu_constant(1, 1), oracle_l1(1, 40.0), 1e-9);
}

TEST(NuConstants, FrozenValues) {
  EXPECT_NEAR(nu_constant(1, 0), 1.237294385459, 1e-10);
  EXPECT_NEAR(nu_constant(1, 1), 0.715845394063, 1e-10);
  EXPECT_NEAR(nu_constant(1, 2), 0.552329120041, 1e-10);
  EXPECT_NEAR(nu_constant(2, 0), 1.515176083781, 1e-10);
  EXPECT_NEAR(nu_constant(2, 2), 1.182334501730, 1e-10);
}

TEST(FlatTorusKernel, MatchesDirectFourierSum) {
  const Grid g(1, 64);
  const std::vector<double> times{1e-3, 0.05, 1.0};
  const auto table = flat_torus_kernel(g, times);
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    for (int m = 0; m < g.n(); m += 5) {
      const double d = g.coord(m);
      double ref = 1.0;
      for (int k = 1; k <= 200; ++k) ref += 2.0 * std::exp(-std::pow(k, 4) * times[ti]) * std::cos(k * d);
      ref /= kTwoPi;
      EXPECT_NEAR(table.value(ti, std::size_t(m), 0), ref, 1e-12 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(FlatTorusKernel, AgreesWithEuclideanKernelAtShortTimes) {
  // Periodic images are below 1e-20 at this time; the torus kernel is the Euclidean one.
  const Grid g(1, 256);
  const double t = 1e-5;
  const auto table = flat_torus_kernel(g, {t});
  for (int m = -g.n() / 2 + 1; m < g.n() / 2; m += 7) {
    const double x = m * g.spacing();
    const std::size_t i = std::size_t((m + g.n()) % g.n());
    EXPECT_NEAR(table.value(0, i, 0), euclidean_kernel_1d(0, x, t), 1e-9);
  }
}

TEST(FlatTorusKernel, MassAndSymmetry) {
  const Grid g(2, 32);
  const auto table = flat_torus_kernel(g, {0.01, 0.1});
  EXPECT_LT(table.max_mass_error(), 1e-12);
  EXPECT_LT(table.max_asymmetry(), 1e-12);
}

TEST(FlatTorusKernel, UnresolvedTimeThrows) {
  const Grid g(1, 16);
  EXPECT_THROW(flat_torus_kernel(g, {1e-8}), ResolutionError);
  EXPECT_GT(flat_torus_min_time(g), 1e-8);
}

TEST(ReferenceKernel, ConformalMassSymmetryAndSemigroup) {
  const Grid g(1, 64);
  const auto metric = MetricSpec::conformal(0.2);
  const ConformalOperator1D op(metric, g);
  const auto table = reference_kernel(metric, g, {0.01, 0.02});
  EXPECT_LT(table.max_mass_error(), 1e-10);
  EXPECT_LT(table.max_asymmetry(), 1e-10);
  const auto& w = op.volume_weights();
  const Eigen::MatrixXd composed = table.matrix(0) * w.asDiagonal() * table.matrix(0);
  EXPECT_LT((composed - table.matrix(1)).cwiseAbs().maxCoeff(), 1e-9 * table.matrix(1).cwiseAbs().maxCoeff());
}

TEST(ReferenceKernel, FlatMetricMatchesSpectralKernelAwayFromNyquist) {
  const Grid g(1, 64);
  const auto dense = reference_kernel(MetricSpec::flat(1), g, {0.05});
  const auto spectral = flat_torus_kernel(g, {0.05});
  for (std::size_t i = 0; i < 64; i += 9)
    for (std::size_t j = 0; j < 64; j += 5) EXPECT_NEAR(dense.value(0, i, j), spectral.value(0, i, j), 1e-10);
}

TEST(Rescaling, FlatGapIsSmallAndShrinks) {
  const Grid g(1, 256);
  const auto res = rescaling_convergence(MetricSpec::flat(1), g, 0, {2.5e-4, 2e-5});
  ASSERT_GE(res.rows.size(), 2u);
  for (const auto& row : res.rows) EXPECT_LT(row.relative_gap, 1e-6);
}

}  // namespace
