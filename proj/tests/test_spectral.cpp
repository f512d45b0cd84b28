#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bflab/spectral.hpp"

namespace {

using namespace bflab;

double max_diff(const SpectralField& a, const std::function<double(double, double)>& f) {
  const auto b = SpectralField::from_function(a.grid(), f);
  return (a - b).sup_norm();
}

SpectralField random_trig(const Grid& g, std::uint64_t seed, int degree) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<std::array<double, 4>> terms;
  for (int a = -degree; a <= degree; ++a)
    for (int b = 0; b <= (g.dim() == 2 ? degree : 0); ++b) terms.push_back({double(a), double(b), nd(rng), nd(rng)});
  return SpectralField::from_function(g, [&](double x, double y) {
    double s = 0.0;
    for (const auto& t : terms) s += t[2] * std::cos(t[0] * x + t[1] * y) + t[3] * std::sin(t[0] * x + t[1] * y);
    return s;
  });
}

TEST(Spectral, CoefficientsAreNormalized) {
  const Grid g(1, 32);
  const auto f = SpectralField::from_function(g, [](double x, double) { return 3.0 + 2.0 * std::cos(2.0 * x); });
  EXPECT_NEAR(f.coefficients()[0].real(), 3.0, 1e-14);
  EXPECT_NEAR(f.coefficients()[2].real(), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(f.coefficients()[1]), 0.0, 1e-14);
  EXPECT_NEAR(f.mean(), 3.0, 1e-14);
  EXPECT_NEAR(f.integral(), 3.0 * kTwoPi, 1e-12);
}

TEST(Spectral, MixedDerivativeMatchesClosedForm2D) {
  const Grid g(2, 32);
  const auto f = SpectralField::from_function(g, [](double x, double y) { return std::sin(3 * x) * std::cos(2 * y); });
  // d_x d_y^2 sin(3x) cos(2y) = -12 cos(3x) cos(2y)
  EXPECT_LT(max_diff(derivative(f, {1, 2}), [](double x, double y) { return -12.0 * std::cos(3 * x) * std::cos(2 * y); }), 1e-11);
  EXPECT_LT(max_diff(laplacian(f), [](double x, double y) { return -13.0 * std::sin(3 * x) * std::cos(2 * y); }), 1e-11);
}

TEST(Spectral, DerivativeOfNonPolynomialField) {
  const Grid g(1, 64);
  const auto f = SpectralField::from_function(g, [](double x, double) { return std::exp(std::sin(x)); });
  EXPECT_LT(max_diff(derivative(f, {1}), [](double x, double) { return std::cos(x) * std::exp(std::sin(x)); }), 1e-12);
}

TEST(Spectral, DerivativesCommuteAndIntegrateToZero) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Grid g(2, 32);
    const auto f = random_trig(g, seed, 5);
    const auto a = derivative(derivative(f, {1, 0}), {0, 2});
    const auto b = derivative(derivative(f, {0, 2}), {1, 0});
    EXPECT_LT((a - b).sup_norm(), 1e-10 * a.sup_norm());
    EXPECT_NEAR(derivative(f, {1, 1}).integral(), 0.0, 1e-10);
  }
}

TEST(Spectral, NonHermitianCoefficientsAreRejected) {
  const Grid g(1, 16);
  std::vector<cplx> c(g.spectral_size());
  c[0] = cplx(0.0, 1.0);
  EXPECT_THROW(SpectralField::from_coefficients(g, c), std::logic_error);
}

TEST(Spectral, TwoThirdsTruncationRemovesHighModes) {
  const Grid g(1, 64);
  const auto lo = SpectralField::from_function(g, [](double x, double) { return std::cos(20 * x); });
  const auto hi = SpectralField::from_function(g, [](double x, double) { return std::cos(23 * x); });
  EXPECT_LT((truncate_two_thirds(lo) - lo).sup_norm(), 1e-14);
  EXPECT_LT(truncate_two_thirds(hi).sup_norm(), 1e-13);
}

TEST(Spectral, DealiasedProductExactForLowModes) {
  const Grid g(2, 32);
  const auto c = SpectralField::from_function(g, [](double x, double y) { return std::cos(x + y); });
  const auto p = dealiased_product(c, c);
  EXPECT_LT(max_diff(p, [](double x, double y) { return 0.5 + 0.5 * std::cos(2 * x + 2 * y); }), 1e-14);
}

TEST(Spectral, BandlimitedL1Norm) {
  const Grid g(1, 64);
  const auto s = SpectralField::from_function(g, [](double x, double) { return std::sin(x); });
  EXPECT_NEAR(l1_norm_bandlimited(s), 4.0, 1e-12);
  const auto c = SpectralField::from_function(g, [](double x, double) { return 0.5 + std::cos(x); });
  // Positive arc (2 pi / 3 + sqrt 3) plus negative arc (sqrt 3 - pi / 3).
  const double exact = 2.0 * std::sqrt(3.0) + kTwoPi / 6.0;
  EXPECT_NEAR(l1_norm_bandlimited(c), exact, 1e-12);
}

TEST(Spectral, TensorNormOfGradient) {
  const Grid g(2, 32);
  const auto f = SpectralField::from_function(g, [](double x, double y) { return std::sin(x) + std::cos(y); });
  const auto n = tensor_norm(derivative_tensor(f, 1));
  EXPECT_LT(max_diff(n, [](double x, double y) {
              return std::sqrt(std::cos(x) * std::cos(x) + std::sin(y) * std::sin(y));
            }),
            1e-12);
  // Hessian of a product: |D^2 (sin x sin y)|^2 = 2 sin^2 x sin^2 y + 2 cos^2 x cos^2 y.
  const auto h = SpectralField::from_function(g, [](double x, double y) { return std::sin(x) * std::sin(y); });
  const auto hn = tensor_norm(derivative_tensor(h, 2));
  EXPECT_LT(max_diff(hn, [](double x, double y) {
              const double a = std::sin(x) * std::sin(y), b = std::cos(x) * std::cos(y);
              return std::sqrt(2 * a * a + 2 * b * b);
            }),
            1e-12);
}

TEST(Spectral, HolderSeminormProperties) {
  const Grid g(1, 128);
  const auto zero = SpectralField::from_function(g, [](double, double) { return 4.2; });
  EXPECT_EQ(holder_seminorm(zero, 0.5), 0.0);
  const auto s = SpectralField::from_function(g, [](double x, double) { return std::sin(x); });
  // Pair distances are capped at a quarter period, where 2 sin(d/2) / d^{1/2} peaks for sin x.
  const double half = holder_seminorm(s, 0.5);
  const double d = kTwoPi / 4.0, h = g.spacing();
  EXPECT_LE(half, 2.0 * std::sin(d / 2) / std::sqrt(d) + 1e-12);
  EXPECT_GE(half, 2.0 * std::sin((d - h) / 2) / std::sqrt(d - h) - 1e-12);
  EXPECT_NEAR(holder_seminorm(-3.0 * s, 0.5), 3.0 * holder_seminorm(s, 0.5), 1e-12);
}

TEST(Spectral, GeometricTimes) {
  const auto t = geometric_times(2.0, 5, 2.0);
  ASSERT_EQ(t.size(), 5u);
  EXPECT_DOUBLE_EQ(t.back(), 2.0);
  EXPECT_DOUBLE_EQ(t.front(), 0.125);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_NEAR(t[i] / t[i - 1], 2.0, 1e-14);
}

TEST(Spectral, ArithmeticRequiresMatchingGrids) {
  const Grid a(1, 16), b(1, 32);
  EXPECT_THROW(SpectralField(a) + SpectralField(b), std::invalid_argument);
}

}  // namespace
