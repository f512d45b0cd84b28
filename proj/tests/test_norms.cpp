#include <cmath>

#include <gtest/gtest.h>

#include "bflab/errors.hpp"
#include "bflab/norms.hpp"

namespace {

using namespace bflab;

SpaceTimeField separable(const Grid& g, const std::vector<double>& times,
                         const std::function<double(double)>& a, const std::function<double(double, double)>& f) {
  std::vector<SpectralField> s;
  const auto base = SpectralField::from_function(g, f);
  for (double t : times) s.push_back(a(t) * base);
  return SpaceTimeField(times, std::move(s));
}

TEST(Norms, LogLogSlopeExactForPowerLaw) {
  std::vector<double> x, y;
  for (int i = 1; i <= 10; ++i) {
    x.push_back(0.1 * i);
    y.push_back(3.0 * std::pow(0.1 * i, -0.75));
  }
  const auto fit = loglog_slope(x, y);
  EXPECT_NEAR(fit.slope, -0.75, 1e-13);
  EXPECT_NEAR(std::exp(fit.intercept), 3.0, 1e-12);
  EXPECT_THROW(loglog_slope({1.0}, {1.0}), InsufficientData);
}

TEST(Norms, TimeDerivativeExactForQuadratics) {
  const Grid g(1, 16);
  const auto times = geometric_times(1.0, 7, 1.7);
  const auto u = separable(g, times, [](double t) { return 2.0 * t * t - t + 0.5; },
                           [](double x, double) { return std::cos(x); });
  const auto dt = time_derivative(u);
  for (std::size_t j = 0; j < times.size(); ++j)
    EXPECT_NEAR(dt[j].sup_norm(), std::abs(4.0 * times[j] - 1.0), 1e-12);
}

TEST(Norms, XNormSupTermsOnLinearInTimeField) {
  const Grid g(1, 64);
  const double T = 0.5;
  const auto times = geometric_times(T, 12, 1.5);
  const auto u = separable(g, times, [](double t) { return t; }, [](double x, double) { return std::cos(x); });
  const auto r = x_norm(u, 0.5, T);
  for (int k = 0; k <= 4; ++k) {
    const std::string name = "sup_t^{-1/2+" + std::to_string(k) + "/4}|D^" + std::to_string(k) + "u|_0";
    EXPECT_NEAR(r.term(name), std::pow(T, 0.5 + 0.25 * k), 1e-12) << name;
  }
  EXPECT_NEAR(r.term("sup_t^{1/2}|u_t|_0"), std::sqrt(T), 1e-12);
  double sum = 0.0;
  for (const auto& t : r.terms) sum += t.value;
  EXPECT_NEAR(r.total, sum, 1e-14 * sum);
}

TEST(Norms, HomogeneityAndZero) {
  const Grid g(2, 32);
  const auto times = geometric_times(0.1, 8);
  const auto f = separable(g, times, [](double t) { return std::pow(t, -0.25); },
                           [](double x, double y) { return std::sin(x) * std::cos(y) + 0.2 * std::cos(3 * y); });
  NormOptions o;
  o.metric = MetricSpec::flat(2);
  const double y1 = y_norm(f, 0.5, 0.1, o).total;
  const auto f3 = map_slices(f, [](const SpectralField& s, double) { return -3.0 * s; });
  EXPECT_NEAR(y_norm(f3, 0.5, 0.1, o).total, 3.0 * y1, 1e-12 * y1);
  const auto z = map_slices(f, [](const SpectralField& s, double) { return 0.0 * s; });
  EXPECT_EQ(x_norm(z, 0.5, 0.1, o).total, 0.0);
}

TEST(Norms, YNormSupTermOfConstantField) {
  const Grid g(1, 32);
  const auto times = geometric_times(1.0, 6);
  const auto f = separable(g, times, [](double t) { return 2.0 / std::sqrt(t); }, [](double, double) { return 1.0; });
  const auto r = y_norm(f, 0.5, 1.0);
  EXPECT_NEAR(r.term("sup_t^{1/2}|f|_0"), 2.0, 1e-13);
  EXPECT_EQ(r.term("sup_t^{1/2+a/4}[f]_a"), 0.0);
}

TEST(Norms, FlatCovariantDerivativeIsPartialDerivative) {
  const Grid g(1, 32);
  const auto f = SpectralField::from_function(g, [](double x, double) { return std::sin(2 * x); });
  const auto c = covariant_derivative(f, 3, MetricSpec::flat(1));
  const auto d = derivative_tensor(f, 3);
  EXPECT_LT((tensor_norm(c) - tensor_norm(d)).sup_norm(), 1e-12);
}

TEST(Norms, ConformalCovariantDerivativeUsesArclength) {
  const Grid g(1, 64);
  const auto m = MetricSpec::conformal(0.3);
  const auto f = SpectralField::from_function(g, [](double x, double) { return std::sin(x); });
  const auto c = covariant_derivative(f, 1, m);
  // |df/ds| = |cos x| / sqrt(1 + 0.3 cos x)
  const auto ref = SpectralField::from_function(g, [](double x, double) {
    return std::abs(std::cos(x)) / std::sqrt(1.0 + 0.3 * std::cos(x));
  });
  EXPECT_LT((tensor_norm(c) - ref).sup_norm(), 1e-10);
}

TEST(Norms, SmoothingProfileOfSingleMode) {
  const Grid g(1, 64);
  const int m = 3;
  const auto times = geometric_times(0.01, 6);
  const auto u = separable(g, times, [](double t) { return std::exp(-t); },
                           [](double x, double) { return std::cos(m * x); });
  SmoothingOptions o;
  o.k_max = 2;
  o.l_max = 0;
  const auto p = smoothing_profile(u, o);
  for (int k = 0; k <= 2; ++k)
    for (const auto& row : p.series(k, 0)) {
      const double raw = std::exp(-row.t) * std::pow(m, k + 2) / 4.0;
      EXPECT_NEAR(row.raw, raw, 1e-11 * raw);
      EXPECT_NEAR(row.weighted, std::pow(row.t, 0.25 * k) * raw, 1e-11 * raw);
    }
}

TEST(Norms, RejectsBadArguments) {
  const Grid g(1, 16);
  const auto times = geometric_times(1.0, 4);
  const auto u = separable(g, times, [](double t) { return t; }, [](double x, double) { return std::cos(x); });
  EXPECT_THROW(x_norm(u, 1.5, 1.0), std::invalid_argument);
  EXPECT_THROW(x_norm(u, 0.5, 0.5), std::invalid_argument);
}

}  // namespace
