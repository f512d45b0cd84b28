#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "bflab/duhamel.hpp"
#include "bflab/propagator.hpp"

namespace {

using namespace bflab;

double oracle(const std::function<double(double)>& f, double t, double lambda) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate([&](double s) { return std::exp(-lambda * (t - s)) * f(s); }, 0.0, t);
}

double apply_weights(const std::vector<double>& w, const std::vector<double>& nodes,
                     const std::function<double(double)>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f(nodes[i]);
  return s;
}

TEST(DuhamelQuadrature, ExactClassesMatchTanhSinh) {
  const auto nodes = geometric_times(1.0, 20, 1.4);
  const DuhamelQuadrature q(nodes);
  const std::vector<std::function<double(double)>> exact{
      [](double) { return 1.0; }, [](double s) { return 1.0 / std::sqrt(s); }, [](double s) { return s; }};
  for (double lambda : {0.0, 1.0, 50.0})
    for (const auto& f : exact) {
      const auto& rows = q.node_weights(lambda);
      for (std::size_t i = 0; i < nodes.size(); i += 3) {
        const double ref = oracle(f, nodes[i], lambda);
        EXPECT_NEAR(apply_weights(rows[i], nodes, f), ref, 1e-11 * std::max(1.0, std::abs(ref)))
            << "lambda=" << lambda << " i=" << i;
      }
    }
}

TEST(DuhamelQuadrature, SmoothIntegrandConvergesAtCubicOrder) {
  auto f = [](double s) { return std::cos(3.0 * s) / std::sqrt(s); };
  std::vector<double> err;
  for (int count : {20, 40, 80, 160, 320}) {
    const auto nodes = geometric_times(1.0, count, std::pow(1e4, 1.0 / (count - 1)));
    const DuhamelQuadrature q(nodes);
    err.push_back(std::abs(apply_weights(q.weights_at(1.0, 2.0), nodes, f) - oracle(f, 1.0, 2.0)));
  }
  // Piecewise cubic interpolation: two halvings of the log-spacing gain at least third order.
  EXPECT_GT(err[2] / err[4], 64.0) << err[2] << " " << err[4];
  EXPECT_LT(err[4], 1e-7);
}

TEST(Propagator, FlatModeDecay) {
  const Grid g(2, 32);
  const auto prop = Propagator::flat(g, 1.0 / 16.0);
  const auto u = SpectralField::from_function(g, [](double x, double y) { return std::cos(2 * x + y); });
  const auto v = prop.apply(u, 0.3);
  const double rate = 25.0 / 16.0;
  EXPECT_LT((v - std::exp(-0.3 * rate) * u).sup_norm(), 1e-14);
}

TEST(Propagator, SemigroupAndConservedVolumeMean) {
  const Grid g(1, 64);
  const auto metric = MetricSpec::conformal(0.2);
  const auto prop = Propagator::conformal(metric, g);
  const auto u = SpectralField::from_function(g, [](double x, double) { return std::exp(std::sin(x)); });
  const auto a = prop.apply(prop.apply(u, 0.01), 0.02);
  const auto b = prop.apply(u, 0.03);
  EXPECT_LT((a - b).sup_norm(), 1e-11);
  const auto w = metric.conformal_factor(g);
  auto weighted_mean = [&](const SpectralField& f) {
    return pointwise_product(f, pointwise_map(w, [](double x) { return std::sqrt(x); })).integral();
  };
  EXPECT_NEAR(weighted_mean(prop.project(u)), weighted_mean(b), 1e-10);
}

TEST(VolumePotential, SingleModeInverseSqrtForcing) {
  const Grid g(1, 32);
  const auto times = geometric_times(0.5, 30, 1.3);
  std::vector<SpectralField> f;
  const auto mode = SpectralField::from_function(g, [](double x, double) { return std::cos(2 * x); });
  for (double t : times) f.push_back((1.0 / std::sqrt(t)) * mode);
  const auto prop = Propagator::flat(g, 1.0 / 16.0);
  const auto v = volume_potential(SpaceTimeField(times, std::move(f)), prop);
  for (std::size_t j = 0; j < times.size(); j += 4) {
    const double ref = oracle([](double s) { return 1.0 / std::sqrt(s); }, times[j], 1.0);
    EXPECT_LT((v.slice(j) - ref * mode).sup_norm(), 1e-11 * std::max(1.0, ref));
  }
}

TEST(VolumePotential, ResidualSmallForSmoothForcing) {
  const Grid g(1, 32);
  const auto times = geometric_times(0.1, 48);
  std::vector<SpectralField> f;
  for (double t : times)
    f.push_back(SpectralField::from_function(g, [t](double x, double) { return std::sin(x + t) / std::sqrt(t); }));
  const auto prop = Propagator::flat(g);
  const auto rows = duhamel_residual(SpaceTimeField(times, std::move(f)), prop, 1e-3);
  ASSERT_FALSE(rows.empty());
  for (const auto& r : rows) EXPECT_LT(r.residual, 1e-4) << "t=" << r.t;
}

TEST(Schauder, RatioIsFiniteAndScaleInvariant) {
  const Grid g(1, 64);
  const double T = 0.05;
  const auto times = geometric_times(T, 24);
  std::vector<SpectralField> f;
  for (double t : times)
    f.push_back(SpectralField::from_function(g, [t](double x, double) { return std::cos(x) / std::pow(t, 0.25); }));
  const SpaceTimeField ff(times, f);
  const auto r = schauder_ratio(MetricSpec::flat(1), ff, T, 0.5);
  EXPECT_GT(r.ratio, 0.0);
  EXPECT_TRUE(std::isfinite(r.ratio));
  const auto scaled = map_slices(ff, [](const SpectralField& s, double) { return 7.0 * s; });
  EXPECT_NEAR(schauder_ratio(MetricSpec::flat(1), scaled, T, 0.5).ratio, r.ratio, 1e-10 * r.ratio);
}

}  // namespace
