#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bflab/calabi.hpp"
#include "bflab/errors.hpp"
#include "bflab/rough_data.hpp"

namespace {

using namespace bflab;

SpectralField smooth_potential(const Grid& g, double amp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  const double a = u(rng), b = u(rng);
  const auto f = SpectralField::from_function(g, [a, b](double x, double y) {
    return std::cos(x + a) + 0.5 * std::sin(2 * y + b) + 0.25 * std::cos(x - y + a * b);
  });
  // Scale so that sup |d dbar f| = amp.
  return (amp / ddbar(f).sup_norm()) * f;
}

// Direct route: h = 1 + Delta phi / 4, R = -h^{-1} (Delta log h) / 4, plus Delta^2 phi / 16.
SpectralField direct_nonlinearity(const SpectralField& phi) {
  const auto h = pointwise_map(0.25 * laplacian(phi), [](double v) { return 1.0 + v; });
  const auto logh = pointwise_map(h, [](double v) { return std::log(v); });
  const auto r = pointwise_product(pointwise_map(h, [](double v) { return -0.25 / v; }), laplacian(logh));
  return r + (1.0 / 16.0) * laplacian(laplacian(phi));
}

TEST(Calabi, FlatNonlinearityAgreesWithDirectRoute) {
  const Grid g(2, 64);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto phi = smooth_potential(g, 0.05, seed);
    const KahlerPotential p(phi);
    const auto a = nonlinearity(p);
    const auto b = direct_nonlinearity(phi);
    EXPECT_LT((a - b).sup_norm(), 1e-9 * std::max(1e-3, b.sup_norm())) << "seed " << seed;
    const auto terms = nonlinearity_terms(p);
    EXPECT_LT((terms.quartic + terms.cubic + terms.ricci - terms.total).sup_norm(), 1e-12);
  }
}

TEST(Calabi, ConformalNonlinearityAgreesWithCurvaturePlusBilaplacian) {
  const Grid g(2, 64);
  const auto background = MetricSpec::conformal(0.1, 2, [](double x, double y) { return std::cos(x) * std::cos(y); });
  const auto phi = smooth_potential(g, 0.05, 9);
  const KahlerPotential p(phi, background);
  const auto expanded = nonlinearity(p);
  const auto curvature = scalar_curvature(p);
  const auto routed = pointwise_map(curvature, [&](double v) { return v - average_curvature(p); }) +
                      kahler_bilaplacian(phi, p.background_density());
  EXPECT_LT((expanded - routed).sup_norm(), 1e-9 * std::max(1e-3, routed.sup_norm()));
}

TEST(Calabi, ScalarCurvatureOfConformalBackground) {
  const Grid g(2, 64);
  const double eps = 0.2;
  const KahlerPotential p(SpectralField(g), MetricSpec::conformal(eps, 2, [](double x, double) { return std::cos(x); }));
  // R = -g0^{-1} d dbar log g0 with g0 = 1 + eps cos x gives (eps cos x + eps^2) / (4 g0^3).
  const auto ref = SpectralField::from_function(g, [eps](double x, double) {
    const double g0 = 1.0 + eps * std::cos(x);
    return (eps * std::cos(x) + eps * eps) / (4.0 * g0 * g0 * g0);
  });
  EXPECT_LT((scalar_curvature(p) - ref).sup_norm(), 1e-10);
}

TEST(Calabi, GaussBonnetAverageVanishes) {
  const Grid g(2, 64);
  for (std::uint64_t seed : {4u, 5u}) {
    const KahlerPotential p(smooth_potential(g, 0.08, seed));
    EXPECT_NEAR(average_curvature(p), 0.0, 1e-12);
    EXPECT_NEAR(p.volume(), kTwoPi * kTwoPi, 1e-10);
  }
}

TEST(Calabi, EnergyIsNonnegativeAndZeroAtFlat) {
  const Grid g(2, 32);
  EXPECT_EQ(calabi_energy(KahlerPotential(SpectralField(g))), 0.0);
  EXPECT_GT(calabi_energy(KahlerPotential(smooth_potential(g, 0.05, 3))), 0.0);
}

TEST(Calabi, DeltaBandDecision) {
  const Grid g(2, 32);
  const auto phi = smooth_potential(g, 0.05, 1);
  EXPECT_TRUE(delta_band_check(KahlerPotential(phi), 0.1).pass);
  const auto band = delta_band_check(KahlerPotential(phi), 0.04);
  EXPECT_FALSE(band.pass);
  EXPECT_NE(band.message().find("delta-band check failed"), std::string::npos);
  EXPECT_NEAR(std::max(band.max_h - 1.0, 1.0 - band.min_h), 0.05, 1e-12);
}

TEST(Calabi, NonPositiveDensityIsAKahlerViolation) {
  const Grid g(2, 32);
  const KahlerPotential p(smooth_potential(g, 1.5, 2));
  EXPECT_THROW(scalar_curvature(p), KahlerViolation);
}

TEST(Flow, InitialDataOutsideBandIsRejected) {
  FlowConfig c;
  c.grid = Grid(2, 32);
  const auto u0 = rough_potential(c.grid, RoughKind::Sawtooth, 0.2);
  EXPECT_THROW(initial_flow_state(u0, c), DeltaBandViolation);
}

TEST(Flow, EnergyDecreasesAlongSemiImplicitRun) {
  FlowConfig c;
  c.grid = Grid(2, 32);
  c.T = 0.05;
  const auto u0 = smooth_potential(c.grid, 0.05, 7);
  const auto tr = run_semi_implicit(u0, c, geometric_times(c.T, 10));
  const auto& h = tr.state.history;
  ASSERT_GT(h.size(), 10u);
  for (std::size_t i = 1; i < h.size(); ++i)
    EXPECT_LE(h[i].calabi_energy, h[i - 1].calabi_energy * (1.0 + 1e-8));
  EXPECT_LT(h.back().calabi_energy, 0.95 * h.front().calabi_energy);
}

TEST(Flow, LinearisedLimitMatchesPropagator) {
  // For tiny data the flow is the linear semigroup up to quadratic terms.
  FlowConfig c;
  c.grid = Grid(2, 32);
  const auto u0 = smooth_potential(c.grid, 1e-6, 3);
  const auto tr = run_semi_implicit(u0, c, {0.01});
  const auto lin = SpectralField::from_coefficients(c.grid, [&] {
    auto co = u0.coefficients();
    for_each_mode(c.grid, [&](const ModeIndex& m) {
      const double k2 = double(m.mx) * m.mx + double(m.my) * m.my;
      co[m.flat] *= std::exp(-0.01 * k2 * k2 / 16.0);
    });
    return co;
  }());
  EXPECT_LT((tr.phi.slice(0) - lin).sup_norm(), 1e-3 * lin.sup_norm());
}

TEST(FixedPoint, ZeroDataGivesZeroSolution) {
  FlowConfig c;
  c.grid = Grid(2, 32);
  c.solver = FlowSolver::DuhamelFixedPoint;
  c.time_slices = 12;
  const auto r = duhamel_fixed_point(SpectralField(c.grid), c);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.record.size(), 1u);
  for (const auto& s : r.phi.slices()) EXPECT_EQ(s.sup_norm(), 0.0);
}

TEST(FixedPoint, AgreesWithSemiImplicitOnSmoothData) {
  FlowConfig c;
  c.grid = Grid(2, 32);
  c.T = 0.01;
  c.fp_tolerance = 1e-9;
  const auto u0 = smooth_potential(c.grid, 0.05, 11);
  const auto fp = duhamel_fixed_point(u0, c);
  ASSERT_TRUE(fp.converged);
  for (std::size_t k = 1; k < fp.record.size(); ++k) EXPECT_LT(fp.record[k].contraction_factor, 0.5);
  c.dt_fraction = 0.01;
  const auto si = richardson_semi_implicit(u0, c);
  const auto diff = (fp.phi.slices().back() - si).sup_norm();
  EXPECT_LT(diff, 1e-4 * u0.sup_norm());
}

TEST(Flow, ConfigValidationNamesField) {
  FlowConfig c;
  c.delta = 1.5;
  try {
    c.validate();
    FAIL() << "expected invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("delta"), std::string::npos);
  }
}

TEST(RoughData, AmplitudeAndMeanZero) {
  const Grid g(2, 64);
  for (auto kind : {RoughKind::Sawtooth, RoughKind::Triangle, RoughKind::Weierstrass, RoughKind::RandomC11,
                    RoughKind::Smooth}) {
    const auto u = rough_potential(g, kind, 0.05);
    EXPECT_NEAR(ddbar(u).sup_norm(), 0.05, 1e-12) << to_string(kind);
    EXPECT_NEAR(u.mean(), 0.0, 1e-14) << to_string(kind);
    EXPECT_EQ(parse_rough_kind(to_string(kind)), kind);
  }
  EXPECT_THROW(parse_rough_kind("bogus"), std::invalid_argument);
}

}  // namespace
