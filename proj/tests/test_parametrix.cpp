#include <cmath>

#include <boost/math/special_functions/beta.hpp>
#include <gtest/gtest.h>

#include "bflab/kernel.hpp"
#include "bflab/parametrix.hpp"

namespace {

using namespace bflab;

TEST(Cover, PartitionOfUnityAndCutoffs) {
  const Grid g(1, 128);
  const auto c = make_cover(g, 4);
  EXPECT_EQ(c.n_charts, 4);
  EXPECT_LT(c.partition_error, 1e-12);
  SpectralField sum(g);
  for (int nu = 0; nu < 4; ++nu) {
    EXPECT_GE(c.phi[nu].min(), -1e-15);
    sum = sum + c.phi[nu];
    // psi_nu = 1 wherever phi_nu is supported.
    for (std::size_t i = 0; i < g.size(); ++i)
      if (std::abs(c.phi[nu][i]) > 1e-15) EXPECT_NEAR(c.psi[nu][i], 1.0, 1e-14);
  }
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(sum[i], 1.0, 1e-12);
}

TEST(ConvolutionRule, IntegratesBetaIntegrandsExactly) {
  for (double t : {1e-6, 0.01, 1.0})
    for (double a : {-0.75, -0.5, 0.0, 1.0})
      for (double b : {-0.75, -0.25, 0.0, 2.0}) {
        double s = 0.0;
        for (const auto& n : convolution_rule(t)) s += n.weight * std::pow(n.s, a) * std::pow(n.complement, b);
        const double ref = std::pow(t, a + b + 1.0) * boost::math::beta(a + 1.0, b + 1.0);
        EXPECT_NEAR(s, ref, 1e-12 * ref) << "t=" << t << " a=" << a << " b=" << b;
      }
}

TEST(ConvolutionRule, ComplementIsExact) {
  for (const auto& n : convolution_rule(0.3)) {
    EXPECT_GT(n.s, 0.0);
    EXPECT_GT(n.complement, 0.0);
    EXPECT_NEAR(n.s + n.complement, 0.3, 1e-16);
  }
}

TEST(TabulatedKernel, CubicInLogTimeIsReproduced) {
  std::vector<double> nodes;
  std::vector<Eigen::MatrixXd> values;
  auto f = [](double t) {
    const double l = std::log(t);
    return 1.0 + 0.5 * l - 0.1 * l * l + 0.01 * l * l * l;
  };
  for (int i = 0; i < 10; ++i) {
    nodes.push_back(1e-3 * std::pow(1.5, i));
    values.push_back(Eigen::MatrixXd::Constant(2, 2, f(nodes.back())));
  }
  const TabulatedKernel k(nodes, values);
  for (double t : {1.3e-3, 4e-3, 2e-2, 3.5e-2}) EXPECT_NEAR(k.at(t)(1, 0), f(t), 1e-11);
  // Linear to zero below the first node.
  EXPECT_NEAR(k.at(0.5e-3)(0, 0), 0.5 * f(1e-3), 1e-14);
}

TEST(FrozenKernel, ContinuumFormMatchesEuclideanKernel) {
  const Grid g(1, 64);
  const auto metric = MetricSpec::conformal(0.2);
  const FrozenKernelFamily fam(metric, g);
  const double xi = 1.0, a = fam.coefficient_at(xi), t = 0.01;
  // a = g^{11}(xi)^2 = (1 + 0.2 cos xi)^{-2}
  EXPECT_NEAR(a, std::pow(1.0 + 0.2 * std::cos(xi), -2.0), 1e-14);
  for (double x : {0.0, 0.2, 0.5})
    EXPECT_NEAR(frozen_kernel(fam, x, t, xi), euclidean_kernel_1d(0, x, a * t), 1e-12);
}

TEST(FrozenKernel, PeriodicMatchesFlatTorusKernel) {
  const Grid g(1, 64);
  const FrozenKernelFamily fam(MetricSpec::flat(1), g);
  const double t = 0.02;
  const auto v = fam.periodic(1.0, t);
  const auto table = flat_torus_kernel(g, {t});
  for (int m = 0; m < g.n(); ++m) EXPECT_NEAR(v[m], table.value(0, std::size_t(m), 0), 1e-13);
}

TEST(Parametrix, FlatMetricHasNoFreezingOrLowerOrderDefect) {
  const Grid g(1, 64);
  const Parametrix p(MetricSpec::flat(1), g, 4);
  const auto d = p.defect_groups(1e-3);
  const double scale = p.z_fourth_derivative(1e-3).cwiseAbs().maxCoeff();
  EXPECT_LT(d.freezing.cwiseAbs().maxCoeff(), 1e-13 * scale);
  EXPECT_LT(d.lower_order.cwiseAbs().maxCoeff(), 1e-13 * scale);
  EXPECT_LT((d.total - d.freezing - d.lower_order - d.remainder).cwiseAbs().maxCoeff(), 1e-12 * scale);
}

TEST(Parametrix, FlatParametrixApproachesTheHeatKernelAsTimeShrinks) {
  // Only cutoff terms separate Z from the flat kernel, and they vanish faster than any power of t.
  const Grid g(1, 128);
  const Parametrix p(MetricSpec::flat(1), g, 4);
  double previous = 1.0;
  for (double t : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const auto ref = reference_kernel(MetricSpec::flat(1), g, {t});
    const double e = row_l1_error(p.z(t), ref.matrix(0), p.volume_weights());
    EXPECT_LT(e, previous) << "t=" << t;
    previous = e;
  }
  EXPECT_LT(previous, 1e-6);
}

TEST(Parametrix, RowL1ErrorOfIdenticalKernelsIsZero) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(5, 5);
  EXPECT_EQ(row_l1_error(a, a, Eigen::VectorXd::Ones(5)), 0.0);
}

TEST(Parametrix, AssembledKernelMatchesDenseOracle) {
  const Grid g(1, 32);
  const auto metric = MetricSpec::conformal(0.1);
  const double T = 0.05;
  const auto table = build_parametrix(metric, g, {T}, 4);
  const auto series = neumann_series(table, T);
  EXPECT_TRUE(series.converged);
  const auto assembled = assemble_kernel(table, series, {T / 4, T / 2, T});
  for (const auto& row : assembled.validation) {
    EXPECT_LT(row.row_l1_error, 1e-5) << "t=" << row.t;
    EXPECT_LT(row.mass_error, 1e-5) << "t=" << row.t;
  }
}

}  // namespace
