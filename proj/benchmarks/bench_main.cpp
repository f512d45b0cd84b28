#include <cmath>

#include <benchmark/benchmark.h>

#include "bflab/calabi.hpp"
#include "bflab/duhamel.hpp"
#include "bflab/kernel.hpp"
#include "bflab/parametrix.hpp"
#include "bflab/propagator.hpp"
#include "bflab/rough_data.hpp"

namespace {

using namespace bflab;

SpectralField sample_field(const Grid& g) {
  return SpectralField::from_function(g, [](double x, double y) {
    return std::sin(x) * std::cos(2.0 * y) + 0.3 * std::cos(3.0 * x + y);
  });
}

void BM_Derivative2D(benchmark::State& state) {
  const Grid g(2, int(state.range(0)));
  const auto f = sample_field(g);
  for (auto _ : state) benchmark::DoNotOptimize(derivative(f, {2, 1}));
}
BENCHMARK(BM_Derivative2D)->Arg(64)->Arg(128)->Arg(256);

void BM_FlatPropagator(benchmark::State& state) {
  const Grid g(2, int(state.range(0)));
  const auto prop = Propagator::flat(g, 1.0 / 16.0);
  const auto f = sample_field(g);
  for (auto _ : state) benchmark::DoNotOptimize(prop.apply(f, 1e-3));
}
BENCHMARK(BM_FlatPropagator)->Arg(64)->Arg(256);

void BM_EuclideanKernel1D(benchmark::State& state) {
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(euclidean_kernel_1d(0, x, 1.0));
    x = std::fmod(x + 0.37, 30.0);
  }
}
BENCHMARK(BM_EuclideanKernel1D);

void BM_VolumePotential(benchmark::State& state) {
  const Grid g(2, 64);
  const auto times = geometric_times(0.01, int(state.range(0)));
  std::vector<SpectralField> f;
  for (double t : times) f.push_back(std::sqrt(t) * sample_field(g));
  const SpaceTimeField field(times, std::move(f));
  const auto prop = Propagator::flat(g, 1.0 / 16.0);
  const DuhamelQuadrature quad(times);
  for (auto _ : state) benchmark::DoNotOptimize(volume_potential(field, prop, quad));
}
BENCHMARK(BM_VolumePotential)->Arg(24)->Arg(48);

void BM_SemiImplicitStep(benchmark::State& state) {
  FlowConfig c;
  c.grid = Grid(2, int(state.range(0)));
  const auto u0 = rough_potential(c.grid, RoughKind::Smooth, 0.05);
  const auto s = initial_flow_state(u0, c);
  for (auto _ : state) benchmark::DoNotOptimize(semi_implicit_step(s, 1e-4));
}
BENCHMARK(BM_SemiImplicitStep)->Arg(64)->Arg(128);

void BM_ParametrixDefect(benchmark::State& state) {
  const Grid g(1, int(state.range(0)));
  const Parametrix p(MetricSpec::conformal(0.1), g, 4);
  for (auto _ : state) benchmark::DoNotOptimize(p.defect(1e-3));
}
BENCHMARK(BM_ParametrixDefect)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
