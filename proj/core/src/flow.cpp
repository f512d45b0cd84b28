#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bflab/calabi.hpp"
#include "bflab/errors.hpp"
#include "bflab/propagator.hpp"

namespace bflab {

namespace {

constexpr double kKahlerScale = 1.0 / 16.0;

FlowRecord diagnostics(const KahlerPotential& p, const SpectralField& u0, double t, double delta) {
  const auto band = delta_band_check(p, delta);
  return {t, calabi_energy(p), c1_distance(p.phi(), u0), band.min_h, band.max_h};
}

}  // namespace

CsvTable FlowState::to_csv() const {
  CsvTable csv({"t", "calabi_energy", "c1_gap", "min_h", "max_h"});
  for (const auto& r : history) csv.add({r.t, r.calabi_energy, r.c1_gap, r.min_h, r.max_h});
  return csv;
}

FlowState initial_flow_state(const SpectralField& u0, const FlowConfig& config) {
  config.validate();
  if (u0.grid() != config.grid) throw std::invalid_argument("flow: u0 grid differs from config grid");
  KahlerPotential p(u0);
  const auto band = delta_band_check(p, config.delta);
  if (!band.pass) throw DeltaBandViolation("initial potential rejected: " + band.message());
  FlowState s{p, p.phi(), 0.0, {}, config, 0};
  s.history.push_back(diagnostics(p, s.initial, 0.0, config.delta));
  return s;
}

FlowState semi_implicit_step(const FlowState& state, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("semi_implicit_step: dt must be > 0");
  const auto prop = Propagator::flat(state.potential.grid(), kKahlerScale);
  const auto r = truncate_two_thirds(nonlinearity(state.potential));
  FlowState next = state;
  for (int attempt = 0; attempt <= state.config.max_halvings; ++attempt) {
    const auto phi = prop.apply(state.potential.phi() + dt * r, dt);
    KahlerPotential p(phi, state.potential.background());
    if (p.density().min() > 0.0) {
      next.potential = p;
      next.t = state.t + dt;
      next.history.push_back(diagnostics(p, state.initial, next.t, state.config.delta));
      return next;
    }
    ++next.rejected_steps;
    dt *= 0.5;
  }
  throw KahlerViolation("semi_implicit_step: Kahler condition fails after " +
                        std::to_string(state.config.max_halvings) + " step halvings");
}

Trajectory run_semi_implicit(const SpectralField& u0, const FlowConfig& config,
                             const std::vector<double>& output_times) {
  if (output_times.empty()) throw std::invalid_argument("run_semi_implicit: no output times");
  for (std::size_t i = 0; i < output_times.size(); ++i)
    if (!(output_times[i] > 0.0) || (i > 0 && !(output_times[i] > output_times[i - 1])))
      throw std::invalid_argument("run_semi_implicit: output times must increase from > 0");
  FlowState s = initial_flow_state(u0, config);
  std::vector<SpectralField> slices;
  for (double target : output_times) {
    while (s.t < target) {
      double dt = config.dt_policy == DtPolicy::Fixed
                      ? config.dt
                      : std::clamp(config.dt_fraction * s.t, config.dt_min, config.dt);
      dt = std::min(dt, target - s.t);
      s = semi_implicit_step(s, dt);
      if (std::abs(s.t - target) <= 1e-12 * target) s.t = target;
    }
    slices.push_back(s.potential.phi());
  }
  return {SpaceTimeField(output_times, std::move(slices)), std::move(s)};
}

SpectralField richardson_semi_implicit(const SpectralField& u0, const FlowConfig& config) {
  FlowConfig fine = config;
  fine.dt *= 0.5;
  fine.dt_fraction *= 0.5;
  fine.dt_min *= 0.5;
  const auto coarse = run_semi_implicit(u0, config, {config.T});
  const auto refined = run_semi_implicit(u0, fine, {config.T});
  return 2.0 * refined.phi.slice(0) - coarse.phi.slice(0);
}

SmoothingExperiment run_smoothing_experiment(const SpectralField& u0, const FlowConfig& config,
                                             const std::vector<double>& times,
                                             const SmoothingOptions& options) {
  auto run = [&]() -> Trajectory {
    if (config.solver == FlowSolver::SemiImplicit) return run_semi_implicit(u0, config, times);
    FlowConfig c = config;
    c.T = times.back();
    auto fp = duhamel_fixed_point(u0, c);
    return {std::move(fp.phi), std::move(fp.state)};
  };
  Trajectory tr = run();
  SmoothingExperiment e{SmoothingProfile{}, std::move(tr.state), tr.phi.times(), {}, c1_norm(u0)};
  const auto& phi = tr.phi;
  SmoothingOptions o = options;
  o.metric = MetricSpec::flat(2);
  e.profile = smoothing_profile(phi, o);
  for (const auto& s : phi.slices()) e.c1_gap.push_back(c1_distance(s, u0));
  return e;
}

}  // namespace bflab
