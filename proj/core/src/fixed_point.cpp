#include <cmath>
#include <stdexcept>

#include "bflab/calabi.hpp"
#include "bflab/duhamel.hpp"
#include "bflab/errors.hpp"
#include "bflab/propagator.hpp"

namespace bflab {

CsvTable FixedPointResult::to_csv() const {
  CsvTable csv({"iterate", "x_norm_delta", "contraction_factor"});
  for (const auto& r : record) csv.add({double(r.iterate), r.x_norm_delta, r.contraction_factor});
  return csv;
}

FixedPointResult duhamel_fixed_point(const SpectralField& u0, const FlowConfig& config) {
  FlowState state = initial_flow_state(u0, config);
  const auto times = geometric_times(config.T, config.time_slices, config.time_ratio);
  const auto prop = Propagator::flat(config.grid, 1.0 / 16.0);
  const auto su0 = propagate_initial(state.initial, times, prop);
  const DuhamelQuadrature quad(times);
  const std::size_t nt = times.size();

  std::vector<SpectralField> zero(nt, SpectralField(config.grid));
  SpaceTimeField psi(times, zero);
  NormOptions norm;
  norm.metric = MetricSpec::flat(2);

  FixedPointResult out{psi, su0, state, {}, false};
  double previous = 0.0;
  int stalled = 0;
  for (int k = 1; k <= config.fp_max_iterations; ++k) {
    std::vector<SpectralField> f;
    f.reserve(nt);
    for (std::size_t j = 0; j < nt; ++j)
      f.push_back(truncate_two_thirds(nonlinearity(KahlerPotential(psi.slice(j) + su0.slice(j)))));
    SpaceTimeField next = volume_potential(SpaceTimeField(times, std::move(f)), prop, quad);
    std::vector<SpectralField> diff;
    diff.reserve(nt);
    for (std::size_t j = 0; j < nt; ++j) diff.push_back(next.slice(j) - psi.slice(j));
    const double delta = x_norm(SpaceTimeField(times, std::move(diff)), config.alpha, config.T, norm).total;
    const double factor = k == 1 ? std::nan("") : (previous > 0.0 ? delta / previous : 0.0);
    out.record.push_back({k, delta, factor});
    psi = std::move(next);
    previous = delta;
    if (delta < config.fp_tolerance) {
      out.converged = true;
      break;
    }
    stalled = (k > 1 && factor >= 1.0) ? stalled + 1 : 0;
    if (stalled >= 3)
      throw NoContraction("duhamel_fixed_point: contraction factor >= 1 for three iterates; "
                          "reduce T or delta");
  }

  std::vector<SpectralField> phi;
  phi.reserve(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    phi.push_back(psi.slice(j) + su0.slice(j));
    KahlerPotential p(phi.back());
    const auto band = delta_band_check(p, config.delta);
    state.potential = p;
    state.t = times[j];
    state.history.push_back({times[j], calabi_energy(p), c1_distance(p.phi(), state.initial),
                             band.min_h, band.max_h});
  }
  out.psi = std::move(psi);
  out.phi = SpaceTimeField(times, std::move(phi));
  out.state = std::move(state);
  return out;
}

}  // namespace bflab
