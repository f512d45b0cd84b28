#include "bflab/propagator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bflab/errors.hpp"

namespace bflab {

Propagator Propagator::flat(const Grid& grid, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("Propagator::flat: scale must be positive");
  Propagator p(grid);
  p.kind_ = Kind::Flat;
  p.scale_ = scale;
  p.rates_.assign(grid.spectral_size(), 0.0);
  const double kappa = grid.base_wavenumber();
  for_each_mode(grid, [&](const ModeIndex& m) {
    const double k2 = kappa * kappa * (double(m.mx) * m.mx + double(m.my) * m.my);
    p.rates_[m.flat] = scale * k2 * k2;
  });
  return p;
}

Propagator Propagator::conformal(const MetricSpec& metric, const Grid& grid) {
  Propagator p(grid);
  p.kind_ = Kind::Dense;
  p.op_ = std::make_shared<ConformalOperator1D>(metric, grid);
  const auto& mu = p.op_->rates();
  p.rates_.assign(mu.data(), mu.data() + mu.size());
  return p;
}

Propagator Propagator::for_metric(const MetricSpec& metric, const Grid& grid) {
  return metric.is_flat() ? flat(grid) : conformal(metric, grid);
}

Propagator Propagator::from_table(KernelTable table) {
  Propagator p(table.grid());
  p.kind_ = Kind::Table;
  p.table_ = std::make_shared<const KernelTable>(std::move(table));
  return p;
}

std::vector<cplx> Propagator::to_modes(const SpectralField& u) const {
  if (u.grid() != grid_) throw std::invalid_argument("Propagator: grid mismatch");
  if (kind_ == Kind::Flat) return u.coefficients();
  if (kind_ == Kind::Table) throw std::logic_error("Propagator: table backend has no modes");
  const Eigen::Map<const Eigen::VectorXd> x(u.samples().data(), Eigen::Index(u.size()));
  const Eigen::VectorXd c = op_->modes().transpose() * (op_->density().cwiseSqrt().asDiagonal() * x);
  return std::vector<cplx>(c.data(), c.data() + c.size());
}

SpectralField Propagator::from_modes(const std::vector<cplx>& modes) const {
  if (kind_ == Kind::Flat) return SpectralField::from_coefficients(grid_, modes);
  if (kind_ == Kind::Table) throw std::logic_error("Propagator: table backend has no modes");
  Eigen::VectorXd c(Eigen::Index(modes.size()));
  for (std::size_t i = 0; i < modes.size(); ++i) c(Eigen::Index(i)) = modes[i].real();
  const Eigen::VectorXd x = op_->density().cwiseSqrt().cwiseInverse().asDiagonal() * (op_->modes() * c);
  return SpectralField(grid_, std::vector<double>(x.data(), x.data() + x.size()));
}

SpectralField Propagator::apply(const SpectralField& u0, double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("Propagator::apply: t must be nonnegative");
  if (u0.grid() != grid_) throw std::invalid_argument("Propagator: grid mismatch");
  if (kind_ == Kind::Table) {
    const auto ti = table_->time_index(t);
    if (!ti) {
      std::ostringstream os;
      os << "Propagator: kernel table has no slice at t = " << t
         << "; interpolation between slices is refused, request one of the stored times";
      throw ResolutionError(os.str());
    }
    const std::size_t n = grid_.size();
    const auto& dv = table_->volume_weights();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += table_->value(*ti, i, j) * u0[j] * dv(Eigen::Index(j));
      out[i] = s;
    }
    return SpectralField(grid_, std::move(out));
  }
  auto m = to_modes(u0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] *= std::exp(-t * rates_[i]);
  return from_modes(m);
}

SpectralField Propagator::generator(const SpectralField& u) const {
  if (kind_ == Kind::Table) throw std::logic_error("Propagator: table backend has no generator");
  if (kind_ == Kind::Flat) {
    const double s = scale_;
    return apply_symbol(u, [s](double kx, double ky) {
      const double k2 = kx * kx + ky * ky;
      return cplx(s * k2 * k2, 0.0);
    });
  }
  const Eigen::Map<const Eigen::VectorXd> x(u.samples().data(), Eigen::Index(u.size()));
  const Eigen::VectorXd y = op_->bilaplacian() * x;
  return SpectralField(grid_, std::vector<double>(y.data(), y.data() + y.size()));
}

SpaceTimeField propagate_initial(const SpectralField& u0, const std::vector<double>& times,
                                 const Propagator& propagator) {
  std::vector<SpectralField> slices;
  slices.reserve(times.size());
  for (double t : times) {
    if (!(t > 0.0)) throw std::invalid_argument("propagate_initial: times must be positive");
    slices.push_back(propagator.apply(u0, t));
  }
  return SpaceTimeField(times, std::move(slices));
}

}  // namespace bflab
