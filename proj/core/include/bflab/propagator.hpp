#pragma once

#include <memory>
#include <vector>

#include "bflab/kernel.hpp"
#include "bflab/spectral.hpp"

namespace bflab {

// Solution operator S(t) = exp(-tL) of d_t + L. Three backends share one
// interface: the flat Fourier multiplier c|k|^4, the dense 1-D eigenbasis of
// a conformal metric, and a tabulated kernel (initial-value use only).
class Propagator {
 public:
  // L = c Delta^2 on the flat torus (c = 1/16 for the Kahler Laplacian squared).
  static Propagator flat(const Grid& grid, double scale = 1.0);
  static Propagator conformal(const MetricSpec& metric, const Grid& grid);
  // Picks flat() for flat metrics and conformal() otherwise.
  static Propagator for_metric(const MetricSpec& metric, const Grid& grid);
  static Propagator from_table(KernelTable table);

  const Grid& grid() const { return grid_; }
  bool is_flat() const { return kind_ == Kind::Flat; }
  bool has_modes() const { return kind_ != Kind::Table; }

  // S(t) u0. The table backend refuses times it does not store.
  SpectralField apply(const SpectralField& u0, double t) const;
  // L u (modal backends only).
  SpectralField generator(const SpectralField& u) const;

  // Modal coordinates: S(t) multiplies mode m by exp(-t rate_m).
  const std::vector<double>& rates() const { return rates_; }
  std::vector<cplx> to_modes(const SpectralField& u) const;
  SpectralField from_modes(const std::vector<cplx>& modes) const;
  // Component of u that the modal backend represents (identity when flat).
  SpectralField project(const SpectralField& u) const { return from_modes(to_modes(u)); }

 private:
  enum class Kind { Flat, Dense, Table };
  explicit Propagator(const Grid& grid) : grid_(grid) {}

  Kind kind_ = Kind::Flat;
  Grid grid_;
  double scale_ = 1.0;
  std::vector<double> rates_;
  std::shared_ptr<const ConformalOperator1D> op_;
  std::shared_ptr<const KernelTable> table_;
};

// S(t) u0 at every requested time.
SpaceTimeField propagate_initial(const SpectralField& u0, const std::vector<double>& times,
                                 const Propagator& propagator);

}  // namespace bflab
