#pragma once

#include <map>
#include <mutex>
#include <vector>

#include "bflab/kernel.hpp"
#include "bflab/norms.hpp"
#include "bflab/propagator.hpp"

namespace bflab {

// Weights for V(t) = int_0^t exp(-lambda (t - s)) f(s) ds when s^{1/2} f(s)
// is interpolated by piecewise cubic Lagrange polynomials in sigma = s^{1/2}
// through the node times. The first stencil is extrapolated down to s = 0,
// which makes f = c, c s^{-1/2} and c s exact.
class DuhamelQuadrature {
 public:
  explicit DuhamelQuadrature(std::vector<double> node_times);

  const std::vector<double>& node_times() const { return nodes_; }
  // Row i: weights on the node values for the target t = node_times()[i]. Cached per lambda.
  const std::vector<std::vector<double>>& node_weights(double lambda) const;
  // Weights for an arbitrary target in (0, last node].
  std::vector<double> weights_at(double t, double lambda) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> sigma_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::vector<std::vector<double>>> cache_;
};

// V[f](t) = int_0^t S(t - s) f(s) ds at the slice times of f, or at targets.
SpaceTimeField volume_potential(const SpaceTimeField& f, const Propagator& propagator);
SpaceTimeField volume_potential(const SpaceTimeField& f, const Propagator& propagator,
                                const DuhamelQuadrature& quadrature);
SpaceTimeField volume_potential_at(const SpaceTimeField& f, const Propagator& propagator,
                                   const std::vector<double>& targets);

struct ResidualRow {
  double t;
  double residual;
  double scale;
};
// |(d_t + L) V - P f|_0 / |L V|_0 at interior node times t >= t_min, with
// d_t by a four-point centered difference of V evaluated off-grid.
std::vector<ResidualRow> duhamel_residual(const SpaceTimeField& f, const Propagator& propagator,
                                          double t_min);

struct SchauderRatioRecord {
  MetricSpec metric;
  double T = 0.0;
  double alpha = 0.5;
  double x_norm = 0.0;
  double y_norm = 0.0;
  double ratio = 0.0;
  NormReport x_report;
  NormReport y_report;
};

// Norm quotient |V[f]|_{X_T} / |f|_{Y_T}; f lives on times in (0, T].
SchauderRatioRecord schauder_ratio(const MetricSpec& metric, const SpaceTimeField& f, double T,
                                   double alpha, const NormOptions& options = {});

}  // namespace bflab
