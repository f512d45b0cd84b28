#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bflab/errors.hpp"
#include "bflab/parametrix.hpp"
#include "bflab/quadrature.hpp"

namespace bflab {

TabulatedKernel::TabulatedKernel(std::vector<double> nodes, std::vector<Eigen::MatrixXd> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
  if (nodes_.size() != values_.size() || nodes_.empty())
    throw std::invalid_argument("TabulatedKernel: nodes and values must match and be nonempty");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > 0.0) || (i > 0 && !(nodes_[i] > nodes_[i - 1])))
      throw std::invalid_argument("TabulatedKernel: nodes must increase from > 0");
    log_nodes_.push_back(std::log(nodes_[i]));
  }
}

Eigen::MatrixXd TabulatedKernel::at(double t, std::size_t max_index) const {
  if (!(t >= 0.0)) throw std::invalid_argument("TabulatedKernel: t must be >= 0");
  max_index = std::min(max_index, nodes_.size() - 1);
  if (t > nodes_[max_index] * (1.0 + 1e-12))
    throw ResolutionError("TabulatedKernel: t beyond the last admissible node");
  if (t <= nodes_.front()) return (t / nodes_.front()) * values_.front();
  const int last = static_cast<int>(max_index);
  const int width = std::min(4, last + 1);
  const auto up = std::upper_bound(nodes_.begin(), nodes_.begin() + last + 1, t);
  // Interval [p, p+1] uses nodes p-1..p+2, clamped to [0, last].
  const int p = static_cast<int>(up - nodes_.begin()) - 1;
  const int s0 = std::clamp(p - 1, 0, last + 1 - width);
  const double lt = std::log(t);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(values_.front().rows(), values_.front().cols());
  for (int j = 0; j < width; ++j) {
    double l = 1.0;
    for (int m = 0; m < width; ++m)
      if (m != j)
        l *= (lt - log_nodes_[s0 + m]) / (log_nodes_[s0 + j] - log_nodes_[s0 + m]);
    out += l * values_[s0 + j];
  }
  return out;
}

std::vector<QuadNode> convolution_rule(double t, const ConvolutionOptions& options) {
  if (!(t > 0.0)) throw std::invalid_argument("convolution_rule: t must be > 0");
  if (options.panels_per_octave < 1) throw std::invalid_argument("convolution_rule: bad panels");
  const auto& gl = gauss_legendre(options.order);
  const double half = 0.5 * t;
  // Panels [sigma_{k+1}, sigma_k] with sigma shrinking by 2^{1/panels} until
  // (t/2) sigma^4 < min_time; the last panel reaches 0.
  std::vector<double> cuts{1.0};
  const double r = std::pow(2.0, -1.0 / options.panels_per_octave);
  while (half * std::pow(cuts.back(), 4) > options.min_time && cuts.size() < 400)
    cuts.push_back(cuts.back() * r);
  cuts.push_back(0.0);
  std::vector<QuadNode> out;
  out.reserve(2 * (cuts.size() - 1) * gl.nodes.size());
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double hi = cuts[c], lo = cuts[c + 1];
    const double mid = 0.5 * (hi + lo), rad = 0.5 * (hi - lo);
    for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
      const double sg = mid + rad * gl.nodes[g];
      const double tau = half * std::pow(sg, 4);
      // ds = 2 t sigma^3 d sigma.
      const double w = rad * gl.weights[g] * 2.0 * t * sg * sg * sg;
      out.push_back({tau, t - tau, w});
      out.push_back({t - tau, tau, w});
    }
  }
  return out;
}

Eigen::MatrixXd spacetime_convolve(const KernelFn& a, const KernelFn& b, const Eigen::VectorXd& dv,
                                   double t, const ConvolutionOptions& options) {
  Eigen::MatrixXd acc;
  for (const auto& q : convolution_rule(t, options)) {
    const Eigen::MatrixXd term = a(q.complement) * dv.asDiagonal() * b(q.s);
    if (acc.size() == 0) acc = Eigen::MatrixXd::Zero(term.rows(), term.cols());
    acc += q.weight * term;
  }
  if (!acc.allFinite())
    throw NumericalFailure("spacetime_convolve: non-finite result; refine the time quadrature");
  return acc;
}

}  // namespace bflab
