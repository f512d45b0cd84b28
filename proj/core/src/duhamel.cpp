#include "bflab/duhamel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bflab/errors.hpp"
#include "bflab/quadrature.hpp"

namespace bflab {

namespace {

// exp(-x) underflows to zero beyond this.
constexpr double kExpCut = 700.0;

}  // namespace

DuhamelQuadrature::DuhamelQuadrature(std::vector<double> node_times) : nodes_(std::move(node_times)) {
  if (nodes_.size() < 2) throw InsufficientData("DuhamelQuadrature: need at least two nodes");
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    if (!(nodes_[j] > 0.0) || (j > 0 && !(nodes_[j] > nodes_[j - 1])))
      throw std::invalid_argument("DuhamelQuadrature: node times must increase from > 0");
    sigma_.push_back(std::sqrt(nodes_[j]));
  }
}

std::vector<double> DuhamelQuadrature::weights_at(double t, double lambda) const {
  if (!(t > 0.0) || t > nodes_.back() * (1.0 + 1e-14))
    throw std::invalid_argument("DuhamelQuadrature: target outside (0, last node]");
  if (!(lambda >= 0.0)) throw std::invalid_argument("DuhamelQuadrature: lambda must be >= 0");
  const int n = static_cast<int>(nodes_.size());
  const int width = std::min(4, n);
  const double st = std::sqrt(t);
  const auto& rule = gauss_legendre(24);
  std::vector<double> w(n, 0.0);

  for (int p = -1; p + 1 < n; ++p) {
    const double a = p < 0 ? 0.0 : sigma_[p];
    const double b = std::min(sigma_[p + 1], st);
    if (!(b > a)) break;
    if (lambda * (t - b * b) > kExpCut) continue;
    const int s0 = std::clamp(p - 1, 0, n - width);
    // Subpanel breaks where lambda (t - sigma^2) doubles, graded toward the right end.
    std::vector<double> cuts{b};
    if (lambda > 0.0) {
      const double tau_r = t - b * b;
      const double tau_l = t - a * a;
      for (double c = 0.5; c < kExpCut; c *= 2.0) {
        const double tau = tau_r + c / lambda;
        if (tau >= tau_l) break;
        cuts.push_back(std::sqrt(t - tau));
      }
    }
    cuts.push_back(a);
    for (std::size_t q = 0; q + 1 < cuts.size(); ++q) {
      const double hi = cuts[q], lo = cuts[q + 1];
      if (lambda * (t - hi * hi) > kExpCut) break;
      const double mid = 0.5 * (hi + lo), half = 0.5 * (hi - lo);
      for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
        const double s = mid + half * rule.nodes[g];
        const double e = 2.0 * half * rule.weights[g] * std::exp(-lambda * (t - s * s));
        for (int j = 0; j < width; ++j) {
          double l = 1.0;
          for (int m = 0; m < width; ++m)
            if (m != j) l *= (s - sigma_[s0 + m]) / (sigma_[s0 + j] - sigma_[s0 + m]);
          w[s0 + j] += e * l;
        }
      }
    }
  }
  // The interpolated quantity is s^{1/2} f(s); fold the node factor in.
  for (int j = 0; j < n; ++j) w[j] *= sigma_[j];
  return w;
}

const std::vector<std::vector<double>>& DuhamelQuadrature::node_weights(double lambda) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(lambda);
    if (it != cache_.end()) return it->second;
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(nodes_.size());
  for (double t : nodes_) rows.push_back(weights_at(t, lambda));
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.emplace(lambda, std::move(rows)).first->second;
}

namespace {

std::vector<std::vector<cplx>> modal_slices(const SpaceTimeField& f, const Propagator& prop) {
  if (!prop.has_modes())
    throw std::invalid_argument("volume_potential: propagator needs a modal backend");
  if (f.grid() != prop.grid()) throw std::invalid_argument("volume_potential: grid mismatch");
  std::vector<std::vector<cplx>> m;
  m.reserve(f.size());
  for (const auto& s : f.slices()) m.push_back(prop.to_modes(s));
  return m;
}

}  // namespace

SpaceTimeField volume_potential(const SpaceTimeField& f, const Propagator& propagator) {
  DuhamelQuadrature q(f.times());
  return volume_potential(f, propagator, q);
}

SpaceTimeField volume_potential(const SpaceTimeField& f, const Propagator& propagator,
                                const DuhamelQuadrature& quadrature) {
  if (quadrature.node_times() != f.times())
    throw std::invalid_argument("volume_potential: quadrature nodes differ from slice times");
  const auto m = modal_slices(f, propagator);
  const auto& rates = propagator.rates();
  const std::size_t nt = f.size();
  std::vector<std::vector<cplx>> out(nt, std::vector<cplx>(rates.size()));
  for (std::size_t k = 0; k < rates.size(); ++k) {
    const auto& w = quadrature.node_weights(rates[k]);
    for (std::size_t i = 0; i < nt; ++i) {
      cplx acc(0.0, 0.0);
      for (std::size_t j = 0; j < nt; ++j) acc += w[i][j] * m[j][k];
      out[i][k] = acc;
    }
  }
  std::vector<SpectralField> slices;
  slices.reserve(nt);
  for (const auto& o : out) slices.push_back(propagator.from_modes(o));
  return SpaceTimeField(f.times(), std::move(slices));
}

SpaceTimeField volume_potential_at(const SpaceTimeField& f, const Propagator& propagator,
                                   const std::vector<double>& targets) {
  DuhamelQuadrature q(f.times());
  const auto m = modal_slices(f, propagator);
  const auto& rates = propagator.rates();
  std::vector<std::vector<cplx>> out(targets.size(), std::vector<cplx>(rates.size()));
  std::map<double, std::vector<std::vector<double>>> local;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    auto it = local.find(rates[k]);
    if (it == local.end()) {
      std::vector<std::vector<double>> rows;
      for (double t : targets) rows.push_back(q.weights_at(t, rates[k]));
      it = local.emplace(rates[k], std::move(rows)).first;
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
      cplx acc(0.0, 0.0);
      for (std::size_t j = 0; j < f.size(); ++j) acc += it->second[i][j] * m[j][k];
      out[i][k] = acc;
    }
  }
  std::vector<SpectralField> slices;
  for (const auto& o : out) slices.push_back(propagator.from_modes(o));
  return SpaceTimeField(targets, std::move(slices));
}

std::vector<ResidualRow> duhamel_residual(const SpaceTimeField& f, const Propagator& propagator,
                                          double t_min) {
  const auto& t = f.times();
  std::vector<double> targets;
  std::vector<std::size_t> nodes;
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    if (t[i] < t_min) continue;
    const double h = 0.25 * std::min(t[i] - t[i - 1], t[i + 1] - t[i]);
    for (double c : {-2.0, -1.0, 0.0, 1.0, 2.0}) targets.push_back(t[i] + c * h);
    nodes.push_back(i);
  }
  std::vector<ResidualRow> rows;
  if (nodes.empty()) return rows;
  const auto v = volume_potential_at(f, propagator, targets);
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    const std::size_t i = nodes[r];
    const double h = 0.25 * std::min(t[i] - t[i - 1], t[i + 1] - t[i]);
    const auto& vm2 = v.slice(5 * r), &vm1 = v.slice(5 * r + 1), &v0 = v.slice(5 * r + 2),
                &vp1 = v.slice(5 * r + 3), &vp2 = v.slice(5 * r + 4);
    const auto dt = (1.0 / (12.0 * h)) * (vm2 - vp2 + 8.0 * (vp1 - vm1));
    const auto lv = propagator.generator(v0);
    const auto res = dt + lv - propagator.project(f.slice(i));
    rows.push_back({t[i], res.sup_norm(), lv.sup_norm()});
  }
  return rows;
}

SchauderRatioRecord schauder_ratio(const MetricSpec& metric, const SpaceTimeField& f, double T,
                                   double alpha, const NormOptions& options) {
  const auto prop = Propagator::for_metric(metric, f.grid());
  const auto v = volume_potential(f, prop);
  NormOptions o = options;
  o.metric = metric;
  SchauderRatioRecord r;
  r.metric = metric;
  r.T = T;
  r.alpha = alpha;
  r.y_report = y_norm(f, alpha, T, o);
  r.x_report = x_norm(v, alpha, T, o);
  r.y_norm = r.y_report.total;
  r.x_norm = r.x_report.total;
  if (!(r.y_norm > 0.0)) throw std::invalid_argument("schauder_ratio: f must be nonzero");
  r.ratio = r.x_norm / r.y_norm;
  return r;
}

}  // namespace bflab
