#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "bflab/spectral.hpp"

namespace bflab {

namespace {

struct Offset {
  int dx;
  int dy;
  double dist;
};

// Offsets with 0 < |d| <= cap, one representative per +/- pair.
std::vector<Offset> offsets_within_cap(const Grid& g, double cap) {
  const double h = g.spacing();
  const int r = static_cast<int>(std::floor(cap / h + 1e-9));
  std::vector<Offset> out;
  if (g.dim() == 1) {
    for (int d = 1; d <= r; ++d) out.push_back({d, 0, d * h});
    return out;
  }
  for (int dx = -r; dx <= r; ++dx) {
    for (int dy = 0; dy <= r; ++dy) {
      if (dy == 0 && dx <= 0) continue;
      const double dist = h * std::sqrt(double(dx) * dx + double(dy) * dy);
      if (dist <= cap * (1.0 + 1e-12)) out.push_back({dx, dy, dist});
    }
  }
  return out;
}

template <typename DiffNorm>
double scan_pairs(const Grid& g, double alpha, const HolderPolicy& policy, DiffNorm&& diff) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("holder_seminorm: alpha must lie in (0,1)");
  const int n = g.n();
  const double cap = policy.cap_fraction * g.period();
  const auto offsets = offsets_within_cap(g, cap);
  if (offsets.empty()) return 0.0;
  auto index = [n, &g](int i, int j) {
    return g.dim() == 1 ? std::size_t(i) : std::size_t(i) * n + std::size_t(j);
  };
  double best = 0.0;
  if (n <= policy.exhaustive_max_points) {
    const int ny = g.dim() == 1 ? 1 : n;
    for (const auto& off : offsets) {
      double m = 0.0;
      for (int i = 0; i < n; ++i) {
        const int i2 = ((i + off.dx) % n + n) % n;
        for (int j = 0; j < ny; ++j) {
          const int j2 = g.dim() == 1 ? 0 : (j + off.dy) % n;
          m = std::max(m, diff(index(i, j), index(i2, j2)));
        }
      }
      best = std::max(best, m / std::pow(off.dist, alpha));
    }
    return best;
  }
  std::mt19937_64 rng(policy.seed);
  std::uniform_int_distribution<int> point(0, n - 1);
  std::uniform_int_distribution<std::size_t> pick(0, offsets.size() - 1);
  for (std::size_t s = 0; s < policy.sampled_pairs; ++s) {
    const int i = point(rng);
    const int j = g.dim() == 1 ? 0 : point(rng);
    const auto& off = offsets[pick(rng)];
    const int i2 = ((i + off.dx) % n + n) % n;
    const int j2 = g.dim() == 1 ? 0 : (j + off.dy) % n;
    best = std::max(best, diff(index(i, j), index(i2, j2)) / std::pow(off.dist, alpha));
  }
  return best;
}

}  // namespace

double holder_seminorm(const SpectralField& field, double alpha, const HolderPolicy& policy) {
  const auto& s = field.samples();
  return scan_pairs(field.grid(), alpha, policy,
                    [&s](std::size_t a, std::size_t b) { return std::abs(s[a] - s[b]); });
}

double holder_seminorm(const TensorComponents& tensor, double alpha, const HolderPolicy& policy) {
  if (tensor.components.empty()) return 0.0;
  if (tensor.components.size() == 1 && tensor.weights[0] == 1.0)
    return holder_seminorm(tensor.components[0], alpha, policy);
  std::vector<const std::vector<double>*> comps;
  for (const auto& c : tensor.components) comps.push_back(&c.samples());
  const auto& w = tensor.weights;
  return scan_pairs(tensor.components[0].grid(), alpha, policy,
                    [&comps, &w](std::size_t a, std::size_t b) {
                      double acc = 0.0;
                      for (std::size_t c = 0; c < comps.size(); ++c) {
                        const double d = (*comps[c])[a] - (*comps[c])[b];
                        acc += w[c] * d * d;
                      }
                      return std::sqrt(acc);
                    });
}

}  // namespace bflab
