#include "bflab/rough_data.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace bflab {

namespace {

constexpr double kPi = std::numbers::pi;

// Coefficients c_k, k = 1..K, of the real profile sum c_k e^{ik theta} + conj.
std::vector<cplx> profile_coefficients(RoughKind kind, int K, std::uint64_t seed,
                                       const RoughOptions& o) {
  std::vector<cplx> c(K + 1, cplx(0.0));
  const cplx I(0.0, 1.0);
  switch (kind) {
    case RoughKind::Sawtooth:
      for (int k = 1; k <= K; ++k) c[k] = -I * ((k % 2 == 1) ? 1.0 : -1.0) / (kPi * k);
      break;
    case RoughKind::Triangle:
      for (int k = 1; k <= K; k += 2)
        c[k] = -I * (((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0) * 4.0 / (kPi * kPi * k * k);
      break;
    case RoughKind::Weierstrass: {
      double a = 1.0;
      for (int k = 1; k <= K; k *= 2) {
        c[k] = 0.5 * a;
        a *= o.weierstrass_a;
      }
      break;
    }
    case RoughKind::RandomC11: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      const int pieces = 8;
      std::vector<double> cuts;
      for (int i = 0; i < pieces; ++i) cuts.push_back(kTwoPi * u(rng));
      std::sort(cuts.begin(), cuts.end());
      for (int i = 0; i < pieces; ++i) {
        const double lo = cuts[i];
        const double hi = i + 1 < pieces ? cuts[i + 1] : cuts[0] + kTwoPi;
        const double level = 2.0 * u(rng) - 1.0;
        for (int k = 1; k <= K; ++k)
          c[k] += level * (std::exp(-I * (k * lo)) - std::exp(-I * (k * hi))) / (kTwoPi * I * double(k));
      }
      break;
    }
    case RoughKind::Smooth: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int k = 1; k <= std::min(K, 4); ++k)
        c[k] = std::polar(1.0 / (k * k), kTwoPi * u(rng)) * (0.5 + u(rng));
      break;
    }
  }
  return c;
}

int band_limit(const Grid& grid, const RoughOptions& o) {
  const int two_thirds = (grid.n() - 1) / 3;
  if (o.max_mode < 0) throw std::invalid_argument("rough data: max_mode must be >= 0");
  return o.max_mode == 0 ? two_thirds : std::min(o.max_mode, grid.n() / 2 - 1);
}

}  // namespace

RoughKind parse_rough_kind(const std::string& name) {
  if (name == "sawtooth") return RoughKind::Sawtooth;
  if (name == "triangle") return RoughKind::Triangle;
  if (name == "weierstrass") return RoughKind::Weierstrass;
  if (name == "random-c11") return RoughKind::RandomC11;
  if (name == "smooth") return RoughKind::Smooth;
  throw std::invalid_argument("unknown rough data kind '" + name +
                              "' (sawtooth, triangle, weierstrass, random-c11, smooth)");
}

std::string to_string(RoughKind kind) {
  switch (kind) {
    case RoughKind::Sawtooth: return "sawtooth";
    case RoughKind::Triangle: return "triangle";
    case RoughKind::Weierstrass: return "weierstrass";
    case RoughKind::RandomC11: return "random-c11";
    case RoughKind::Smooth: return "smooth";
  }
  return "unknown";
}

SpectralField rough_profile(const Grid& grid, RoughKind kind, const RoughOptions& options) {
  const int K = band_limit(grid, options);
  const int n = grid.n();
  const auto cx = profile_coefficients(kind, K, options.seed, options);
  std::vector<cplx> c(grid.spectral_size(), cplx(0.0));
  if (grid.dim() == 1) {
    for (int k = 1; k <= K; ++k) c[k] = cx[k];
    return SpectralField::from_coefficients(grid, std::move(c));
  }
  const std::size_t ny = std::size_t(n / 2 + 1);
  const bool random = kind == RoughKind::RandomC11 || kind == RoughKind::Smooth;
  auto cy = random ? profile_coefficients(kind, K, options.seed + 0x9e3779b97f4a7c15ULL, options)
                   : cx;
  for (int k = 1; k <= K; ++k) {
    // Deterministic kinds reuse the profile shifted by a quarter period in y.
    if (!random) cy[k] = cx[k] * std::polar(1.0, -0.5 * kPi * k);
    c[std::size_t(k) * ny] = cx[k];
    c[std::size_t(n - k) * ny] = std::conj(cx[k]);
    c[std::size_t(k)] = cy[k];
  }
  return SpectralField::from_coefficients(grid, std::move(c));
}

SpectralField inverse_ddbar(const SpectralField& q) {
  return apply_symbol(q, [](double kx, double ky) {
    const double k2 = kx * kx + ky * ky;
    return k2 == 0.0 ? cplx(0.0) : cplx(-4.0 / k2, 0.0);
  });
}

SpectralField rough_potential(const Grid& grid, RoughKind kind, double amplitude,
                              const RoughOptions& options) {
  const auto p = rough_profile(grid, kind, options);
  const double s = p.sup_norm();
  if (!(s > 0.0)) throw std::logic_error("rough_potential: degenerate profile");
  return inverse_ddbar((amplitude / s) * p);
}

}  // namespace bflab
