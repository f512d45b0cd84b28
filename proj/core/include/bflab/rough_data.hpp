#pragma once

#include <cstdint>
#include <string>

#include "bflab/spectral.hpp"

namespace bflab {

// Regularity classes of d dbar u0 = Delta u0 / 4.
enum class RoughKind {
  Sawtooth,     // bounded, discontinuous
  Triangle,     // Lipschitz continuous
  Weierstrass,  // Hölder continuous, nowhere smooth
  RandomC11,    // random piecewise constant: u0 in C^{1,1}
  Smooth,       // random trigonometric polynomial of low degree
};

RoughKind parse_rough_kind(const std::string& name);
std::string to_string(RoughKind kind);

struct RoughOptions {
  // Modes with |m| above this are dropped (0 selects the 2/3 band).
  int max_mode = 0;
  std::uint64_t seed = 7;
  // Weierstrass ratio a in sum a^j cos(b^j x), with b = 2.
  double weierstrass_a = 0.6;
};

// Profile p(x) of d dbar u0 along one axis, band-limited to the grid.
SpectralField rough_profile(const Grid& grid, RoughKind kind, const RoughOptions& options = {});

// Mean-zero potential u0 with d dbar u0 = amplitude * q / sup|q| on the grid,
// q = p(x) in 1-D and p(x) + p'(y) in 2-D (p' an independent draw or a shift).
SpectralField rough_potential(const Grid& grid, RoughKind kind, double amplitude,
                              const RoughOptions& options = {});

// Mean-zero v with Delta v / 4 = q - mean(q).
SpectralField inverse_ddbar(const SpectralField& q);

}  // namespace bflab
