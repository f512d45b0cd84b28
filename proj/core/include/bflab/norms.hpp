#pragma once

#include <string>
#include <vector>

#include "bflab/csv.hpp"
#include "bflab/kernel.hpp"
#include "bflab/spectral.hpp"

namespace bflab {

struct NormTerm {
  std::string name;
  double value;
};

// Weighted norm split into its sup'd terms; total is their sum.
struct NormReport {
  std::string space;
  double alpha = 0.5;
  double T = 0.0;
  std::vector<NormTerm> terms;
  double total = 0.0;
  std::string pair_policy;
  int grid_dim = 1;
  int grid_points = 0;
  std::vector<double> time_grid;

  double term(const std::string& name) const;
  std::string to_json() const;
};

struct NormOptions {
  // Time-Hölder quotients use pairs (t_j, t_j') with 1 <= j' - j <= max_pair_gap.
  int max_pair_gap = 3;
  HolderPolicy holder;
  // Non-flat metrics are supported in 1-D only (arclength derivatives).
  MetricSpec metric;
};

// Covariant derivative tensor of order k. Flat: derivative_tensor. 1-D
// conformal: ((1/w) d/dx)^k with w the arclength density.
TensorComponents covariant_derivative(const SpectralField& field, int k, const MetricSpec& metric);

// Nonuniform three-point derivative in time at every slice (one-sided at the ends).
std::vector<SpectralField> time_derivative(const SpaceTimeField& u);

NormReport y_norm(const SpaceTimeField& f, double alpha, double T, const NormOptions& options = {});
NormReport x_norm(const SpaceTimeField& u, double alpha, double T, const NormOptions& options = {});
// X_T plus the four lower-order time-Hölder terms of the equivalent norm.
NormReport x_norm_extended(const SpaceTimeField& u, double alpha, double T,
                           const NormOptions& options = {});

struct SmoothingRow {
  double t;
  int k;
  int l;
  double weighted;
  double raw;
};

struct SmoothingProfile {
  std::vector<SmoothingRow> rows;

  // Rows for one (k, l) in ascending t.
  std::vector<SmoothingRow> series(int k, int l) const;
  CsvTable to_csv() const;
};

struct SmoothingOptions {
  int k_max = 3;
  int l_max = 1;
  // Profile d dbar u = Delta u / 4 when true, u itself otherwise.
  bool apply_ddbar = true;
  MetricSpec metric;
};

SmoothingProfile smoothing_profile(const SpaceTimeField& u, const SmoothingOptions& options = {});

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};
// Least-squares slope of log y against log x; nonpositive y are skipped.
SlopeFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
// Slope of log raw value against log t for one (k, l) over [t_lo, t_hi].
SlopeFit smoothing_slope(const SmoothingProfile& profile, int k, int l, double t_lo, double t_hi);

}  // namespace bflab
