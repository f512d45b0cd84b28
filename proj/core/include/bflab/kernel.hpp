#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bflab/csv.hpp"
#include "bflab/spectral.hpp"

namespace bflab {

// Conformal perturbation of the flat metric: g = (1 + eps * profile) * flat.
struct MetricSpec {
  enum class Kind { Flat, Conformal };
  Kind kind = Kind::Flat;
  double epsilon = 0.0;
  int dim = 1;
  // Perturbation shape as a function of the coordinates; cos(x) if empty.
  std::function<double(double, double)> profile;

  static MetricSpec flat(int dim = 1);
  static MetricSpec conformal(double epsilon, int dim = 1,
                              std::function<double(double, double)> profile = {});

  bool is_flat() const { return kind == Kind::Flat || epsilon == 0.0; }
  // Conformal factor 1 + eps * profile on the grid; throws unless min > 0.
  SpectralField conformal_factor(const Grid& grid) const;
};

struct KernelProfile {
  int dim = 1;
  int deriv_order = 0;
  double t = 1.0;
  std::vector<double> radii;
  std::vector<double> values;

  CsvTable to_csv() const;
};

// D^k b_0(x; t) on the real line, any sign of x. Contour-shifted quadrature.
double euclidean_kernel_1d(int k, double x, double t);
// Components d_x^j d_y^(k-j) b_0 at the point (r, 0) of the plane, j = 0..k.
std::vector<double> euclidean_kernel_2d_components(int k, double r, double t);

// k = 0 returns signed values; in 2-D, k >= 1 returns the tensor norm |D^k b_0|.
KernelProfile euclidean_kernel_profile(int dim, int k, double t, std::vector<double> radii);

enum class KernelConstruction { Spectral, Parametrix, MatrixExponential };
std::string to_string(KernelConstruction c);

// Sampled two-point kernel b(x_i, y_j; t_m). Flat kernels are stored by
// offset (translation invariance); others as dense matrices (1-D only).
class KernelTable {
 public:
  static KernelTable circulant(const Grid& grid, std::vector<double> times,
                               std::vector<SpectralField> offsets, bool flat_operator);
  static KernelTable dense(const Grid& grid, std::vector<double> times,
                           std::vector<Eigen::MatrixXd> matrices, Eigen::VectorXd volume_weights,
                           KernelConstruction construction, bool flat_operator);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& times() const { return times_; }
  KernelConstruction construction() const { return construction_; }
  bool flat_operator() const { return flat_operator_; }
  bool is_circulant() const { return !offsets_.empty(); }

  double value(std::size_t ti, std::size_t i, std::size_t j) const;
  // Dense n x n matrix for time index ti (1-D only).
  Eigen::MatrixXd matrix(std::size_t ti) const;
  const SpectralField& offsets(std::size_t ti) const { return offsets_.at(ti); }
  // dV at each node.
  const Eigen::VectorXd& volume_weights() const { return weights_; }
  // Index of t in times(), or nullopt.
  std::optional<std::size_t> time_index(double t) const;

  double row_mass(std::size_t ti, std::size_t i) const;
  double max_mass_error() const;
  double max_asymmetry() const;

  CsvTable to_csv() const;

 private:
  KernelTable(const Grid& grid) : grid_(grid) {}

  Grid grid_;
  std::vector<double> times_;
  std::vector<SpectralField> offsets_;
  std::vector<Eigen::MatrixXd> matrices_;
  Eigen::VectorXd weights_;
  KernelConstruction construction_ = KernelConstruction::Spectral;
  bool flat_operator_ = true;
};

// Fourier series kernel of d_t + Delta^2 on the flat torus. Throws
// ResolutionError when the first dropped mode exceeds 1e-12.
KernelTable flat_torus_kernel(const Grid& grid, const std::vector<double>& times);
// Smallest time the grid resolves to the 1e-12 truncation bound.
double flat_torus_min_time(const Grid& grid);

// Discrete Delta_g^2 on a 1-D conformal grid metric, with its spectral
// decomposition. The spurious null mode at the Nyquist frequency is removed.
class ConformalOperator1D {
 public:
  ConformalOperator1D(const MetricSpec& metric, const Grid& grid);

  const Grid& grid() const { return grid_; }
  // Arclength density w = sqrt(g_11).
  const Eigen::VectorXd& density() const { return w_; }
  const Eigen::VectorXd& volume_weights() const { return dv_; }
  const Eigen::MatrixXd& first_derivative() const { return d_; }
  Eigen::MatrixXd laplacian() const;
  const Eigen::MatrixXd& bilaplacian() const { return l_; }

  // Orthonormal modes of the symmetrized operator and their rates mu >= 0;
  // u(t) = W^{-1/2} Q diag(exp(-t mu)) Q^T W^{1/2} u(0).
  const Eigen::MatrixXd& modes() const { return q_; }
  const Eigen::VectorXd& rates() const { return mu_; }

  // exp(-tL) restricted away from the spurious null mode (acts on samples).
  Eigen::MatrixXd semigroup(double t) const;
  // Kernel b_ij with (S u)_i = sum_j b_ij u_j dV_j.
  Eigen::MatrixXd kernel(double t) const;
  // dV-orthogonal projector onto the spurious null mode.
  const Eigen::MatrixXd& null_projector() const { return pi_; }

 private:
  Grid grid_;
  Eigen::VectorXd w_, dv_;
  Eigen::MatrixXd d_, l_, q_, pi_;
  Eigen::VectorXd mu_;
};

KernelTable reference_kernel(const MetricSpec& metric, const Grid& grid,
                             const std::vector<double>& times);

struct NuOptions {
  double radius = 40.0;
  int scan_points = 4000;
  double abs_tol = 1e-12;
};
// nu_k = int |D^k b_0(0, y; 1)| dy.
double nu_constant(int dim, int k, const NuOptions& options = {});

struct DecayFit {
  double C = 0.0;
  double delta = 0.0;
  double exponent = 0.0;
  double rms = 0.0;
  std::size_t points = 0;
};
struct DecayFitOptions {
  // Window starts at this multiple of t^{1/4}.
  double window_start = 4.0;
  double floor = 1e-280;
};
// Fits log|b| ~ log C - delta * rho^p over the tail peaks.
DecayFit decay_fit(const KernelProfile& profile, const DecayFitOptions& options = {});

struct RescalingRow {
  double t;
  double value;
  double nu;
  double relative_gap;
};
struct RescalingResult {
  std::vector<RescalingRow> rows;
  std::vector<double> dropped_times;
  std::string warning;
};
// I_k(t) = int t^{k/4} |nabla^k b_g(x, .; t)| dV along the sequence.
RescalingResult rescaling_convergence(const MetricSpec& metric, const Grid& grid, int k,
                                      const std::vector<double>& t_sequence,
                                      std::size_t x_index = 0);

}  // namespace bflab
