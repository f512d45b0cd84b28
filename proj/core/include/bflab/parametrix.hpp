#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bflab/csv.hpp"
#include "bflab/kernel.hpp"
#include "bflab/spectral.hpp"

namespace bflab {

// Kernel-valued function of time: M(t)(i, j) = A(x_i, y_j; t).
using KernelFn = std::function<Eigen::MatrixXd(double)>;

// Charts on the periodic interval: equal arcs centred at nu * L / n_charts.
// phi_nu = chi_nu / sum chi with chi_nu a mollifier bump on B_{r0/2};
// psi_nu = 1 on B_{3 r0/4} and vanishes outside B_{7 r0/8}.
struct ChartCover {
  int n_charts = 0;
  double r0 = 0.0;
  std::vector<double> centers;
  std::vector<SpectralField> phi;
  std::vector<SpectralField> psi;
  double partition_error = 0.0;
};
// Throws std::logic_error when the partition does not sum to 1 within 1e-12.
ChartCover make_cover(const Grid& grid, int n_charts);

// G(x; t; xi) for d_t + a(xi) d_x^4, a(xi) = g^{11}(xi)^2.
class FrozenKernelFamily {
 public:
  FrozenKernelFamily(const MetricSpec& metric, const Grid& grid);

  const Grid& grid() const { return grid_; }
  double coefficient_at(double xi) const;
  const Eigen::VectorXd& coefficients() const { return a_; }
  // Periodic grid kernel (1/L) sum_k exp(-a k^4 t) e^{ikd}, Nyquist included,
  // and its x-derivatives of order p, for offsets d = m h, m = 0..n-1.
  Eigen::VectorXd periodic(double a, double t, int p = 0) const;
  // Column j holds periodic(a_j, t, p) with a_j the grid coefficient.
  Eigen::MatrixXd periodic_columns(double t, int p = 0) const;

 private:
  Eigen::MatrixXd amplitudes(const Eigen::VectorXd& a, double t, int p) const;
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& amp, int p) const;

  MetricSpec metric_;
  Grid grid_;
  Eigen::VectorXd a_;
  // cos(k_m x_i) and sin(k_m x_i), m = 0..n/2.
  Eigen::MatrixXd cos_, sin_;
};

// Continuum frozen kernel (a t)^{-1/4} B((a t)^{-1/4} x), B = b_0(.; 1).
double frozen_kernel(const FrozenKernelFamily& family, double x, double t, double xi);

struct DefectGroups {
  // Coefficient-freezing difference psi (A(x)^2 - A(y)^2) d^4 G.
  Eigen::MatrixXd freezing;
  // Lower-order terms of Delta_g^2 applied to G.
  Eigen::MatrixXd lower_order;
  // Everything else: cutoff derivatives, discretization, null-mode projection.
  Eigen::MatrixXd remainder;
  Eigen::MatrixXd total;
};

// Global parametrix Z = (I - Pi) sum_nu psi_nu(x) G(x - y; t; y) phi_nu(y) g(y)^{-1/2}
// and its defect K = -(d_t + L) Z, both evaluated exactly at any t > 0.
class Parametrix {
 public:
  Parametrix(const MetricSpec& metric, const Grid& grid, int n_charts);

  const Grid& grid() const { return grid_; }
  const MetricSpec& metric() const { return metric_; }
  const ChartCover& cover() const { return cover_; }
  const FrozenKernelFamily& family() const { return family_; }
  const ConformalOperator1D& op() const { return *op_; }
  const Eigen::VectorXd& volume_weights() const { return op_->volume_weights(); }

  Eigen::MatrixXd z(double t) const;
  Eigen::MatrixXd z_unprojected(double t) const;
  // d_x^4 Z.
  Eigen::MatrixXd z_fourth_derivative(double t) const;
  Eigen::MatrixXd defect(double t) const;
  DefectGroups defect_groups(double t) const;

 private:
  Eigen::MatrixXd assemble(double t, int p, bool time_derivative) const;
  // (I - Pi) M with Pi = v u^T.
  void project_out(Eigen::MatrixXd& m) const;

  MetricSpec metric_;
  Grid grid_;
  ChartCover cover_;
  FrozenKernelFamily family_;
  std::shared_ptr<const ConformalOperator1D> op_;
  Eigen::MatrixXd chi_;
  Eigen::VectorXd null_v_, null_u_;
};

struct ParametrixTable {
  std::shared_ptr<const Parametrix> parametrix;
  KernelTable z;
};
ParametrixTable build_parametrix(const MetricSpec& metric, const Grid& grid,
                                 const std::vector<double>& times, int n_charts);

struct DefectTable {
  std::vector<double> times;
  std::vector<DefectGroups> groups;
  // sup_{x,y} |K|, sup_{x,y} |d^4 Z| and sup_x |int K(x, .) dV| per time.
  std::vector<double> sup_norm;
  std::vector<double> z4_sup_norm;
  std::vector<double> row_integral;
};
DefectTable defect(const ParametrixTable& parametrix, const std::vector<double>& times);

// Kernel sampled on geometric nodes; cubic Lagrange in log t between nodes,
// linear to zero below the first node.
class TabulatedKernel {
 public:
  TabulatedKernel(std::vector<double> nodes, std::vector<Eigen::MatrixXd> values);

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<Eigen::MatrixXd>& values() const { return values_; }
  // Interpolant using only nodes with index <= max_index.
  Eigen::MatrixXd at(double t, std::size_t max_index) const;
  Eigen::MatrixXd at(double t) const { return at(t, nodes_.size() - 1); }
  // Replaces the value at node i (used while marching; nodes above i stay unread).
  void set(std::size_t i, Eigen::MatrixXd value) { values_.at(i) = std::move(value); }

 private:
  std::vector<double> nodes_;
  std::vector<double> log_nodes_;
  std::vector<Eigen::MatrixXd> values_;
};

struct ConvolutionOptions {
  // Gauss-Legendre order per panel.
  int order = 16;
  // Panels in sigma are refined until (t/2) sigma^4 falls below this.
  double min_time = 1e-12;
  // Panels per dyadic sigma octave.
  int panels_per_octave = 1;
};

struct QuadNode {
  double s;
  // t - s, computed without cancellation.
  double complement;
  double weight;
};
// Nodes for int_0^t F(s) ds: split at t/2, s = (t/2) sigma^4 near 0 and
// t - s = (t/2) sigma^4 near t, dyadic sigma panels.
std::vector<QuadNode> convolution_rule(double t, const ConvolutionOptions& options = {});

// (A * B)(t) = int_0^t A(t - s) W B(s) ds, W = diag(dv).
Eigen::MatrixXd spacetime_convolve(const KernelFn& a, const KernelFn& b, const Eigen::VectorXd& dv,
                                   double t, const ConvolutionOptions& options = {});

struct NeumannOptions {
  // Relative to int_0^T sup|K| dt; applies to the stopping rule and the residual.
  double tolerance = 1e-6;
  int max_iterates = 20;
  // Iterates must be decreasing by this m or the series is declared divergent.
  int divergence_check = 12;
  // First node as a multiple of h^4, and node ratio.
  double node_floor = 1e-3;
  double node_ratio = 1.122462048309373;
  // Sup norms are taken over node times >= window_factor * h^4.
  double window_factor = 4.0;
  ConvolutionOptions convolution;
};

struct NeumannIterate {
  int m;
  double sup_norm;
  double integrated;
  double fit_exponent;
};

struct NeumannSeries {
  std::shared_ptr<const Parametrix> parametrix;
  std::vector<double> nodes;
  // K_m for m >= 2 at the nodes (K_1 = K is evaluated exactly).
  std::vector<TabulatedKernel> iterates;
  // Psi - K = sum_{m >= 2} K_m.
  std::shared_ptr<const TabulatedKernel> tail;
  // All marched iterates m = 1..max_iterates; Psi sums m <= used.
  std::vector<NeumannIterate> record;
  int used = 0;
  bool converged = false;
  // int_0^T sup|K| dt, the scale of the relative tolerance.
  double scale = 0.0;
  // int sup|Psi - K - K * Psi| dt / scale, sampled at nodes and at node midpoints.
  double residual_nodes = 0.0;
  double residual_midpoints = 0.0;
  double tolerance = 0.0;

  Eigen::MatrixXd psi(double t) const;
  CsvTable to_csv() const;
};

// Iterates K_m = K * K_{m-1} marching in t, all m at each node. Stops summing at
// the first m with int sup|K_m| dt < tolerance * scale.
NeumannSeries neumann_series(const ParametrixTable& parametrix, double T,
                             const NeumannOptions& options = {});

struct AssemblyRow {
  double t;
  double row_l1_error;
  double mass_error;
  double pde_residual;
  double asymmetry;
};

struct AssembledKernel {
  KernelTable table;
  std::vector<AssemblyRow> validation;
  CsvTable validation_csv() const;
};

// b = Z + Z * Psi at the requested times, validated against the dense oracle.
AssembledKernel assemble_kernel(const ParametrixTable& parametrix, const NeumannSeries& series,
                                const std::vector<double>& times,
                                const ConvolutionOptions& options = {});
// b at one time.
Eigen::MatrixXd assembled_kernel_at(const Parametrix& parametrix, const NeumannSeries& series,
                                    double t, const ConvolutionOptions& options = {});

// Relative row-L^1 distance max_i sum_j |A_ij - B_ij| dv_j / sum_j |B_ij| dv_j.
double row_l1_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::VectorXd& dv);

}  // namespace bflab
