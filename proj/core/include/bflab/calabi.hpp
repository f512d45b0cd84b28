#pragma once

#include <string>
#include <vector>

#include "bflab/csv.hpp"
#include "bflab/kernel.hpp"
#include "bflab/norms.hpp"
#include "bflab/spectral.hpp"

namespace bflab {

// Complex dimension 1 on the real 2-torus, z = x + iy, d dbar = (d_x^2 + d_y^2) / 4.
// The background Kahler metric has density g0 (1 when flat); the Kahler
// Laplacian is Delta_g = g0^{-1} d dbar, so the flat linear flow is d_t + Delta^2 / 16.

// d dbar f.
SpectralField ddbar(const SpectralField& f);
// Delta_g f and Delta_g^2 f for background density g0.
SpectralField kahler_laplacian(const SpectralField& f, const SpectralField& g0);
SpectralField kahler_bilaplacian(const SpectralField& f, const SpectralField& g0);

// Real mean-zero potential phi over a background metric; h = g0 + phi_{z zbar}.
class KahlerPotential {
 public:
  explicit KahlerPotential(const SpectralField& phi, const MetricSpec& background = MetricSpec::flat(2));

  const SpectralField& phi() const { return phi_; }
  const MetricSpec& background() const { return background_; }
  const Grid& grid() const { return phi_.grid(); }
  const SpectralField& background_density() const { return g0_; }
  const SpectralField& density() const { return h_; }
  // Total volume int h dA.
  double volume() const { return h_.integral(); }

 private:
  SpectralField phi_;
  MetricSpec background_;
  SpectralField g0_;
  SpectralField h_;
};

struct DeltaBand {
  bool pass = false;
  double delta = 0.0;
  // Extremes of h / g0 over the grid.
  double min_h = 1.0;
  double max_h = 1.0;
  std::string message() const;
};
// Passes iff 1 - delta < h / g0 < 1 + delta at every node.
DeltaBand delta_band_check(const KahlerPotential& p, double delta);

// R_phi = -h^{-1} d dbar log h. Throws KahlerViolation unless h > 0.
SpectralField scalar_curvature(const KahlerPotential& p);
// Integral average of R_phi over dV_phi; a topological constant (0 on the torus).
double average_curvature(const KahlerPotential& p);

struct NonlinearityTerms {
  // -(g_phi^{-2} - g^{-2}) phi_{,z zbar z zbar}.
  SpectralField quartic;
  // g_phi^{-3} |phi_{,z zbar z}|^2.
  SpectralField cubic;
  // g_phi^{-1} Ric_g - average curvature.
  SpectralField ricci;
  SpectralField total;
};
// R(phi) = R_phi - average + Delta_g^2 phi in expanded form.
NonlinearityTerms nonlinearity_terms(const KahlerPotential& p);
SpectralField nonlinearity(const KahlerPotential& p);

// int (R_phi - average)^2 dV_phi.
double calabi_energy(const KahlerPotential& p);

// max(sup|a - b|, sup|grad(a - b)|).
double c1_distance(const SpectralField& a, const SpectralField& b);
// max(sup|a|, sup|grad a|).
double c1_norm(const SpectralField& a);

enum class FlowSolver { SemiImplicit, DuhamelFixedPoint };
enum class DtPolicy { Fixed, Graded };
std::string to_string(FlowSolver s);
FlowSolver parse_flow_solver(const std::string& name);

struct FlowConfig {
  Grid grid{2, 64};
  double T = 0.01;
  DtPolicy dt_policy = DtPolicy::Graded;
  // Fixed step, or the cap on graded steps.
  double dt = 1e-4;
  // Graded steps: dt = dt_fraction * t, at least dt_min.
  double dt_fraction = 0.05;
  double dt_min = 1e-9;
  int max_halvings = 20;
  double delta = 0.1;
  double alpha = 0.5;
  FlowSolver solver = FlowSolver::SemiImplicit;
  double fp_tolerance = 1e-6;
  int fp_max_iterations = 12;
  // Fixed-point time grid: geometric, time_slices nodes ending at T.
  int time_slices = 48;
  double time_ratio = 1.189207115002721;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct FlowRecord {
  double t;
  double calabi_energy;
  double c1_gap;
  double min_h;
  double max_h;
};

struct FlowState {
  KahlerPotential potential;
  SpectralField initial;
  double t = 0.0;
  std::vector<FlowRecord> history;
  FlowConfig config;
  int rejected_steps = 0;

  CsvTable to_csv() const;
};

// Raised when the initial potential lies outside the configured delta band.
class DeltaBandViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Validates the delta band and records the t = 0 diagnostics.
FlowState initial_flow_state(const SpectralField& u0, const FlowConfig& config);

// phi <- exp(-dt L)(phi + dt R(phi)) with L = Delta^2 / 16. A step leaving the
// Kahler cone is rejected and retried with half the step, up to max_halvings;
// the returned state records the step actually taken.
FlowState semi_implicit_step(const FlowState& state, double dt);

struct Trajectory {
  SpaceTimeField phi;
  FlowState state;
};
// Integrates to the last output time, sampling phi at each output time.
Trajectory run_semi_implicit(const SpectralField& u0, const FlowConfig& config,
                             const std::vector<double>& output_times);
// 2 phi(dt/2) - phi(dt) at T from two graded runs.
SpectralField richardson_semi_implicit(const SpectralField& u0, const FlowConfig& config);

struct FixedPointIterate {
  int iterate;
  double x_norm_delta;
  double contraction_factor;
};

struct FixedPointResult {
  SpaceTimeField psi;
  SpaceTimeField phi;
  FlowState state;
  std::vector<FixedPointIterate> record;
  bool converged = false;

  CsvTable to_csv() const;
};

// Raised when three consecutive contraction factors reach 1.
class NoContraction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// psi_{k+1} = V[R(psi_k + S u0)], psi_0 = 0, on the geometric grid of the config.
FixedPointResult duhamel_fixed_point(const SpectralField& u0, const FlowConfig& config);

struct SmoothingExperiment {
  SmoothingProfile profile;
  FlowState state;
  std::vector<double> times;
  std::vector<double> c1_gap;
  double c1_scale = 0.0;
};
// Runs the flow over a geometric grid ending at T and profiles d dbar phi.
SmoothingExperiment run_smoothing_experiment(const SpectralField& u0, const FlowConfig& config,
                                             const std::vector<double>& times,
                                             const SmoothingOptions& options = {});

}  // namespace bflab
