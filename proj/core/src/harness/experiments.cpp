#include "bflab/harness/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bflab/calabi.hpp"
#include "bflab/duhamel.hpp"
#include "bflab/errors.hpp"
#include "bflab/kernel.hpp"
#include "bflab/norms.hpp"
#include "bflab/parametrix.hpp"
#include "bflab/propagator.hpp"
#include "bflab/rough_data.hpp"

namespace bflab::harness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ParamSpec int_param(std::string key, std::int64_t value, std::string doc, double lo, double hi,
                    bool pow2 = false) {
  return {std::move(key), ParamType::Int, value, std::move(doc), lo, hi, pow2};
}
ParamSpec num_param(std::string key, double value, std::string doc, double lo = -1e300,
                    double hi = 1e300) {
  return {std::move(key), ParamType::Double, value, std::move(doc), lo, hi, false};
}
ParamSpec list_param(std::string key, std::vector<double> value, std::string doc,
                     double lo = -1e300, double hi = 1e300) {
  return {std::move(key), ParamType::DoubleList, std::move(value), std::move(doc), lo, hi, false};
}
ParamSpec str_param(std::string key, std::string value, std::string doc) {
  return {std::move(key), ParamType::String, std::move(value), std::move(doc)};
}

int as_int(const Params& p, const std::string& key) { return int(p.get_int(key)); }

// count points from lo to hi, geometric, ascending, hi exact.
std::vector<double> geometric_between(double lo, double hi, int count) {
  return geometric_times(hi, count, std::pow(hi / lo, 1.0 / (count - 1)));
}

double h4(const Grid& g) { return std::pow(g.spacing(), 4); }

MetricSpec metric_1d(double eps) { return eps == 0.0 ? MetricSpec::flat(1) : MetricSpec::conformal(eps, 1); }

// ---------------------------------------------------------------- kernel-mass

ExperimentResult run_kernel_mass(const Params& p, const RunContext& ctx) {
  const int n = as_int(p, "grid");
  const auto dims = p.get_list("dims");
  const int count = as_int(p, "t_count");
  const double t_max = p.get_double("t_max");
  const int kmax = as_int(p, "max_derivative");
  const double eps = p.get_double("epsilon");

  CsvTable mass({"kernel", "dim", "t", "max_mass_error", "max_derivative_integral"});
  std::vector<std::vector<std::vector<double>>> rows(dims.size() + 2);
  double worst_mass = 0.0, worst_deriv = 0.0;
  std::mutex m;

  parallel_for(int(dims.size()), ctx.jobs, [&](int d) {
    const Grid g(int(dims[d]), n);
    const double lo = std::max(4.0 * h4(g), flat_torus_min_time(g));
    const auto times = geometric_between(lo, t_max, count);
    const auto table = flat_torus_kernel(g, times);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      const auto& b = table.offsets(ti);
      const double me = std::abs(b.integral() - 1.0);
      double de = 0.0;
      for (int k = 1; k <= kmax; ++k)
        for (int j = 0; j <= (g.dim() == 2 ? k : 0); ++j) {
          const auto dk = g.dim() == 1 ? derivative(b, {k}) : derivative(b, {j, k - j});
          de = std::max(de, std::abs(dk.integral()));
        }
      rows[d].push_back({dims[d], times[ti], me, de});
      std::lock_guard<std::mutex> lock(m);
      worst_mass = std::max(worst_mass, me);
      worst_deriv = std::max(worst_deriv, de);
    }
  });

  // Matrix-exponential reference kernels on the 1-D grid, flat and perturbed.
  const Grid g1(1, n);
  const double lo = std::max(4.0 * h4(g1), flat_torus_min_time(g1));
  const auto times = geometric_between(lo, t_max, count);
  for (int r = 0; r < 2; ++r) {
    const MetricSpec metric = r == 0 ? MetricSpec::flat(1) : metric_1d(eps);
    const ConformalOperator1D op(metric, g1);
    const auto table = reference_kernel(metric, g1, times);
    const Eigen::VectorXd& dv = table.volume_weights();
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      Eigen::MatrixXd b = table.matrix(ti);
      const double me = ((b * dv).array() - 1.0).abs().maxCoeff();
      double de = 0.0;
      Eigen::MatrixXd dk = b;
      for (int k = 1; k <= kmax; ++k) {
        dk = op.first_derivative() * dk;
        de = std::max(de, (dk * dv).cwiseAbs().maxCoeff());
      }
      rows[dims.size() + r].push_back({1.0, times[ti], me, de});
      worst_mass = std::max(worst_mass, me);
      worst_deriv = std::max(worst_deriv, de);
    }
  }

  for (std::size_t d = 0; d < rows.size(); ++d) {
    const std::string name = d < dims.size() ? "flat-torus" : (d == dims.size() ? "reference-flat" : "reference-perturbed");
    for (const auto& r : rows[d])
      mass.add_cells({name, fmt17(r[0]), fmt17(r[1]), fmt17(r[2]), fmt17(r[3])});
  }
  ExperimentResult out;
  out.add_csv("kernel_mass.csv", mass);
  out.check("max_mass_error", worst_mass, "<=", p.get_double("mass_tolerance"));
  out.check("max_derivative_integral", worst_deriv, "<=", p.get_double("derivative_tolerance"));
  return out;
}

// --------------------------------------------------------------- kernel-decay

ExperimentResult run_kernel_decay(const Params& p, const RunContext& ctx) {
  const double rmax = p.get_double("radius_max");
  const double step = p.get_double("radius_step");
  const auto orders = p.get_list("orders");
  const auto scaling_times = p.get_list("scaling_times");
  std::vector<double> radii;
  for (int i = 0; i * step <= rmax + 1e-12; ++i) radii.push_back(i * step);

  ExperimentResult out;
  CsvTable fits({"kernel", "k", "C", "delta", "exponent", "rms", "points"});
  std::vector<DecayFit> results(orders.size());
  std::vector<KernelProfile> profiles(orders.size());
  parallel_for(int(orders.size()), ctx.jobs, [&](int i) {
    profiles[i] = euclidean_kernel_profile(1, int(orders[i]), 1.0, radii);
    results[i] = decay_fit(profiles[i]);
  });
  double worst = 0.0;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const auto& f = results[i];
    fits.add_cells({"biharmonic", fmt17(orders[i]), fmt17(f.C), fmt17(f.delta), fmt17(f.exponent),
                    fmt17(f.rms), std::to_string(f.points)});
    worst = std::max(worst, std::abs(f.exponent - 4.0 / 3.0));
    out.add_csv("profile_k" + std::to_string(int(orders[i])) + ".csv", profiles[i].to_csv());
  }
  KernelProfile gauss{1, 0, 1.0, {}, {}};
  for (double r : radii)
    if (r <= 20.0) {
      gauss.radii.push_back(r);
      gauss.values.push_back(std::exp(-r * r / 4.0) / std::sqrt(4.0 * M_PI));
    }
  const auto gf = decay_fit(gauss);
  fits.add_cells({"gaussian", "0", fmt17(gf.C), fmt17(gf.delta), fmt17(gf.exponent), fmt17(gf.rms),
                  std::to_string(gf.points)});
  out.add_csv("decay_fit.csv", fits);

  // D^k b(x; t) = t^{-(d+k)/4} (D^k b)(x t^{-1/4}; 1).
  CsvTable scaling({"dim", "k", "t", "x", "direct", "rescaled", "relative_error"});
  double worst_scaling = 0.0;
  for (int dim : {1, 2})
    for (int k = 0; k <= 2; ++k)
      for (double t : scaling_times) {
        const double s = std::pow(t, -0.25);
        double peak = 0.0, err = 0.0;
        std::vector<std::array<double, 3>> vals;
        for (double x = 0.0; x <= 6.0 * std::pow(t, 0.25) + 1e-12; x += 0.25 * std::pow(t, 0.25)) {
          const double direct = dim == 1 ? euclidean_kernel_1d(k, x, t)
                                         : euclidean_kernel_2d_components(k, x, t)[k];
          const double unit = dim == 1 ? euclidean_kernel_1d(k, x * s, 1.0)
                                       : euclidean_kernel_2d_components(k, x * s, 1.0)[k];
          const double rescaled = std::pow(s, dim + k) * unit;
          vals.push_back({x, direct, rescaled});
          peak = std::max(peak, std::abs(rescaled));
        }
        for (const auto& v : vals) {
          const double e = std::abs(v[1] - v[2]) / peak;
          err = std::max(err, e);
          scaling.add({double(dim), double(k), t, v[0], v[1], v[2], e});
        }
        worst_scaling = std::max(worst_scaling, err);
      }
  out.add_csv("scaling.csv", scaling);
  const double tol = p.get_double("exponent_tolerance");
  out.check("scaling_max_relative_error", worst_scaling, "<=", p.get_double("scaling_tolerance"));
  out.check("decay_max_exponent_deviation", worst, "<=", tol);
  out.check("decay_gaussian_exponent_deviation", std::abs(gf.exponent - 2.0), "<=", tol);
  return out;
}

// ------------------------------------------------------------------- nu-limit

ExperimentResult run_nu_limit(const Params& p, const RunContext& ctx) {
  const Grid g(1, as_int(p, "grid"));
  const double eps = p.get_double("epsilon");
  const auto orders = p.get_list("orders");
  std::vector<double> seq;
  for (int i = 0; i < as_int(p, "t_count"); ++i) seq.push_back(p.get_double("t_start") * std::pow(0.5, i));
  const auto flat_seq = p.get_list("flat_times");

  std::vector<RescalingResult> pert(orders.size()), flat(orders.size());
  parallel_for(int(orders.size()), ctx.jobs, [&](int i) {
    pert[i] = rescaling_convergence(metric_1d(eps), g, int(orders[i]), seq);
    flat[i] = rescaling_convergence(MetricSpec::flat(1), g, int(orders[i]), flat_seq);
  });
  CsvTable csv({"metric", "k", "t", "value", "nu", "relative_gap"});
  double worst_final = 0.0, worst_flat = 0.0, span = kInf;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    for (const auto& r : pert[i].rows)
      csv.add_cells({"perturbed", fmt17(orders[i]), fmt17(r.t), fmt17(r.value), fmt17(r.nu), fmt17(r.relative_gap)});
    for (const auto& r : flat[i].rows) {
      csv.add_cells({"flat", fmt17(orders[i]), fmt17(r.t), fmt17(r.value), fmt17(r.nu), fmt17(r.relative_gap)});
      worst_flat = std::max(worst_flat, r.relative_gap);
    }
    if (pert[i].rows.size() < 2) throw InsufficientData("nu-limit: fewer than two resolved times");
    worst_final = std::max(worst_final, pert[i].rows.back().relative_gap);
    span = std::min(span, std::log10(pert[i].rows.front().t / pert[i].rows.back().t));
    if (flat[i].rows.size() != flat_seq.size()) worst_flat = kInf;
  }
  ExperimentResult out;
  out.add_csv("nu_limit.csv", csv);
  out.check("perturbed_final_relative_gap", worst_final, "<", p.get_double("gap_tolerance"));
  out.check("perturbed_sequence_decades", span, ">=", 2.0);
  out.check("flat_max_relative_gap", worst_flat, "<=", p.get_double("flat_tolerance"));
  return out;
}

// ------------------------------------------------------------ smoothing-rates

FlowConfig flow_config(const Params& p, int n) {
  FlowConfig c;
  c.grid = Grid(2, n);
  c.delta = p.get_double("delta");
  return c;
}

ExperimentResult run_smoothing_rates(const Params& p, const RunContext&) {
  ExperimentResult out;
  const double amp = p.get_double("amplitude");
  const double lo = p.get_double("slope_t_min"), hi = p.get_double("slope_t_max");
  const double tol = p.get_double("slope_tolerance");
  const Grid g(2, as_int(p, "grid"));
  const auto u0 = rough_potential(g, parse_rough_kind(p.get_string("rough_kind")), amp);
  const auto prop = Propagator::flat(g, 1.0 / 16.0);
  const double t_min = p.get_double("t_min");
  const auto times = geometric_between(t_min, hi, as_int(p, "t_count"));

  CsvTable slopes({"solution", "k", "slope", "target", "points"});
  SmoothingOptions so;
  so.metric = MetricSpec::flat(2);
  const auto sg = smoothing_profile(propagate_initial(u0, times, prop), so);
  out.add_csv("initial_value_profile.csv", sg.to_csv());
  for (int k = 1; k <= 3; ++k) {
    const auto f = smoothing_slope(sg, k, 0, lo, hi);
    slopes.add_cells({"initial-value", std::to_string(k), fmt17(f.slope), fmt17(-k / 4.0), std::to_string(f.points)});
    out.check("initial_value_slope_k" + std::to_string(k) + "_deviation", std::abs(f.slope + k / 4.0), "<=", tol);
  }

  FlowConfig c = flow_config(p, g.n());
  c.T = hi;
  c.dt = hi;
  c.dt_fraction = p.get_double("dt_fraction");
  const auto flow = run_smoothing_experiment(u0, c, times);
  out.add_csv("flow_profile.csv", flow.profile.to_csv());
  out.add_csv("flow.csv", flow.state.to_csv());
  for (int k = 1; k <= 3; ++k) {
    const auto f = smoothing_slope(flow.profile, k, 0, lo, hi);
    slopes.add_cells({"calabi-flow", std::to_string(k), fmt17(f.slope), fmt17(-k / 4.0), std::to_string(f.points)});
    out.check("flow_slope_k" + std::to_string(k) + "_deviation", std::abs(f.slope + k / 4.0), "<=", tol);
  }
  out.add_csv("slopes.csv", slopes);

  // Weighted values for L^inf data stay bounded by C |d dbar u0|_inf; C is reported.
  CsvTable bound({"solution", "k", "l", "max_weighted", "constant"});
  for (const auto* prof : {&sg, &flow.profile})
    for (int k = 0; k <= 3; ++k)
      for (int l = 0; l <= 1; ++l) {
        double mx = 0.0;
        for (const auto& r : prof->series(k, l)) mx = std::max(mx, r.weighted);
        bound.add_cells({prof == &sg ? "initial-value" : "calabi-flow", std::to_string(k), std::to_string(l),
                         fmt17(mx), fmt17(mx / amp)});
      }
  out.add_csv("weighted_bound.csv", bound);

  CsvTable gap({"t", "c1_gap", "c1_scale"});
  for (std::size_t i = 0; i < flow.times.size(); ++i) gap.add({flow.times[i], flow.c1_gap[i], flow.c1_scale});
  out.add_csv("c1_gap.csv", gap);
  out.check("c1_gap_ratio_at_t_min", flow.c1_gap.front() / flow.c1_scale, "<", p.get_double("c1_ratio"));

  // Continuous d dbar data: weighted values along dyadic t -> 0.
  const Grid gc(2, as_int(p, "continuous_grid"));
  const auto uc = rough_potential(gc, RoughKind::Triangle, amp);
  const auto dy = geometric_times(p.get_double("continuous_T"), as_int(p, "continuous_count"), 2.0);
  const auto cp = smoothing_profile(propagate_initial(uc, dy, Propagator::flat(gc, 1.0 / 16.0)), so);
  out.add_csv("continuous_profile.csv", cp.to_csv());
  double worst_ratio = 0.0;
  bool monotone = true;
  CsvTable decay({"k", "l", "first", "last", "ratio", "tail_monotone"});
  for (int k = 0; k <= 3; ++k)
    for (int l = 0; l <= 1; ++l) {
      if (k + l == 0) continue;
      const auto s = cp.series(k, l);
      bool mono = true;
      for (std::size_t i = 1; i <= s.size() / 2; ++i) mono = mono && s[i].weighted >= s[i - 1].weighted;
      const double ratio = s.front().weighted / s.back().weighted;
      decay.add({double(k), double(l), s.back().weighted, s.front().weighted, ratio, mono ? 1.0 : 0.0});
      worst_ratio = std::max(worst_ratio, ratio);
      monotone = monotone && mono;
    }
  out.add_csv("continuous_decay.csv", decay);
  out.check("continuous_max_last_to_first_ratio", worst_ratio, "<", p.get_double("continuous_ratio"));
  out.check("continuous_tail_monotone", monotone ? 1.0 : 0.0, "==", 1.0);
  return out;
}

// ------------------------------------------------------------- schauder-ratio

ExperimentResult run_schauder_ratio(const Params& p, const RunContext& ctx) {
  const Grid g(1, as_int(p, "grid"));
  const auto Ts = p.get_list("T_values");
  const auto eps = p.get_list("epsilons");
  const double alpha = p.get_double("alpha");
  const int slices = as_int(p, "time_slices");
  const auto sinx = SpectralField::from_function(g, [](double x, double) { return std::sin(x); });
  const int cells = int(Ts.size() * eps.size());
  std::vector<SchauderRatioRecord> rec(cells);
  parallel_for(cells, ctx.jobs, [&](int c) {
    const double T = Ts[c % Ts.size()], e = eps[c / Ts.size()];
    const auto times = geometric_times(T, slices);
    std::vector<SpectralField> f;
    for (double t : times) f.push_back((1.0 / std::sqrt(t)) * sinx);
    rec[c] = schauder_ratio(metric_1d(e), SpaceTimeField(times, std::move(f)), T, alpha);
  });
  CsvTable csv({"epsilon", "T", "x_norm", "y_norm", "ratio"});
  double lo = kInf, hi = 0.0;
  for (const auto& r : rec) {
    csv.add({r.metric.epsilon, r.T, r.x_norm, r.y_norm, r.ratio});
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  ExperimentResult out;
  out.add_csv("schauder_ratio.csv", csv);
  out.check("ratio_spread_factor", hi / lo, "<", p.get_double("spread_factor"));
  return out;
}

// -------------------------------------------------------- parametrix-validate

double fit_slope(const std::vector<double>& t, const std::vector<double>& v) {
  return loglog_slope(t, v).slope;
}

ExperimentResult run_parametrix_validate(const Params& p, const RunContext&) {
  ExperimentResult out;
  const double eps = p.get_double("epsilon");
  const double T = p.get_double("T");
  const int charts = as_int(p, "charts");
  const Grid g(1, as_int(p, "grid"));
  const auto table = build_parametrix(metric_1d(eps), g, {T}, charts);
  NeumannOptions no;
  no.max_iterates = as_int(p, "max_iterates");
  no.tolerance = p.get_double("neumann_tolerance");
  const auto series = neumann_series(table, T, no);
  std::vector<double> times;
  for (double t = T / 2.0; t >= 4.0 * h4(g); t /= 2.0) times.push_back(t);
  std::reverse(times.begin(), times.end());
  const auto assembled = assemble_kernel(table, series, times);
  out.add_csv("assembly.csv", assembled.validation_csv());
  double l1 = 0.0, pde = 0.0;
  for (const auto& r : assembled.validation) {
    l1 = std::max(l1, r.row_l1_error);
    if (!std::isnan(r.pde_residual)) pde = std::max(pde, r.pde_residual);
  }
  out.check("row_l1_relative_error", l1, "<=", p.get_double("row_l1_tolerance"));
  out.check("pde_relative_residual", pde, "<=", p.get_double("pde_tolerance"));

  // Defect order on the fine grid where the frozen-coefficient terms dominate.
  const Grid gf(1, as_int(p, "order_grid"));
  const auto fine = build_parametrix(metric_1d(eps), gf, {T}, charts);
  const auto& pf = *fine.parametrix;
  const double share = p.get_double("remainder_share");
  std::vector<double> ts, ks, zs;
  CsvTable order({"t", "defect_sup", "t_times_defect_sup", "remainder_share", "z_row_l1_error"});
  for (double t = 4.0 * h4(gf); t <= T; t *= 2.0) {
    const auto grp = pf.defect_groups(t);
    const double sup = grp.total.cwiseAbs().maxCoeff();
    const double rem = grp.remainder.cwiseAbs().maxCoeff() / sup;
    const double ze = row_l1_error(pf.z(t), pf.op().kernel(t), pf.volume_weights());
    order.add({t, sup, t * sup, rem, ze});
    if (rem > share) break;
    ts.push_back(t);
    ks.push_back(sup);
    zs.push_back(ze);
  }
  out.add_csv("defect_order.csv", order);
  if (ts.size() < 3) throw InsufficientData("parametrix-validate: fewer than 3 coefficient-dominated times");
  out.check("defect_slope_deviation", std::abs(fit_slope(ts, ks) + 1.0), "<=", p.get_double("slope_tolerance"));
  out.check("parametrix_order_deviation", std::abs(fit_slope(ts, zs) - 0.25), "<=", 0.05);

  // K * K gains a quarter power over K.
  const KernelFn k = [&](double s) { return pf.defect(s); };
  ConvolutionOptions co;
  co.order = 8;
  co.min_time = 1e-5 * h4(gf);
  std::vector<double> cs;
  CsvTable conv({"t", "convolution_sup"});
  for (double t : ts) {
    cs.push_back(spacetime_convolve(k, k, pf.volume_weights(), t, co).cwiseAbs().maxCoeff());
    conv.add({t, cs.back()});
  }
  out.add_csv("convolution_order.csv", conv);
  out.check("convolution_slope_deviation", std::abs(fit_slope(ts, cs) + 0.75), "<=", 0.1);
  return out;
}

// -------------------------------------------------------------- neumann-decay

ExperimentResult run_neumann_decay(const Params& p, const RunContext&) {
  const Grid g(1, as_int(p, "grid"));
  const double T = p.get_double("T");
  const auto table = build_parametrix(metric_1d(p.get_double("epsilon")), g, {T}, as_int(p, "charts"));
  NeumannOptions no;
  no.max_iterates = as_int(p, "max_iterates");
  no.tolerance = p.get_double("tolerance");
  const auto s = neumann_series(table, T, no);
  ExperimentResult out;
  out.add_csv("neumann.csv", s.to_csv());
  CsvTable ratios({"m", "sup_ratio", "integrated_ratio"});
  std::vector<double> r;
  for (std::size_t i = 1; i < s.record.size(); ++i) {
    r.push_back(s.record[i].sup_norm / s.record[i - 1].sup_norm);
    ratios.add({double(s.record[i].m), r.back(), s.record[i].integrated / s.record[i - 1].integrated});
  }
  out.add_csv("ratios.csv", ratios);
  // m0 starts the final strictly decreasing run of ratios; infinite if the last pair rises.
  double m0 = kInf;
  if (r.size() >= 2 && r.back() < r[r.size() - 2]) {
    std::size_t j = r.size() - 2;
    while (j >= 1 && r[j] < r[j - 1]) --j;
    m0 = s.record[j + 1].m;
  }
  out.check("superexponential_onset_m0", m0, "<=", double(as_int(p, "m0_max")));
  out.check("relative_residual_over_tolerance", s.residual_midpoints / s.tolerance, "<", 10.0);
  out.check("converged", s.converged ? 1.0 : 0.0, "==", 1.0);
  return out;
}

// ------------------------------------------------------- flow, fixed point

SpectralField initial_potential(const Params& p, const Grid& g, std::uint64_t seed) {
  RoughOptions ro;
  ro.seed = seed;
  return rough_potential(g, parse_rough_kind(p.get_string("rough_kind")), p.get_double("amplitude"), ro);
}

FlowConfig flow_run_config(const Params& p) {
  FlowConfig c = flow_config(p, as_int(p, "grid"));
  c.T = p.get_double("T");
  return c;
}

ExperimentResult run_flow(const Params& p, const RunContext& ctx) {
  const FlowConfig c = flow_run_config(p);
  const auto seeds = p.get_list("seeds");
  std::vector<std::optional<FlowState>> states(seeds.size());
  parallel_for(int(seeds.size()), ctx.jobs, [&](int i) {
    states[i] = run_semi_implicit(initial_potential(p, c.grid, std::uint64_t(seeds[i])), c, {c.T}).state;
  });
  ExperimentResult out;
  CsvTable summary({"seed", "steps", "rejected_steps", "initial_energy", "final_energy", "max_relative_increase"});
  double worst = -kInf;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& h = states[i]->history;
    double w = -kInf;
    for (std::size_t j = 1; j < h.size(); ++j)
      w = std::max(w, (h[j].calabi_energy - h[j - 1].calabi_energy) / h[j - 1].calabi_energy);
    worst = std::max(worst, w);
    summary.add({seeds[i], double(h.size() - 1), double(states[i]->rejected_steps), h.front().calabi_energy,
                 h.back().calabi_energy, w});
    out.add_csv("flow_seed" + std::to_string(std::int64_t(seeds[i])) + ".csv", states[i]->to_csv());
  }
  out.add_csv("energy.csv", summary);
  out.check("max_relative_energy_increase", worst, "<=", p.get_double("energy_tolerance"));
  out.check("seed_count", double(seeds.size()), ">=", 5.0);
  return out;
}

FlowConfig fixed_point_config(const Params& p) {
  FlowConfig c = flow_run_config(p);
  c.solver = FlowSolver::DuhamelFixedPoint;
  c.fp_tolerance = p.get_double("tolerance");
  c.fp_max_iterations = as_int(p, "max_iterations");
  c.time_slices = as_int(p, "time_slices");
  return c;
}

ExperimentResult run_fixed_point(const Params& p, const RunContext&) {
  const FlowConfig c = fixed_point_config(p);
  const auto u0 = initial_potential(p, c.grid, std::uint64_t(p.get_int("seed")));
  const auto r = duhamel_fixed_point(u0, c);
  ExperimentResult out;
  out.add_csv("fixed_point.csv", r.to_csv());
  out.add_csv("flow.csv", r.state.to_csv());
  double worst = 0.0;
  for (const auto& it : r.record)
    if (it.iterate >= 2) worst = std::max(worst, it.contraction_factor);
  out.check("max_contraction_factor_from_iterate_2", worst, "<=", p.get_double("contraction_max"));
  out.check("iterations_to_converge", r.converged ? double(r.record.size()) : kInf, "<=",
            double(c.fp_max_iterations));
  out.check("final_x_norm_delta", r.record.back().x_norm_delta, "<", c.fp_tolerance);
  return out;
}

ExperimentResult run_solver_agreement(const Params& p, const RunContext&) {
  ExperimentResult out;
  const FlowConfig c = fixed_point_config(p);
  const auto u0 = initial_potential(p, c.grid, std::uint64_t(p.get_int("seed")));
  const auto fp = duhamel_fixed_point(u0, c);
  FlowConfig si = c;
  si.solver = FlowSolver::SemiImplicit;
  si.dt_fraction = p.get_double("dt_fraction");
  const auto rich = richardson_semi_implicit(u0, si);
  const auto& phi = fp.phi.slices().back();
  const double agree = (phi - rich).sup_norm() / rich.sup_norm();
  CsvTable cmp({"T", "fixed_point_sup", "semi_implicit_sup", "relative_difference"});
  cmp.add({c.T, phi.sup_norm(), rich.sup_norm(), agree});
  out.add_csv("agreement.csv", cmp);
  out.check("solver_relative_difference", agree, "<=", p.get_double("agreement_tolerance"));

  // V[f] for f = s^{-1/2} e_m with e_m a mode of the perturbed 1-D operator:
  // V(t) = 2 sqrt(t) int_0^1 exp(-mu t (1 - sigma^2)) d sigma e_m.
  const Grid g1(1, as_int(p, "oracle_grid"));
  const auto prop = Propagator::conformal(metric_1d(p.get_double("oracle_epsilon")), g1);
  const auto mode = std::size_t(p.get_int("oracle_mode"));
  if (mode >= prop.rates().size()) throw ConfigError("parameters.oracle_mode", "exceeds the mode count");
  std::vector<cplx> coeffs(prop.rates().size(), cplx(0.0));
  coeffs[mode] = 1.0;
  const auto em = prop.from_modes(coeffs);
  const double mu = prop.rates()[mode];
  const auto times = geometric_times(p.get_double("oracle_T"), 40);
  std::vector<SpectralField> f;
  for (double t : times) f.push_back((1.0 / std::sqrt(t)) * em);
  const auto v = volume_potential(SpaceTimeField(times, std::move(f)), prop);
  CsvTable oc({"t", "relative_error"});
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    const double a = 2.0 * std::sqrt(t) *
                     boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                         [&](double s) { return std::exp(-mu * t * (1.0 - s * s)); }, 0.0, 1.0, 15, 1e-15);
    const auto ref = a * em;
    const double e = (v.slice(i) - ref).sup_norm() / ref.sup_norm();
    worst = std::max(worst, e);
    oc.add({t, e});
  }
  out.add_csv("volume_potential_oracle.csv", oc);
  out.check("volume_potential_relative_error", worst, "<=", p.get_double("oracle_tolerance"));
  return out;
}

// ------------------------------------------------------------------- catalog

std::vector<ParamSpec> flow_schema(bool seeds_list) {
  std::vector<ParamSpec> s = {
      int_param("grid", 64, "points per axis of the 2-torus", 16, 1024, true),
      num_param("T", 0.01, "final time", 1e-8, 10.0),
      num_param("amplitude", 0.05, "sup |d dbar u0|", 0.0, 10.0),
      num_param("delta", 0.1, "delta-band half width", 1e-6, 0.999999),
      str_param("rough_kind", "smooth", "initial data class"),
  };
  if (seeds_list) s.push_back(list_param("seeds", {1, 2, 3, 4, 5}, "random seeds", 0, 1e15));
  else s.push_back(int_param("seed", 1, "random seed", 0, 1e15));
  return s;
}

void validate_rough_kind(const Params& p) {
  try {
    parse_rough_kind(p.get_string("rough_kind"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("parameters.rough_kind", e.what());
  }
}

std::vector<ExperimentInfo> build_catalog() {
  std::vector<ExperimentInfo> c;
  c.push_back({"kernel-mass",
               "unit mass and vanishing derivative integrals of flat-torus and reference kernels",
               {int_param("grid", 128, "points per axis", 16, 1024, true),
                list_param("dims", {1, 2}, "torus dimensions", 1, 2),
                int_param("t_count", 12, "geometric times in the resolved window", 2, 200),
                num_param("t_max", 1.0, "largest time", 1e-8, 100.0),
                int_param("max_derivative", 4, "highest derivative order", 1, 8),
                num_param("epsilon", 0.1, "perturbation of the reference metric", 0.0, 0.5),
                num_param("mass_tolerance", 1e-9, "bound on |mass - 1|", 0.0, 1.0),
                num_param("derivative_tolerance", 1e-8, "bound on derivative integrals", 0.0, 1.0)},
               {},
               run_kernel_mass});
  c.push_back({"kernel-decay",
               "Euclidean kernel self-similarity and fitted tail exponent",
               {num_param("radius_max", 150.0, "outer radius at t = 1", 10.0, 400.0),
                num_param("radius_step", 0.1, "radial step", 1e-3, 1.0),
                list_param("orders", {0, 1, 2}, "derivative orders", 0, 4),
                list_param("scaling_times", {0.25, 1.0, 4.0}, "times for the scaling identity", 1e-6, 1e6),
                num_param("exponent_tolerance", 0.05, "bound on |p - 4/3| and |p_gauss - 2|", 0.0, 1.0),
                num_param("scaling_tolerance", 1e-10, "bound on the scaling identity error", 0.0, 1.0)},
               {},
               run_kernel_decay});
  c.push_back({"nu-limit",
               "convergence of rescaled kernel integrals I_k(t) to nu_k",
               {int_param("grid", 512, "points on the circle", 16, 1024, true),
                num_param("epsilon", 0.1, "metric perturbation", 0.0, 0.5),
                list_param("orders", {0, 1, 2}, "derivative orders", 0, 3),
                num_param("t_start", 0.05, "first time of the dyadic sequence", 1e-8, 1.0),
                int_param("t_count", 8, "dyadic sequence length", 2, 40),
                list_param("flat_times", {2.5e-4, 1e-5, 2.5e-6}, "flat-metric times", 1e-12, 1.0),
                num_param("gap_tolerance", 0.02, "bound on the final perturbed gap", 0.0, 1.0),
                num_param("flat_tolerance", 1e-6, "bound on every flat gap", 0.0, 1.0)},
               {},
               run_nu_limit});
  c.push_back({"smoothing-rates",
               "smoothing slopes for rough data under S u0 and the Calabi flow; continuous data limits",
               {int_param("grid", 256, "points per axis", 16, 1024, true),
                num_param("amplitude", 0.05, "sup |d dbar u0|", 1e-8, 10.0),
                num_param("delta", 0.1, "delta-band half width", 1e-6, 0.999999),
                str_param("rough_kind", "sawtooth", "bounded discontinuous data class"),
                num_param("t_min", 2.5e-5, "smallest sampled time", 1e-12, 1.0),
                int_param("t_count", 33, "geometric sample times", 4, 400),
                num_param("slope_t_min", 3.7e-4, "slope window start", 1e-12, 10.0),
                num_param("slope_t_max", 3.7e-2, "slope window end and final time", 1e-12, 10.0),
                num_param("slope_tolerance", 0.1, "bound on |slope + k/4|", 0.0, 1.0),
                num_param("dt_fraction", 0.05, "graded step dt / t", 1e-4, 1.0),
                num_param("c1_ratio", 0.05, "bound on C1 gap / C1 scale at t_min", 0.0, 1.0),
                int_param("continuous_grid", 512, "points per axis for continuous data", 16, 1024, true),
                num_param("continuous_T", 1.0, "largest dyadic time", 1e-6, 10.0),
                int_param("continuous_count", 17, "dyadic times", 4, 60),
                num_param("continuous_ratio", 0.1, "bound on last / first weighted value", 0.0, 1.0)},
               [](const Params& p) {
                 validate_rough_kind(p);
                 if (!(p.get_double("slope_t_min") < p.get_double("slope_t_max")))
                   throw ConfigError("parameters.slope_t_min", "must be below slope_t_max");
                 if (!(p.get_double("t_min") <= p.get_double("slope_t_min")))
                   throw ConfigError("parameters.t_min", "must not exceed slope_t_min");
                 if (p.get_double("amplitude") >= p.get_double("delta"))
                   throw ConfigError("parameters.amplitude", "must lie below delta (delta-band check)");
               },
               run_smoothing_rates});
  c.push_back({"schauder-ratio",
               "volume-potential Schauder ratios across T and metric perturbation",
               {int_param("grid", 64, "points on the circle", 16, 1024, true),
                list_param("T_values", {0.2, 0.1, 0.05, 0.025}, "final times", 1e-6, 10.0),
                list_param("epsilons", {0.0, 0.05, 0.1}, "metric perturbations", 0.0, 0.5),
                num_param("alpha", 0.5, "Hoelder exponent", 0.01, 0.99),
                int_param("time_slices", 40, "geometric time slices", 8, 400),
                num_param("spread_factor", 2.0, "bound on max / min ratio", 1.0, 100.0)},
               {},
               run_schauder_ratio});
  c.push_back({"parametrix-validate",
               "assembled parametrix kernel against the matrix-exponential oracle; defect order",
               {int_param("grid", 64, "points on the circle", 16, 512, true),
                num_param("epsilon", 0.1, "metric perturbation", 0.0, 0.5),
                num_param("T", 0.1, "final time", 1e-6, 1.0),
                int_param("charts", 2, "chart count", 2, 8),
                int_param("max_iterates", 14, "Neumann iterates", 2, 40),
                num_param("neumann_tolerance", 1e-6, "Neumann stopping tolerance", 1e-15, 1.0),
                int_param("order_grid", 256, "points for the defect-order fit", 16, 1024, true),
                num_param("remainder_share", 0.01, "largest cutoff-term share in the order window", 0.0, 1.0),
                num_param("row_l1_tolerance", 1e-3, "bound on row-L1 error", 0.0, 1.0),
                num_param("pde_tolerance", 1e-4, "bound on the relative PDE residual", 0.0, 1.0),
                num_param("slope_tolerance", 0.1, "bound on |defect slope + 1|", 0.0, 1.0)},
               {},
               run_parametrix_validate});
  c.push_back({"neumann-decay",
               "Neumann-series iterate decay and integral-equation residual",
               {int_param("grid", 64, "points on the circle", 16, 512, true),
                num_param("epsilon", 0.1, "metric perturbation", 0.0, 0.5),
                num_param("T", 0.1, "final time", 1e-6, 1.0),
                int_param("charts", 2, "chart count", 2, 8),
                int_param("max_iterates", 14, "Neumann iterates", 2, 40),
                num_param("tolerance", 1e-6, "stopping tolerance relative to int sup|K| dt", 1e-15, 1.0),
                int_param("m0_max", 8, "latest admissible onset of decreasing ratios", 1, 40)},
               {},
               run_neumann_decay});
  auto flow = flow_schema(true);
  flow.push_back(num_param("energy_tolerance", 1e-12, "bound on relative energy increase per step", 0.0, 1.0));
  c.push_back({"flow-run",
               "semi-implicit Calabi flow from random admissible data; energy monotonicity",
               flow,
               [](const Params& p) {
                 validate_rough_kind(p);
                 if (p.get_list("seeds").size() < 1) throw ConfigError("parameters.seeds", "empty");
               },
               run_flow});
  auto fp = flow_schema(false);
  fp.push_back(num_param("tolerance", 1e-6, "X_T stopping tolerance", 1e-15, 1.0));
  fp.push_back(int_param("max_iterations", 12, "iterate cap", 1, 100));
  fp.push_back(int_param("time_slices", 48, "geometric time slices", 8, 400));
  auto agree = fp;
  fp.push_back(num_param("contraction_max", 0.5, "bound on contraction factors from iterate 2", 0.0, 1.0));
  c.push_back({"fixed-point", "Duhamel fixed-point iteration for the Calabi flow; contraction",
               fp, validate_rough_kind, run_fixed_point});
  agree.push_back(num_param("dt_fraction", 0.02, "semi-implicit graded step dt / t", 1e-4, 1.0));
  agree.push_back(num_param("agreement_tolerance", 1e-4, "bound on relative sup difference", 0.0, 1.0));
  agree.push_back(int_param("oracle_grid", 64, "points for the volume-potential oracle", 16, 512, true));
  agree.push_back(num_param("oracle_epsilon", 0.1, "oracle metric perturbation", 0.0, 0.5));
  agree.push_back(int_param("oracle_mode", 3, "oracle eigenmode index", 0, 1024));
  agree.push_back(num_param("oracle_T", 1.0, "oracle final time", 1e-6, 10.0));
  agree.push_back(num_param("oracle_tolerance", 1e-6, "bound on the oracle relative error", 0.0, 1.0));
  c.push_back({"solver-agreement",
               "fixed-point versus refined semi-implicit solution; volume potential versus a modal oracle",
               agree, validate_rough_kind, run_solver_agreement});
  return c;
}

}  // namespace

void ExperimentResult::add_csv(const std::string& name, const CsvTable& table) {
  outputs.emplace_back(name, table.str());
}

void ExperimentResult::add_text(const std::string& name, std::string contents) {
  outputs.emplace_back(name, std::move(contents));
}

const Check& ExperimentResult::check(const std::string& name, double value, const std::string& relation,
                                     double threshold) {
  bool pass = false;
  if (relation == "<") pass = value < threshold;
  else if (relation == "<=") pass = value <= threshold;
  else if (relation == ">") pass = value > threshold;
  else if (relation == ">=") pass = value >= threshold;
  else if (relation == "==") pass = value == threshold;
  else throw std::invalid_argument("check: unknown relation " + relation);
  checks.push_back({name, value, relation, threshold, pass});
  return checks.back();
}

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

CsvTable ExperimentResult::checks_csv() const {
  CsvTable csv({"name", "value", "relation", "threshold", "pass"});
  for (const auto& c : checks)
    csv.add_cells({c.name, fmt17(c.value), c.relation, fmt17(c.threshold), c.pass ? "1" : "0"});
  return csv;
}

const std::vector<ExperimentInfo>& catalog() {
  static const std::vector<ExperimentInfo> c = build_catalog();
  return c;
}

const ExperimentInfo& find_experiment(const std::string& id) {
  for (const auto& e : catalog())
    if (e.id == id) return e;
  std::string ids;
  for (const auto& e : catalog()) ids += (ids.empty() ? "" : ", ") + e.id;
  throw UsageError("unknown experiment '" + id + "'; available: " + ids);
}

namespace {

std::string display_value(const ParamValue& v) {
  auto g = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::string(buf);
  };
  if (const auto* d = std::get_if<double>(&v)) return g(*d);
  if (const auto* l = std::get_if<std::vector<double>>(&v)) {
    std::string s = "[";
    for (std::size_t i = 0; i < l->size(); ++i) s += (i ? ", " : "") + g((*l)[i]);
    return s + "]";
  }
  return format_value(v);
}

}  // namespace

std::string list_experiments() {
  std::ostringstream os;
  for (const auto& e : catalog()) {
    os << e.id << "\n    " << e.description << "\n";
    for (const auto& s : e.schema)
      os << "    " << s.key << " (" << to_string(s.type) << ", default " << display_value(s.fallback)
         << "): " << s.description << "\n";
  }
  return os.str();
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(jobs, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i; (i = next++) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace bflab::harness
