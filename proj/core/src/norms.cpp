#include "bflab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bflab/errors.hpp"

namespace bflab {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("norms: alpha must lie in (0,1)");
}

void check_window(const SpaceTimeField& u, double T, std::size_t min_slices) {
  if (u.size() < min_slices)
    throw InsufficientData("norms: need at least " + std::to_string(min_slices) +
                           " time slices, got " + std::to_string(u.size()));
  if (!(T > 0.0) || u.times().back() > T * (1.0 + 1e-12))
    throw std::invalid_argument("norms: slice times must lie in (0, T]");
}

std::string pair_policy_text(const NormOptions& o, const Grid& g) {
  std::ostringstream os;
  os << "time pairs j'-j<=" << o.max_pair_gap << "; space pairs dist<=" << o.holder.cap_fraction
     << "*period, "
     << (g.n() <= o.holder.exhaustive_max_points ? "exhaustive"
                                                   : "sampled " + std::to_string(o.holder.sampled_pairs));
  return os.str();
}

// sup_x |A(x) - B(x)|_g over tensor components.
double sup_difference(const TensorComponents& a, const TensorComponents& b) {
  const std::size_t n = a.components.front().size();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < a.components.size(); ++c) {
      const double d = a.components[c][i] - b.components[c][i];
      acc += a.weights[c] * d * d;
    }
    best = std::max(best, acc);
  }
  return std::sqrt(best);
}

TensorComponents scalar_tensor(const SpectralField& f) { return TensorComponents{{f}, {1.0}}; }

// sup_j sup_{j'} w(t_j) |A_j' - A_j| / (t_j' - t_j)^{alpha/4}, w(t) = t^{power}.
double time_holder(const std::vector<double>& times, const std::vector<TensorComponents>& a,
                   double power, double alpha, int max_gap) {
  double best = 0.0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    for (std::size_t jp = j + 1; jp < times.size() && jp <= j + std::size_t(max_gap); ++jp) {
      const double h = times[jp] - times[j];
      best = std::max(best, std::pow(times[j], power) * sup_difference(a[jp], a[j]) /
                                std::pow(h, 0.25 * alpha));
    }
  }
  return best;
}

NormReport make_report(const std::string& space, const SpaceTimeField& u, double alpha, double T,
                       const NormOptions& options) {
  NormReport r;
  r.space = space;
  r.alpha = alpha;
  r.T = T;
  r.pair_policy = pair_policy_text(options, u.grid());
  r.grid_dim = u.grid().dim();
  r.grid_points = u.grid().n();
  r.time_grid = u.times();
  return r;
}

void finish(NormReport& r) {
  r.total = 0.0;
  for (const auto& t : r.terms) r.total += t.value;
}

}  // namespace

double NormReport::term(const std::string& name) const {
  for (const auto& t : terms)
    if (t.name == name) return t.value;
  throw std::out_of_range("NormReport: no term " + name);
}

std::string NormReport::to_json() const {
  std::ostringstream os;
  os << "{\n  \"space\": \"" << space << "\",\n  \"alpha\": " << fmt17(alpha)
     << ",\n  \"T\": " << fmt17(T) << ",\n  \"total\": " << fmt17(total) << ",\n  \"terms\": {";
  for (std::size_t i = 0; i < terms.size(); ++i)
    os << (i ? ",\n" : "\n") << "    \"" << terms[i].name << "\": " << fmt17(terms[i].value);
  os << "\n  },\n  \"pair_policy\": \"" << pair_policy << "\",\n  \"grid\": {\"dim\": " << grid_dim
     << ", \"points_per_axis\": " << grid_points << "},\n  \"time_grid\": [";
  for (std::size_t i = 0; i < time_grid.size(); ++i) os << (i ? ", " : "") << fmt17(time_grid[i]);
  os << "]\n}\n";
  return os.str();
}

TensorComponents covariant_derivative(const SpectralField& field, int k, const MetricSpec& metric) {
  if (k < 0) throw std::invalid_argument("covariant_derivative: negative order");
  if (metric.is_flat()) return derivative_tensor(field, k);
  if (field.grid().dim() != 1)
    throw std::invalid_argument("covariant_derivative: non-flat metrics are 1-D only");
  const auto g = metric.conformal_factor(field.grid());
  SpectralField f = field;
  for (int r = 0; r < k; ++r) {
    const auto df = derivative(f, {1});
    std::vector<double> s(df.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = df[i] / std::sqrt(g[i]);
    f = SpectralField(field.grid(), std::move(s));
  }
  return scalar_tensor(f);
}

std::vector<SpectralField> time_derivative(const SpaceTimeField& u) {
  const std::size_t m = u.size();
  if (m < 3) throw InsufficientData("time_derivative: need at least three slices");
  const auto& t = u.times();
  std::vector<SpectralField> out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t c = std::clamp<std::size_t>(j, 1, m - 2);
    const double t0 = t[c - 1], t1 = t[c], t2 = t[c + 1], x = t[j];
    // Derivatives of the Lagrange basis through (t0, t1, t2) at x.
    const double w0 = ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2));
    const double w1 = ((x - t0) + (x - t2)) / ((t1 - t0) * (t1 - t2));
    const double w2 = ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1));
    out.push_back(w0 * u.slice(c - 1) + w1 * u.slice(c) + w2 * u.slice(c + 1));
  }
  return out;
}

NormReport y_norm(const SpaceTimeField& f, double alpha, double T, const NormOptions& options) {
  check_alpha(alpha);
  check_window(f, T, 2);
  auto r = make_report("Y_T", f, alpha, T, options);
  double sup0 = 0.0, supa = 0.0;
  std::vector<TensorComponents> slices;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double t = f.times()[j];
    sup0 = std::max(sup0, std::sqrt(t) * f.slice(j).sup_norm());
    supa = std::max(supa, std::pow(t, 0.5 + 0.25 * alpha) *
                              holder_seminorm(f.slice(j), alpha, options.holder));
    slices.push_back(scalar_tensor(f.slice(j)));
  }
  r.terms = {{"sup_t^{1/2}|f|_0", sup0},
             {"sup_t^{1/2+a/4}[f]_a", supa},
             {"time_holder_f", time_holder(f.times(), slices, 0.5 + 0.25 * alpha, alpha,
                                           options.max_pair_gap)}};
  finish(r);
  return r;
}

NormReport x_norm(const SpaceTimeField& u, double alpha, double T, const NormOptions& options) {
  check_alpha(alpha);
  check_window(u, T, 3);
  auto r = make_report("X_T", u, alpha, T, options);
  const auto dt = time_derivative(u);
  double supk[5] = {0, 0, 0, 0, 0};
  double hold4 = 0.0, supdt = 0.0, holddt = 0.0;
  std::vector<TensorComponents> d4, dts;
  const double wa = 0.5 + 0.25 * alpha;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double t = u.times()[j];
    for (int k = 0; k <= 4; ++k) {
      auto tensor = covariant_derivative(u.slice(j), k, options.metric);
      supk[k] = std::max(supk[k], std::pow(t, -0.5 + 0.25 * k) * tensor_norm(tensor).sup_norm());
      if (k == 4) {
        hold4 = std::max(hold4, std::pow(t, wa) * holder_seminorm(tensor, alpha, options.holder));
        d4.push_back(std::move(tensor));
      }
    }
    supdt = std::max(supdt, std::sqrt(t) * dt[j].sup_norm());
    holddt = std::max(holddt, std::pow(t, wa) * holder_seminorm(dt[j], alpha, options.holder));
    dts.push_back(scalar_tensor(dt[j]));
  }
  for (int k = 0; k <= 4; ++k)
    r.terms.push_back({"sup_t^{-1/2+" + std::to_string(k) + "/4}|D^" + std::to_string(k) + "u|_0",
                       supk[k]});
  r.terms.push_back({"sup_t^{1/2+a/4}[D^4u]_a", hold4});
  r.terms.push_back({"sup_t^{1/2}|u_t|_0", supdt});
  r.terms.push_back({"sup_t^{1/2+a/4}[u_t]_a", holddt});
  r.terms.push_back(
      {"time_holder_D^4u", time_holder(u.times(), d4, wa, alpha, options.max_pair_gap)});
  r.terms.push_back(
      {"time_holder_u_t", time_holder(u.times(), dts, wa, alpha, options.max_pair_gap)});
  finish(r);
  return r;
}

NormReport x_norm_extended(const SpaceTimeField& u, double alpha, double T,
                           const NormOptions& options) {
  auto r = x_norm(u, alpha, T, options);
  r.space = "X_T'";
  for (int k = 0; k <= 3; ++k) {
    std::vector<TensorComponents> dk;
    for (std::size_t j = 0; j < u.size(); ++j)
      dk.push_back(covariant_derivative(u.slice(j), k, options.metric));
    r.terms.push_back({"time_holder_D^" + std::to_string(k) + "u",
                       time_holder(u.times(), dk, -0.5 + 0.25 * k + 0.25 * alpha, alpha,
                                   options.max_pair_gap)});
  }
  finish(r);
  return r;
}

std::vector<SmoothingRow> SmoothingProfile::series(int k, int l) const {
  std::vector<SmoothingRow> out;
  for (const auto& r : rows)
    if (r.k == k && r.l == l) out.push_back(r);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  return out;
}

CsvTable SmoothingProfile::to_csv() const {
  CsvTable table({"t", "k", "l", "weighted_value", "raw_value"});
  for (const auto& r : rows)
    table.add_cells({fmt17(r.t), std::to_string(r.k), std::to_string(r.l), fmt17(r.weighted),
                     fmt17(r.raw)});
  return table;
}

SmoothingProfile smoothing_profile(const SpaceTimeField& u, const SmoothingOptions& options) {
  if (options.k_max < 0 || options.l_max < 0 || options.l_max > 2)
    throw std::invalid_argument("smoothing_profile: need k_max >= 0 and 0 <= l_max <= 2");
  std::vector<SpectralField> base;
  for (const auto& s : u.slices())
    base.push_back(options.apply_ddbar ? 0.25 * laplacian(s) : s);
  std::vector<std::vector<SpectralField>> levels{base};
  for (int l = 1; l <= options.l_max; ++l) {
    if (u.size() < 3) break;
    levels.push_back(time_derivative(SpaceTimeField(u.times(), levels.back())));
  }
  SmoothingProfile p;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double t = u.times()[j];
      for (int k = 0; k <= options.k_max; ++k) {
        const double raw =
            tensor_norm(covariant_derivative(levels[l][j], k, options.metric)).sup_norm();
        p.rows.push_back({t, k, int(l), std::pow(t, double(l) + 0.25 * k) * raw, raw});
      }
    }
  }
  return p;
}

SlopeFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("loglog_slope: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) continue;
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
    ++n;
  }
  if (n < 2) throw InsufficientData("loglog_slope: fewer than two positive points");
  SlopeFit f;
  f.points = n;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

SlopeFit smoothing_slope(const SmoothingProfile& profile, int k, int l, double t_lo, double t_hi) {
  std::vector<double> t, v;
  for (const auto& r : profile.series(k, l)) {
    if (r.t < t_lo || r.t > t_hi) continue;
    t.push_back(r.t);
    v.push_back(r.raw);
  }
  return loglog_slope(t, v);
}

}  // namespace bflab
