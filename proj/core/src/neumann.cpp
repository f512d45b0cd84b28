#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bflab/errors.hpp"
#include "bflab/parametrix.hpp"

namespace bflab {

namespace {

std::vector<double> node_times(double tau0, double T, double ratio) {
  const int count = static_cast<int>(std::ceil(std::log(T / tau0) / std::log(ratio))) + 1;
  std::vector<double> t(count);
  for (int k = 0; k < count; ++k) t[k] = T * std::pow(ratio, -(count - 1 - k));
  t.back() = T;
  return t;
}

// int_0^T F dt from node samples: linear to zero below the first node, trapezoid above.
double integrate_nodes(const std::vector<double>& t, const std::vector<double>& f) {
  double s = 0.5 * t.front() * f.front();
  for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
  return s;
}

double loglog_fit(const std::vector<double>& t, const std::vector<double>& f) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(f[i] > 0.0)) continue;
    const double x = std::log(t[i]), y = std::log(f[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++m;
  }
  if (m < 2) return std::nan("");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

ConvolutionOptions series_convolution(const NeumannOptions& o, double tau0) {
  ConvolutionOptions c = o.convolution;
  c.min_time = std::min(c.min_time, 1e-2 * tau0);
  return c;
}

}  // namespace

Eigen::MatrixXd NeumannSeries::psi(double t) const {
  Eigen::MatrixXd k = parametrix->defect(t);
  if (tail) k += tail->at(t);
  return k;
}

CsvTable NeumannSeries::to_csv() const {
  CsvTable csv({"m", "sup_norm", "fit_exponent"});
  for (const auto& r : record) csv.add({double(r.m), r.sup_norm, r.fit_exponent});
  return csv;
}

NeumannSeries neumann_series(const ParametrixTable& parametrix, double T,
                             const NeumannOptions& options) {
  if (!(T > 0.0)) throw std::invalid_argument("neumann_series: T must be > 0");
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("neumann_series: tolerance must be > 0");
  if (options.max_iterates < 2) throw std::invalid_argument("neumann_series: max_iterates < 2");
  const auto& p = *parametrix.parametrix;
  const double h = p.grid().spacing();
  const double tau0 = options.node_floor * std::pow(h, 4);
  if (!(tau0 < T)) throw std::invalid_argument("neumann_series: T below the first node");
  const auto nodes = node_times(tau0, T, options.node_ratio);
  const auto conv = series_convolution(options, tau0);
  const Eigen::VectorXd& dv = p.volume_weights();
  const int M = options.max_iterates;
  const std::size_t nt = nodes.size();

  // tables[m] holds K_{m+1} at the nodes; tables[0] is K itself.
  const Eigen::Index n = p.grid().n();
  std::vector<TabulatedKernel> tables(
      M, TabulatedKernel(nodes, std::vector<Eigen::MatrixXd>(nt, Eigen::MatrixXd::Zero(n, n))));
  for (std::size_t i = 0; i < nt; ++i) {
    const auto rule = convolution_rule(nodes[i], conv);
    // Nodes come in pairs (s, t - s); K at each s also serves as K(t - s) for its partner.
    std::vector<Eigen::MatrixXd> kq(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) kq[q] = p.defect(rule[q].s);
    std::vector<Eigen::MatrixXd> aw(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) aw[q] = rule[q].weight * kq[q ^ 1] * dv.asDiagonal();
    tables[0].set(i, p.defect(nodes[i]));
    for (int m = 1; m < M; ++m) {
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
      for (std::size_t q = 0; q < rule.size(); ++q)
        acc.noalias() += aw[q] * (m == 1 ? kq[q] : tables[m - 1].at(rule[q].s, i));
      tables[m].set(i, std::move(acc));
    }
  }
  auto vals = [&](int m, std::size_t i) -> const Eigen::MatrixXd& { return tables[m].values()[i]; };

  NeumannSeries out;
  out.parametrix = parametrix.parametrix;
  out.nodes = nodes;
  out.tolerance = options.tolerance;
  std::vector<double> window;
  std::vector<std::size_t> window_index;
  for (std::size_t i = 0; i < nt; ++i)
    if (nodes[i] >= options.window_factor * std::pow(h, 4)) {
      window.push_back(nodes[i]);
      window_index.push_back(i);
    }
  if (window.size() < 2) throw InsufficientData("neumann_series: validated window too short");

  for (int m = 0; m < M; ++m) {
    std::vector<double> sup_all(nt), sup_win;
    for (std::size_t i = 0; i < nt; ++i) sup_all[i] = vals(m, i).cwiseAbs().maxCoeff();
    for (std::size_t i : window_index) sup_win.push_back(sup_all[i]);
    NeumannIterate r;
    r.m = m + 1;
    r.sup_norm = *std::max_element(sup_win.begin(), sup_win.end());
    r.integrated = integrate_nodes(nodes, sup_all);
    r.fit_exponent = loglog_fit(window, sup_win);
    if (m == 0) out.scale = r.integrated;
    out.record.push_back(r);
    if (r.m >= options.divergence_check && r.sup_norm >= out.record[m - 1].sup_norm)
      throw NumericalFailure("neumann_series: iterates not decreasing by m = " +
                             std::to_string(r.m) + "; reduce T or the perturbation");
    if (!out.converged && r.integrated < options.tolerance * out.scale) {
      out.converged = true;
      out.used = r.m;
    }
  }
  if (!out.converged) out.used = M;
  const int used = out.used;

  std::vector<Eigen::MatrixXd> tail(nt, Eigen::MatrixXd::Zero(n, n));
  for (int m = 1; m < used; ++m) {
    for (std::size_t i = 0; i < nt; ++i) tail[i] += vals(m, i);
    out.iterates.push_back(tables[m]);
  }
  out.tail = std::make_shared<const TabulatedKernel>(nodes, std::move(tail));

  // Psi - K - K * Psi on every third node and geometric midpoint, integrated in t.
  auto residual_at = [&](double t) {
    const auto rule = convolution_rule(t, conv);
    std::vector<Eigen::MatrixXd> kq(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) kq[q] = p.defect(rule[q].s);
    Eigen::MatrixXd r = out.tail->at(t);
    for (std::size_t q = 0; q < rule.size(); ++q)
      r -= rule[q].weight * kq[q ^ 1] * dv.asDiagonal() * (kq[q] + out.tail->at(rule[q].s));
    return r.cwiseAbs().maxCoeff();
  };
  constexpr std::size_t kStride = 3;
  for (std::size_t i = 0; i + kStride < nt; i += kStride) {
    const double span = nodes[i + kStride] - nodes[i];
    out.residual_nodes += span * residual_at(nodes[i + kStride]);
    out.residual_midpoints += span * residual_at(std::sqrt(nodes[i + 1] * nodes[i + 2]));
  }
  out.residual_nodes /= out.scale;
  out.residual_midpoints /= out.scale;
  return out;
}

Eigen::MatrixXd assembled_kernel_at(const Parametrix& parametrix, const NeumannSeries& series,
                                    double t, const ConvolutionOptions& options) {
  ConvolutionOptions conv = options;
  conv.min_time = std::min(conv.min_time, 1e-2 * series.nodes.front());
  const Eigen::VectorXd& dv = parametrix.volume_weights();
  Eigen::MatrixXd b = parametrix.z(t);
  for (const auto& q : convolution_rule(t, conv))
    b += q.weight * parametrix.z(q.complement) * dv.asDiagonal() * series.psi(q.s);
  return b;
}

CsvTable AssembledKernel::validation_csv() const {
  CsvTable csv({"t", "row_l1_error", "mass_error", "pde_residual"});
  for (const auto& r : validation) csv.add({r.t, r.row_l1_error, r.mass_error, r.pde_residual});
  return csv;
}

AssembledKernel assemble_kernel(const ParametrixTable& parametrix, const NeumannSeries& series,
                                const std::vector<double>& times,
                                const ConvolutionOptions& options) {
  const auto& p = *parametrix.parametrix;
  const Eigen::VectorXd& dv = p.volume_weights();
  const auto& op = p.op();
  std::vector<Eigen::MatrixXd> mats;
  std::vector<AssemblyRow> rows;
  for (double t : times) {
    if (!(t > 0.0) || t > series.nodes.back() * (1.0 + 1e-12))
      throw ResolutionError("assemble_kernel: t outside the tabulated range of Psi");
    Eigen::MatrixXd b = assembled_kernel_at(p, series, t, options);
    AssemblyRow r;
    r.t = t;
    r.row_l1_error = row_l1_error(b, op.kernel(t), dv);
    r.mass_error = ((b * dv).array() - 1.0).abs().maxCoeff();
    r.asymmetry = (b - b.transpose()).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
    // Four-point centered d_t; the stencil must stay inside the tabulated range.
    const double dt = 0.02 * t;
    if (t + 2.0 * dt <= series.nodes.back()) {
      Eigen::MatrixXd f[4];
      const double c[4] = {-2.0, -1.0, 1.0, 2.0};
      for (int k = 0; k < 4; ++k) f[k] = assembled_kernel_at(p, series, t + c[k] * dt, options);
      const Eigen::MatrixXd bt = (f[0] - f[3] + 8.0 * (f[2] - f[1])) / (12.0 * dt);
      const Eigen::MatrixXd lb = op.bilaplacian() * b;
      r.pde_residual = (bt + lb).cwiseAbs().maxCoeff() / lb.cwiseAbs().maxCoeff();
    } else {
      r.pde_residual = std::nan("");
    }
    rows.push_back(r);
    mats.push_back(std::move(b));
  }
  AssembledKernel out{KernelTable::dense(p.grid(), times, std::move(mats), dv,
                                         KernelConstruction::Parametrix, p.metric().is_flat()),
                      std::move(rows)};
  return out;
}

}  // namespace bflab
