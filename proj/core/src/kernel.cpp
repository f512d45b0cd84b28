#include "bflab/kernel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bflab/errors.hpp"

namespace bflab {

MetricSpec MetricSpec::flat(int dim) {
  MetricSpec m;
  m.dim = dim;
  return m;
}

MetricSpec MetricSpec::conformal(double epsilon, int dim,
                                 std::function<double(double, double)> profile) {
  MetricSpec m;
  m.kind = Kind::Conformal;
  m.epsilon = epsilon;
  m.dim = dim;
  m.profile = std::move(profile);
  return m;
}

SpectralField MetricSpec::conformal_factor(const Grid& grid) const {
  if (grid.dim() != dim) throw std::invalid_argument("MetricSpec: grid dimension mismatch");
  if (is_flat()) return SpectralField::from_function(grid, [](double, double) { return 1.0; });
  auto shape = profile ? profile : [](double x, double) { return std::cos(x); };
  const double eps = epsilon;
  auto f = SpectralField::from_function(grid,
                                        [&](double x, double y) { return 1.0 + eps * shape(x, y); });
  if (!(f.min() > 0.0))
    throw std::invalid_argument("MetricSpec: conformal factor must stay positive");
  return f;
}

std::string to_string(KernelConstruction c) {
  switch (c) {
    case KernelConstruction::Spectral: return "spectral";
    case KernelConstruction::Parametrix: return "parametrix";
    case KernelConstruction::MatrixExponential: return "matrix-exponential";
  }
  return "unknown";
}

KernelTable KernelTable::circulant(const Grid& grid, std::vector<double> times,
                                   std::vector<SpectralField> offsets, bool flat_operator) {
  if (times.size() != offsets.size()) throw std::invalid_argument("KernelTable: size mismatch");
  KernelTable k(grid);
  k.times_ = std::move(times);
  k.offsets_ = std::move(offsets);
  k.weights_ = Eigen::VectorXd::Constant(Eigen::Index(grid.size()), grid.cell_volume());
  k.construction_ = KernelConstruction::Spectral;
  k.flat_operator_ = flat_operator;
  return k;
}

KernelTable KernelTable::dense(const Grid& grid, std::vector<double> times,
                               std::vector<Eigen::MatrixXd> matrices,
                               Eigen::VectorXd volume_weights, KernelConstruction construction,
                               bool flat_operator) {
  if (grid.dim() != 1) throw std::invalid_argument("KernelTable: dense tables are 1-D only");
  if (times.size() != matrices.size()) throw std::invalid_argument("KernelTable: size mismatch");
  KernelTable k(grid);
  k.times_ = std::move(times);
  k.matrices_ = std::move(matrices);
  k.weights_ = std::move(volume_weights);
  k.construction_ = construction;
  k.flat_operator_ = flat_operator;
  return k;
}

double KernelTable::value(std::size_t ti, std::size_t i, std::size_t j) const {
  if (!is_circulant()) return matrices_.at(ti)(Eigen::Index(i), Eigen::Index(j));
  const int n = grid_.n();
  if (grid_.dim() == 1) return offsets_.at(ti)[(i + n - j) % n];
  const std::size_t ix = i / n, iy = i % n, jx = j / n, jy = j % n;
  return offsets_.at(ti)[((ix + n - jx) % n) * n + (iy + n - jy) % n];
}

Eigen::MatrixXd KernelTable::matrix(std::size_t ti) const {
  if (!is_circulant()) return matrices_.at(ti);
  if (grid_.dim() != 1) throw std::invalid_argument("KernelTable::matrix: 1-D only");
  const int n = grid_.n();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = offsets_.at(ti)[(i + n - j) % n];
  return m;
}

std::optional<std::size_t> KernelTable::time_index(double t) const {
  for (std::size_t i = 0; i < times_.size(); ++i)
    if (std::abs(times_[i] - t) <= 1e-14 * std::abs(t)) return i;
  return std::nullopt;
}

double KernelTable::row_mass(std::size_t ti, std::size_t i) const {
  double s = 0.0;
  if (is_circulant()) {
    for (double v : offsets_.at(ti).samples()) s += v;
    return s * grid_.cell_volume();
  }
  const auto& m = matrices_.at(ti);
  for (Eigen::Index j = 0; j < m.cols(); ++j) s += m(Eigen::Index(i), j) * weights_(j);
  return s;
}

double KernelTable::max_mass_error() const {
  double e = 0.0;
  for (std::size_t ti = 0; ti < times_.size(); ++ti) {
    const std::size_t rows = is_circulant() ? 1 : grid_.size();
    for (std::size_t i = 0; i < rows; ++i) e = std::max(e, std::abs(row_mass(ti, i) - 1.0));
  }
  return e;
}

double KernelTable::max_asymmetry() const {
  double e = 0.0;
  for (std::size_t ti = 0; ti < times_.size(); ++ti) {
    if (is_circulant()) {
      const auto& s = offsets_[ti].samples();
      const int n = grid_.n();
      if (grid_.dim() == 1) {
        for (int d = 0; d < n; ++d) e = std::max(e, std::abs(s[d] - s[(n - d) % n]));
      } else {
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            e = std::max(e, std::abs(s[a * n + b] - s[((n - a) % n) * n + (n - b) % n]));
      }
    } else {
      const auto& m = matrices_[ti];
      e = std::max(e, (m - m.transpose()).cwiseAbs().maxCoeff());
    }
  }
  return e;
}

CsvTable KernelTable::to_csv() const {
  CsvTable table({"x_index", "y_index", "t", "value"});
  const std::size_t n = grid_.size();
  for (std::size_t ti = 0; ti < times_.size(); ++ti)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        table.add_cells({std::to_string(i), std::to_string(j), fmt17(times_[ti]),
                         fmt17(value(ti, i, j))});
  return table;
}

double flat_torus_min_time(const Grid& grid) {
  const double kn = grid.base_wavenumber() * (grid.n() / 2);
  return -std::log(1e-12) / std::pow(kn, 4);
}

KernelTable flat_torus_kernel(const Grid& grid, const std::vector<double>& times) {
  const double tmin = flat_torus_min_time(grid);
  std::vector<SpectralField> offsets;
  for (double t : times) {
    if (!(t > 0.0)) throw std::invalid_argument("flat_torus_kernel: times must be positive");
    if (t < tmin) {
      int need = grid.n();
      const double kappa = grid.base_wavenumber();
      while (std::exp(-std::pow(kappa * (need / 2), 4) * t) > 1e-12) need *= 2;
      std::ostringstream os;
      os << "flat_torus_kernel: t = " << t << " needs modes beyond the grid; requires at least "
         << need << " points per axis (have " << grid.n() << ")";
      throw ResolutionError(os.str());
    }
    const double vol = grid.volume();
    std::vector<cplx> c(grid.spectral_size(), cplx(0.0));
    const double kappa = grid.base_wavenumber();
    for_each_mode(grid, [&](const ModeIndex& m) {
      if (m.nyquist_x || m.nyquist_y) return;
      const double k2 = kappa * kappa * (double(m.mx) * m.mx + double(m.my) * m.my);
      c[m.flat] = std::exp(-k2 * k2 * t) / vol;
    });
    offsets.push_back(SpectralField::from_coefficients(grid, std::move(c)));
  }
  return KernelTable::circulant(grid, times, std::move(offsets), true);
}

}  // namespace bflab
