#include "bflab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace bflab {

namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// Plans are created once per shape under a lock and executed through the
// new-array interface, which is thread safe.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanPair get(int dim, int n) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(dim, n);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    const std::size_t real_size = dim == 1 ? std::size_t(n) : std::size_t(n) * n;
    const std::size_t cplx_size =
        dim == 1 ? std::size_t(n / 2 + 1) : std::size_t(n) * (n / 2 + 1);
    double* in = fftw_alloc_real(real_size);
    fftw_complex* out = fftw_alloc_complex(cplx_size);
    PlanPair p;
    if (dim == 1) {
      p.forward = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
      p.inverse = fftw_plan_dft_c2r_1d(n, out, in, FFTW_ESTIMATE);
    } else {
      p.forward = fftw_plan_dft_r2c_2d(n, n, in, out, FFTW_ESTIMATE);
      p.inverse = fftw_plan_dft_c2r_2d(n, n, out, in, FFTW_ESTIMATE);
    }
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, PlanPair> plans_;
};

struct RealBuffer {
  explicit RealBuffer(std::size_t n) : ptr(fftw_alloc_real(n)) {}
  ~RealBuffer() { fftw_free(ptr); }
  RealBuffer(const RealBuffer&) = delete;
  RealBuffer& operator=(const RealBuffer&) = delete;
  double* ptr;
};

struct ComplexBuffer {
  explicit ComplexBuffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {}
  ~ComplexBuffer() { fftw_free(ptr); }
  ComplexBuffer(const ComplexBuffer&) = delete;
  ComplexBuffer& operator=(const ComplexBuffer&) = delete;
  fftw_complex* ptr;
};

std::vector<cplx> forward_transform(const Grid& grid, const std::vector<double>& samples) {
  const auto plans = PlanCache::instance().get(grid.dim(), grid.n());
  RealBuffer in(grid.size());
  ComplexBuffer out(grid.spectral_size());
  std::copy(samples.begin(), samples.end(), in.ptr);
  fftw_execute_dft_r2c(plans.forward, in.ptr, out.ptr);
  const double scale = 1.0 / static_cast<double>(grid.size());
  std::vector<cplx> coeffs(grid.spectral_size());
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    coeffs[i] = cplx(out.ptr[i][0], out.ptr[i][1]) * scale;
  return coeffs;
}

std::vector<double> inverse_transform(const Grid& grid, const std::vector<cplx>& coeffs) {
  const auto plans = PlanCache::instance().get(grid.dim(), grid.n());
  ComplexBuffer in(grid.spectral_size());
  RealBuffer out(grid.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    in.ptr[i][0] = coeffs[i].real();
    in.ptr[i][1] = coeffs[i].imag();
  }
  fftw_execute_dft_c2r(plans.inverse, in.ptr, out.ptr);
  return std::vector<double>(out.ptr, out.ptr + grid.size());
}

// Self-conjugate modes must be real; paired modes on the ky = 0 and ky = n/2
// columns must be conjugates. Returns the largest violation before repair.
double enforce_hermitian(const Grid& grid, std::vector<cplx>& c) {
  const int n = grid.n();
  const int h = n / 2;
  double drift = 0.0;
  if (grid.dim() == 1) {
    drift = std::max(std::abs(c[0].imag()), std::abs(c[h].imag()));
    c[0].imag(0.0);
    c[h].imag(0.0);
    return drift;
  }
  const int stride = h + 1;
  for (int my : {0, h}) {
    for (int ix = 0; ix <= h; ++ix) {
      const int jx = (n - ix) % n;
      cplx& a = c[std::size_t(ix) * stride + my];
      cplx& b = c[std::size_t(jx) * stride + my];
      drift = std::max(drift, std::abs(a - std::conj(b)));
      const cplx avg = 0.5 * (a + std::conj(b));
      a = avg;
      b = std::conj(avg);
    }
  }
  return drift;
}

// Multipliers applied to Hermitian input; repairs the rounding of symbols with large |k|.
SpectralField from_symbol_output(const Grid& grid, std::vector<cplx> c) {
  enforce_hermitian(grid, c);
  return SpectralField::from_coefficients(grid, std::move(c));
}

}  // namespace

Grid::Grid(int dim, int points_per_axis, double period)
    : dim_(dim), n_(points_per_axis), period_(period) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("Grid: dim must be 1 or 2");
  if (points_per_axis < 16 || (points_per_axis & (points_per_axis - 1)) != 0)
    throw std::invalid_argument("Grid: points_per_axis must be a power of two >= 16");
  if (!(period > 0.0) || !std::isfinite(period))
    throw std::invalid_argument("Grid: period must be positive");
}

double Grid::cell_volume() const { return dim_ == 1 ? spacing() : spacing() * spacing(); }
double Grid::volume() const { return dim_ == 1 ? period_ : period_ * period_; }

std::size_t Grid::size() const {
  return dim_ == 1 ? std::size_t(n_) : std::size_t(n_) * std::size_t(n_);
}

std::size_t Grid::spectral_size() const {
  return dim_ == 1 ? std::size_t(n_ / 2 + 1) : std::size_t(n_) * std::size_t(n_ / 2 + 1);
}

bool Grid::operator==(const Grid& other) const {
  return dim_ == other.dim_ && n_ == other.n_ && period_ == other.period_;
}

void for_each_mode(const Grid& grid, const std::function<void(const ModeIndex&)>& visit) {
  const int n = grid.n();
  const int h = n / 2;
  if (grid.dim() == 1) {
    for (int m = 0; m <= h; ++m) visit(ModeIndex{std::size_t(m), m, 0, m == h, false});
    return;
  }
  for (int ix = 0; ix < n; ++ix) {
    const int mx = grid.signed_mode(ix);
    for (int my = 0; my <= h; ++my)
      visit(ModeIndex{std::size_t(ix) * (h + 1) + my, mx, my, ix == h, my == h});
  }
}

SpectralField::SpectralField(const Grid& grid)
    : grid_(grid), samples_(grid.size(), 0.0), coeffs_(grid.spectral_size(), cplx(0.0, 0.0)) {}

SpectralField::SpectralField(const Grid& grid, std::vector<double> samples) : grid_(grid) {
  if (samples.size() != grid.size())
    throw std::invalid_argument("SpectralField: sample count does not match grid");
  for (double v : samples)
    if (!std::isfinite(v)) throw std::invalid_argument("SpectralField: non-finite sample");
  coeffs_ = forward_transform(grid, samples);
  samples_ = std::move(samples);
}

SpectralField::SpectralField(const Grid& grid, std::vector<double> samples,
                             std::vector<cplx> coeffs)
    : grid_(grid), samples_(std::move(samples)), coeffs_(std::move(coeffs)) {}

SpectralField SpectralField::from_coefficients(const Grid& grid, std::vector<cplx> coefficients) {
  if (coefficients.size() != grid.spectral_size())
    throw std::invalid_argument("SpectralField: coefficient count does not match grid");
  double scale = 0.0;
  for (const auto& c : coefficients) scale = std::max(scale, std::abs(c));
  const double drift = enforce_hermitian(grid, coefficients);
  if (drift > 1e-10 * std::max(scale, 1e-300) && drift > 1e-300)
    throw std::logic_error("SpectralField: conjugate symmetry drift " + std::to_string(drift));
  auto samples = inverse_transform(grid, coefficients);
  return SpectralField(grid, std::move(samples), std::move(coefficients));
}

SpectralField SpectralField::from_function(const Grid& grid,
                                           const std::function<double(double, double)>& f) {
  std::vector<double> s(grid.size());
  const int n = grid.n();
  if (grid.dim() == 1) {
    for (int i = 0; i < n; ++i) s[i] = f(grid.coord(i), 0.0);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s[std::size_t(i) * n + j] = f(grid.coord(i), grid.coord(j));
  }
  return SpectralField(grid, std::move(s));
}

double SpectralField::mean() const { return coeffs_[0].real(); }
double SpectralField::integral() const { return coeffs_[0].real() * grid_.volume(); }

double SpectralField::sup_norm() const {
  double m = 0.0;
  for (double v : samples_) m = std::max(m, std::abs(v));
  return m;
}

double SpectralField::min() const { return *std::min_element(samples_.begin(), samples_.end()); }
double SpectralField::max() const { return *std::max_element(samples_.begin(), samples_.end()); }

namespace {

void require_same_grid(const SpectralField& a, const SpectralField& b, const char* what) {
  if (a.grid() != b.grid()) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

SpectralField combine(const SpectralField& a, const SpectralField& b, double sb) {
  std::vector<double> s(a.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = a[i] + sb * b[i];
  return SpectralField(a.grid(), std::move(s));
}

}  // namespace

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a, b, "operator+");
  return combine(a, b, 1.0);
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a, b, "operator-");
  return combine(a, b, -1.0);
}

SpectralField operator*(double s, const SpectralField& a) {
  std::vector<double> v(a.samples());
  for (double& x : v) x *= s;
  return SpectralField(a.grid(), std::move(v));
}

SpectralField pointwise_product(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a, b, "pointwise_product");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
  return SpectralField(a.grid(), std::move(v));
}

SpectralField pointwise_map(const SpectralField& a, const std::function<double(double)>& f) {
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(a[i]);
  return SpectralField(a.grid(), std::move(v));
}

SpectralField derivative(const SpectralField& field, std::span<const int> order) {
  const Grid& g = field.grid();
  if (order.size() != std::size_t(g.dim()))
    throw std::invalid_argument("derivative: order must have one entry per axis");
  for (int o : order)
    if (o < 0) throw std::invalid_argument("derivative: negative order");
  const int ox = order[0];
  const int oy = g.dim() == 2 ? order[1] : 0;
  if (ox == 0 && oy == 0) return field;
  const double kappa = g.base_wavenumber();
  std::vector<cplx> c(field.coefficients());
  const cplx I(0.0, 1.0);
  for_each_mode(g, [&](const ModeIndex& m) {
    if ((m.nyquist_x && ox % 2 == 1) || (m.nyquist_y && oy % 2 == 1)) {
      c[m.flat] = 0.0;
      return;
    }
    const cplx fx = std::pow(I * (kappa * m.mx), ox);
    const cplx fy = oy == 0 ? cplx(1.0) : std::pow(I * (kappa * m.my), oy);
    c[m.flat] *= fx * fy;
  });
  return from_symbol_output(g, std::move(c));
}

SpectralField derivative(const SpectralField& field, std::initializer_list<int> order) {
  std::vector<int> o(order);
  return derivative(field, std::span<const int>(o));
}

SpectralField apply_symbol(const SpectralField& field,
                           const std::function<cplx(double, double)>& symbol) {
  const Grid& g = field.grid();
  const double kappa = g.base_wavenumber();
  std::vector<cplx> c(field.coefficients());
  for_each_mode(g, [&](const ModeIndex& m) { c[m.flat] *= symbol(kappa * m.mx, kappa * m.my); });
  return from_symbol_output(g, std::move(c));
}

SpectralField laplacian(const SpectralField& field) {
  return apply_symbol(field, [](double kx, double ky) { return cplx(-(kx * kx + ky * ky)); });
}

SpectralField truncate_two_thirds(const SpectralField& f) {
  const Grid& g = f.grid();
  const int n = g.n();
  std::vector<cplx> c(f.coefficients());
  for_each_mode(g, [&](const ModeIndex& m) {
    if (3 * std::abs(m.mx) >= n || 3 * std::abs(m.my) >= n) c[m.flat] = 0.0;
  });
  return from_symbol_output(g, std::move(c));
}

SpectralField dealiased_product(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f, g, "dealiased_product");
  const auto a = truncate_two_thirds(f);
  const auto b = truncate_two_thirds(g);
  return truncate_two_thirds(pointwise_product(a, b));
}

namespace {

// Evaluates a band-limited 1-D field and its antiderivative at arbitrary x.
struct Trig1D {
  const std::vector<cplx>& c;
  double kappa;
  int half;

  double value(double x) const {
    double s = c[0].real();
    const cplx step = std::polar(1.0, kappa * x);
    cplx e = step;
    for (int m = 1; m < half; ++m, e *= step) s += 2.0 * (c[m] * e).real();
    s += c[half].real() * std::cos(kappa * half * x);
    return s;
  }

  double antiderivative(double x) const {
    double s = c[0].real() * x;
    const cplx step = std::polar(1.0, kappa * x);
    cplx e = step;
    for (int m = 1; m < half; ++m, e *= step)
      s += 2.0 * (c[m] * e / cplx(0.0, kappa * m)).real();
    s += c[half].real() * std::sin(kappa * half * x) / (kappa * half);
    return s;
  }
};

}  // namespace

double l1_norm_bandlimited(const SpectralField& field) {
  const Grid& g = field.grid();
  if (g.dim() != 1) throw std::invalid_argument("l1_norm_bandlimited: 1-D fields only");
  const int n = g.n();
  const int refine = 8;
  const Grid fine(1, n * refine, g.period());
  std::vector<cplx> padded(fine.spectral_size(), cplx(0.0));
  const auto& c = field.coefficients();
  for (int m = 0; m < n / 2; ++m) padded[m] = c[m];
  // The Nyquist cosine splits evenly between +/- n/2 on the finer grid.
  padded[n / 2] = 0.5 * cplx(c[n / 2].real(), 0.0);
  const auto fine_field = SpectralField::from_coefficients(fine, std::move(padded));
  const auto& fv = fine_field.samples();

  Trig1D trig{c, g.base_wavenumber(), n / 2};
  const double dx = fine.spacing();
  std::vector<double> roots;
  const int nf = fine.n();
  for (int i = 0; i < nf; ++i) {
    const double a = fv[i];
    const double b = fv[(i + 1) % nf];
    const double xa = i * dx;
    if (a == 0.0) {
      roots.push_back(xa);
      continue;
    }
    if ((a < 0.0) == (b < 0.0) || b == 0.0) continue;
    auto f = [&](double x) { return trig.value(x); };
    boost::uintmax_t iters = 64;
    auto tol = boost::math::tools::eps_tolerance<double>(50);
    const double fa = f(xa);
    const double fb = f(xa + dx);
    if ((fa < 0.0) == (fb < 0.0)) {
      roots.push_back(xa + dx * a / (a - b));
      continue;
    }
    auto r = boost::math::tools::toms748_solve(f, xa, xa + dx, fa, fb, tol, iters);
    roots.push_back(0.5 * (r.first + r.second));
  }
  if (roots.empty()) return std::abs(c[0].real()) * g.period();
  double total = 0.0;
  for (std::size_t k = 0; k < roots.size(); ++k) {
    const double a = roots[k];
    const double b = k + 1 < roots.size() ? roots[k + 1] : roots[0] + g.period();
    total += std::abs(trig.antiderivative(b) - trig.antiderivative(a));
  }
  return total;
}

TensorComponents derivative_tensor(const SpectralField& field, int k) {
  if (k < 0) throw std::invalid_argument("derivative_tensor: negative order");
  TensorComponents t;
  if (field.grid().dim() == 1) {
    t.components.push_back(derivative(field, {k}));
    t.weights.push_back(1.0);
    return t;
  }
  double binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    t.components.push_back(derivative(field, {j, k - j}));
    t.weights.push_back(binom);
    binom = binom * (k - j) / (j + 1);
  }
  return t;
}

SpectralField tensor_norm(const TensorComponents& tensor) {
  const auto& first = tensor.components.front();
  std::vector<double> v(first.size(), 0.0);
  for (std::size_t c = 0; c < tensor.components.size(); ++c) {
    const auto& s = tensor.components[c].samples();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += tensor.weights[c] * s[i] * s[i];
  }
  for (double& x : v) x = std::sqrt(x);
  return SpectralField(first.grid(), std::move(v));
}

std::vector<double> geometric_times(double T, int count, double ratio) {
  if (!(T > 0.0) || count < 1 || !(ratio > 1.0))
    throw std::invalid_argument("geometric_times: need T > 0, count >= 1, ratio > 1");
  std::vector<double> t(count);
  for (int j = 0; j < count; ++j) t[j] = T * std::pow(ratio, -(count - 1 - j));
  t.back() = T;
  return t;
}

SpaceTimeField::SpaceTimeField(std::vector<double> times, std::vector<SpectralField> slices)
    : times_(std::move(times)), slices_(std::move(slices)) {
  if (times_.empty() || times_.size() != slices_.size())
    throw std::invalid_argument("SpaceTimeField: need one slice per time");
  for (std::size_t j = 0; j < times_.size(); ++j) {
    if (!(times_[j] > 0.0)) throw std::invalid_argument("SpaceTimeField: times must be > 0");
    if (j > 0 && !(times_[j] > times_[j - 1]))
      throw std::invalid_argument("SpaceTimeField: times must be strictly increasing");
    if (slices_[j].grid() != slices_[0].grid())
      throw std::invalid_argument("SpaceTimeField: slices must share one grid");
  }
}

SpaceTimeField map_slices(const SpaceTimeField& u,
                          const std::function<SpectralField(const SpectralField&, double)>& f) {
  std::vector<SpectralField> out;
  out.reserve(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) out.push_back(f(u.slice(j), u.times()[j]));
  return SpaceTimeField(u.times(), std::move(out));
}

}  // namespace bflab
