#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace bflab {

using cplx = std::complex<double>;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Periodic tensor grid on [0, period)^dim with n points per axis.
class Grid {
 public:
  Grid(int dim, int points_per_axis, double period = kTwoPi);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double period() const { return period_; }
  double spacing() const { return period_ / n_; }
  double cell_volume() const;
  double volume() const;
  std::size_t size() const;
  // r2c layout: 1-D has n/2+1 modes; 2-D is n x (n/2+1), x-major.
  std::size_t spectral_size() const;
  double coord(int i) const { return i * spacing(); }
  // Signed integer mode for a full-axis index in [0, n).
  int signed_mode(int index) const { return index <= n_ / 2 ? index : index - n_; }
  double base_wavenumber() const { return kTwoPi / period_; }

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  int dim_;
  int n_;
  double period_;
};

struct ModeIndex {
  std::size_t flat;
  int mx;
  int my;
  bool nyquist_x;
  bool nyquist_y;
};

// Visits every stored r2c mode with its signed integer wavenumbers.
void for_each_mode(const Grid& grid, const std::function<void(const ModeIndex&)>& visit);

// Samples plus normalized Fourier coefficients, f(x) = sum_k c_k e^{ik.x}.
// Both representations are filled at construction; the object is immutable.
class SpectralField {
 public:
  explicit SpectralField(const Grid& grid);
  SpectralField(const Grid& grid, std::vector<double> samples);

  static SpectralField from_coefficients(const Grid& grid, std::vector<cplx> coefficients);
  static SpectralField from_function(const Grid& grid,
                                     const std::function<double(double, double)>& f);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& samples() const { return samples_; }
  const std::vector<cplx>& coefficients() const { return coeffs_; }
  double operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const { return samples_.size(); }

  double mean() const;
  double integral() const;
  double sup_norm() const;
  double min() const;
  double max() const;

 private:
  SpectralField(const Grid& grid, std::vector<double> samples, std::vector<cplx> coeffs);

  Grid grid_;
  std::vector<double> samples_;
  std::vector<cplx> coeffs_;
};

SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(double s, const SpectralField& a);
SpectralField pointwise_product(const SpectralField& a, const SpectralField& b);
SpectralField pointwise_map(const SpectralField& a, const std::function<double(double)>& f);

// order has one entry per axis; multiplies coefficients by (i k)^order.
SpectralField derivative(const SpectralField& field, std::span<const int> order);
SpectralField derivative(const SpectralField& field, std::initializer_list<int> order);

// Multiplies every mode by symbol(kx, ky) (real wavenumbers, ky = 0 in 1-D).
SpectralField apply_symbol(const SpectralField& field,
                           const std::function<cplx(double, double)>& symbol);

SpectralField laplacian(const SpectralField& field);

// Product with 2/3-rule truncation on both inputs and the output.
SpectralField dealiased_product(const SpectralField& f, const SpectralField& g);
SpectralField truncate_two_thirds(const SpectralField& f);

// Exact integral of |f| for a band-limited 1-D field (antiderivative between zeros).
double l1_norm_bandlimited(const SpectralField& field);

// Components of the k-th derivative tensor with their multiplicities, so that
// |D^k f|^2 = sum_j weight_j * component_j^2 pointwise.
struct TensorComponents {
  std::vector<SpectralField> components;
  std::vector<double> weights;
};
TensorComponents derivative_tensor(const SpectralField& field, int k);
SpectralField tensor_norm(const TensorComponents& tensor);

struct HolderPolicy {
  double cap_fraction = 0.25;
  int exhaustive_max_points = 256;
  std::size_t sampled_pairs = std::size_t{1} << 20;
  std::uint64_t seed = 0x5eed5eedULL;
};

double holder_seminorm(const SpectralField& field, double alpha, const HolderPolicy& policy = {});
// Vector-valued seminorm: |v(x) - v(y)| uses sum_j weight_j * (difference_j)^2.
double holder_seminorm(const TensorComponents& tensor, double alpha,
                       const HolderPolicy& policy = {});

// Ascending geometric grid T r^{-(count-1)}, ..., T r^{-1}, T.
std::vector<double> geometric_times(double T, int count, double ratio = 1.189207115002721);

class SpaceTimeField {
 public:
  SpaceTimeField(std::vector<double> times, std::vector<SpectralField> slices);

  const std::vector<double>& times() const { return times_; }
  const std::vector<SpectralField>& slices() const { return slices_; }
  const SpectralField& slice(std::size_t j) const { return slices_[j]; }
  const Grid& grid() const { return slices_.front().grid(); }
  std::size_t size() const { return times_.size(); }

 private:
  std::vector<double> times_;
  std::vector<SpectralField> slices_;
};

SpaceTimeField map_slices(const SpaceTimeField& u,
                          const std::function<SpectralField(const SpectralField&, double)>& f);

}  // namespace bflab
