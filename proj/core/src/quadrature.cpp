#include "bflab/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "bflab/errors.hpp"

namespace bflab {

namespace {

template <unsigned N>
QuadRule make_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  QuadRule r;
  for (std::size_t i = x.size(); i-- > 0;) {
    if (x[i] == 0.0) continue;
    r.nodes.push_back(-x[i]);
    r.weights.push_back(w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.nodes.push_back(x[i]);
    r.weights.push_back(w[i]);
  }
  return r;
}

}  // namespace

const QuadRule& gauss_legendre(int order) {
  static const QuadRule r8 = make_rule<8>();
  static const QuadRule r16 = make_rule<16>();
  static const QuadRule r24 = make_rule<24>();
  static const QuadRule r32 = make_rule<32>();
  static const QuadRule r48 = make_rule<48>();
  static const QuadRule r64 = make_rule<64>();
  switch (order) {
    case 8: return r8;
    case 16: return r16;
    case 24: return r24;
    case 32: return r32;
    case 48: return r48;
    case 64: return r64;
    default: throw std::invalid_argument("gauss_legendre: unsupported order");
  }
}

double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    const QuadRule& rule) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    s += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return s * half;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol, unsigned max_depth) {
  if (a == b) return 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  struct Piece {
    double a, b, value, err;
    unsigned depth;
    bool operator<(const Piece& o) const { return err < o.err; }
  };
  auto eval = [&f](double lo, double hi, unsigned depth) {
    double err = 0.0;
    const double v = GK::integrate(f, lo, hi, 0, 0.0, &err);
    return Piece{lo, hi, v, err, depth};
  };
  // Global bisection of the piece with the largest error estimate.
  std::priority_queue<Piece> heap;
  heap.push(eval(a, b, 0));
  double value = heap.top().value;
  double err = heap.top().err;
  const std::size_t max_pieces = std::size_t{1} << std::min(max_depth, 14u);
  while (err > std::max(abs_tol, rel_tol * std::abs(value)) && heap.size() < max_pieces) {
    const Piece worst = heap.top();
    if (worst.depth >= max_depth) break;
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Piece left = eval(worst.a, mid, worst.depth + 1);
    const Piece right = eval(mid, worst.b, worst.depth + 1);
    value += left.value + right.value - worst.value;
    err += left.err + right.err - worst.err;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to avoid drift from the running updates.
  value = 0.0;
  err = 0.0;
  for (auto h = heap; !h.empty(); h.pop()) {
    value += h.top().value;
    err += h.top().err;
  }
  if (!std::isfinite(value) || err > std::max(abs_tol, rel_tol * std::abs(value)) * 10.0) {
    std::ostringstream os;
    os << "adaptive quadrature on [" << a << ", " << b << "] did not converge: value " << value
       << ", error estimate " << err;
    throw NumericalFailure(os.str());
  }
  return value;
}

double integrate_abs(const std::function<double(double)>& f, double a, double b,
                     int scan_points, double abs_tol) {
  std::vector<double> cuts{a};
  const double dx = (b - a) / scan_points;
  double prev = f(a);
  for (int i = 1; i <= scan_points; ++i) {
    const double x = a + i * dx;
    const double cur = f(x);
    if (prev != 0.0 && cur != 0.0 && (prev < 0.0) != (cur < 0.0)) {
      boost::uintmax_t iters = 80;
      auto tol = boost::math::tools::eps_tolerance<double>(52);
      auto r = boost::math::tools::toms748_solve(f, x - dx, x, prev, cur, tol, iters);
      cuts.push_back(0.5 * (r.first + r.second));
    }
    prev = cur;
  }
  cuts.push_back(b);
  double total = 0.0;
  const double piece_tol = abs_tol / static_cast<double>(cuts.size());
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    total += std::abs(integrate_adaptive(f, cuts[k], cuts[k + 1], piece_tol, 1e-13));
  return total;
}

}  // namespace bflab
