#pragma once

#include <functional>
#include <vector>

namespace bflab {

// Gauss-Legendre rule on [-1, 1].
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Supported orders: 8, 16, 24, 32, 48, 64.
const QuadRule& gauss_legendre(int order);

// Maps a rule to [a, b] and accumulates f into sum.
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    const QuadRule& rule);

// Adaptive Gauss-Kronrod; throws NumericalFailure if the error estimate
// exceeds max(abs_tol, rel_tol * |result|).
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol = 1e-12, unsigned max_depth = 18);

// Integral of |f| over [a, b]: sign changes are bracketed on a uniform scan of
// scan_points and refined by root finding; each sign-definite piece is
// integrated adaptively.
double integrate_abs(const std::function<double(double)>& f, double a, double b,
                     int scan_points, double abs_tol);

}  // namespace bflab
