#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace pmrd {

// Adaptive Simpson quadrature with absolute+relative tolerance.
// Throws std::runtime_error (with the residual in the message) when the
// recursion depth is exhausted before the tolerance is met.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-10, int max_depth = 48);

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double fa, double b,
                      double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double m, double fm, double whole, double tol, int depth);

}  // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double rel_tol, int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b);
  const double m = 0.5 * (a + b), fm = f(m);
  const double whole = detail::simpson(f, a, fa, b, fb, m, fm);
  const double tol = rel_tol * (std::abs(whole) + 1e-300) + 1e-15;
  return detail::simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

namespace detail {

inline double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                          double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), flm = f(lm);
  const double rm = 0.5 * (m + b), frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0)
    throw std::runtime_error("adaptive_simpson: tolerance not met, residual " +
                             std::to_string(std::abs(delta)));
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

}  // namespace pmrd
