#ifndef SPHERE_RE_ROOTS_HPP
#define SPHERE_RE_ROOTS_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "sphere_re/core.hpp"

// Scalar root isolation: uniform-grid bracketing plus bisection. Derivative
// free on purpose; the residuals here carry steep sin^5-type factors.

namespace sphere_re {

/// Bisect f on [lo, hi] (f(lo) and f(hi) of opposite sign) to |hi-lo| <= xtol.
inline double bisect(const std::function<double(double)>& f, double lo,
                     double hi, double xtol = 1e-14, int maxit = 200) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  if ((flo < 0) == (fhi < 0))
    throw PreconditionError("bisect: no sign change in bracket");
  for (int it = 0; it < maxit && hi - lo > xtol; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// All sign-change roots of f on [lo, hi] found on a uniform grid of n cells.
/// Non-finite samples (poles) break brackets instead of producing roots.
inline std::vector<double> bracket_roots(const std::function<double(double)>& f,
                                         double lo, double hi, int n = 2048,
                                         double xtol = 1e-14) {
  std::vector<double> roots;
  double x0 = lo, f0 = f(x0);
  for (int i = 1; i <= n; ++i) {
    double x1 = lo + (hi - lo) * i / n;
    double f1 = f(x1);
    if (std::isfinite(f0) && std::isfinite(f1)) {
      if (f0 == 0 && (roots.empty() || roots.back() != x0)) roots.push_back(x0);
      else if (f0 * f1 < 0) roots.push_back(bisect(f, x0, x1, xtol));
    }
    x0 = x1;
    f0 = f1;
  }
  if (f0 == 0) roots.push_back(x0);
  return roots;
}

/// Golden-section minimisation of f on [lo, hi].
inline double golden_min(const std::function<double(double)>& f, double lo,
                         double hi, double xtol = 1e-12) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace sphere_re

#endif  // SPHERE_RE_ROOTS_HPP
