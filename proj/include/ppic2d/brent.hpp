#pragma once

// Bracketed scalar root finding (Brent's method: bisection, secant and
// inverse quadratic interpolation).

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ppic2d {

struct BrentResult {
  double x = 0.0;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Finds a root of f in [a, b].  fa and fb are the (already known) endpoint
// values with fa * fb <= 0.  Stops when |f| <= f_tol or the bracket shrinks
// to rounding width.  Evaluation count excludes the endpoint values.
template <class F>
inline BrentResult brent_root(F&& f, double a, double b, double fa, double fb,
                              double f_tol, int max_iter = 120) {
  BrentResult res;
  if (fa == 0.0) return {a, 0.0, 0, true};
  if (fb == 0.0) return {b, 0.0, 0, true};
  if ((fa > 0.0) == (fb > 0.0))
    throw std::runtime_error("brent_root: endpoints do not bracket a root");

  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * 2.220446049250313e-16 * std::abs(b) + 1e-300;
    const double xm = 0.5 * (c - b);
    if (std::abs(fb) <= f_tol || std::abs(xm) <= tol1) {
      res.x = b;
      res.f = fb;
      res.converged = true;
      return res;
    }
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p, q;
      if (a == c) {  // secant
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {  // inverse quadratic
        const double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
    ++res.evaluations;
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  res.x = b;
  res.f = fb;
  res.converged = std::abs(fb) <= f_tol;
  return res;
}

}  // namespace ppic2d
