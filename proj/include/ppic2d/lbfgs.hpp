#pragma once

// Small-dimension L-BFGS with a strong-Wolfe line search.  Used for the one-
// and two-parameter interface reconstruction problems; written for n <= 4.

#include <array>
#include <cmath>
#include <functional>

namespace ppic2d {

struct LbfgsOptions {
  double grad_tol = 1e-8;       // may stop once the gradient norm is below this
  int max_iterations = 100;
  int memory = 6;
  double f_floor = 1e-28;       // objective values at or below count as zero
  std::array<double, 4> lower{{-1e300, -1e300, -1e300, -1e300}};
  std::array<double, 4> upper{{1e300, 1e300, 1e300, 1e300}};
};

struct LbfgsResult {
  std::array<double, 4> x{};
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool failed = false;  // non-finite objective encountered
};

namespace detail {

template <int N>
inline double lb_dot(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  double s = 0.0;
  for (int i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <int N>
inline double lb_norm_inf(const std::array<double, 4>& a) {
  double s = 0.0;
  for (int i = 0; i < N; ++i) s = std::max(s, std::abs(a[i]));
  return s;
}

}  // namespace detail

// Minimises f(x), where fn(x, grad_out) returns the objective and fills the
// gradient.  The iterate is clamped to the option box after every step.
// Convergence keeps going past grad_tol while the objective is still
// dropping fast, so exactly representable optima are resolved to rounding
// level instead of stopping at the nominal tolerance.
template <int N, class Fn>
inline LbfgsResult lbfgs_minimize(Fn&& fn, std::array<double, 4> x0,
                                  const LbfgsOptions& opt) {
  using detail::lb_dot;
  using detail::lb_norm_inf;
  using Vec = std::array<double, 4>;

  LbfgsResult res;
  auto clamp = [&](Vec& v) {
    for (int i = 0; i < N; ++i) v[i] = std::min(opt.upper[i], std::max(opt.lower[i], v[i]));
  };
  clamp(x0);

  Vec x = x0, g{};
  double f = fn(x, g);
  ++res.evaluations;
  if (!std::isfinite(f)) {
    res.failed = true;
    res.x = x0;
    return res;
  }

  Vec best_x = x;
  double best_f = f;

  const int m = std::min(opt.memory, 16);
  std::array<Vec, 16> s_hist{}, y_hist{};
  std::array<double, 16> rho{};
  int hist = 0;

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    res.iterations = iter + 1;
    if (lb_norm_inf<N>(g) == 0.0 || f <= opt.f_floor) {
      res.converged = true;
      break;
    }

    // two-loop recursion: r = H g, then descend along -r
    Vec q = g;
    std::array<double, 16> alpha{};
    for (int i = hist - 1; i >= 0; --i) {
      alpha[i] = rho[i] * lb_dot<N>(s_hist[i], q);
      for (int k = 0; k < N; ++k) q[k] -= alpha[i] * y_hist[i][k];
    }
    double gamma = 1.0;
    if (hist > 0) {
      const int i = hist - 1;
      const double yy = lb_dot<N>(y_hist[i], y_hist[i]);
      if (yy > 0.0) gamma = lb_dot<N>(s_hist[i], y_hist[i]) / yy;
    }
    Vec p{};
    for (int k = 0; k < N; ++k) p[k] = gamma * q[k];
    for (int i = 0; i < hist; ++i) {
      const double beta = rho[i] * lb_dot<N>(y_hist[i], p);
      for (int k = 0; k < N; ++k) p[k] += (alpha[i] - beta) * s_hist[i][k];
    }
    for (int k = 0; k < N; ++k) p[k] = -p[k];
    auto normalize_direction = [&] {
      double pn = 0.0;
      for (int k = 0; k < N; ++k) pn = std::max(pn, std::abs(p[k]));
      if (pn > 0.0)
        for (int k = 0; k < N; ++k) p[k] /= pn;
    };
    // without curvature information, probe at the natural parameter scale
    if (hist == 0) normalize_direction();
    double dg = lb_dot<N>(g, p);
    if (dg >= 0.0) {  // not a descent direction; restart with steepest descent
      for (int k = 0; k < N; ++k) p[k] = -g[k];
      normalize_direction();
      dg = lb_dot<N>(g, p);
      hist = 0;
      if (dg >= 0.0) break;
    }

    // strong-Wolfe line search (bracket + zoom with bisection fallback)
    const double c1 = 1e-4, c2 = 0.9;
    const double f0 = f, dg0 = dg;
    double a_prev = 0.0, f_prev = f0, dg_prev = dg0;
    double a_cur = 1.0;
    const double a_max = 1e4;
    Vec x_new = x, g_new = g;
    double f_new = f;
    bool found = false;
    auto eval_at = [&](double a, double& fo, double& dgo) {
      for (int k = 0; k < N; ++k) x_new[k] = x[k] + a * p[k];
      clamp(x_new);
      fo = fn(x_new, g_new);
      ++res.evaluations;
      dgo = lb_dot<N>(g_new, p);
    };
    double a_lo = 0.0, a_hi = 0.0, f_lo = f0;
    bool zoom = false;
    for (int ls = 0; ls < 12 && !found && !zoom; ++ls) {
      double fc, dgc;
      eval_at(a_cur, fc, dgc);
      if (!std::isfinite(fc)) {
        a_cur *= 0.25;
        continue;
      }
      if (fc > f0 + c1 * a_cur * dg0 || (ls > 0 && fc >= f_prev)) {
        a_lo = a_prev; f_lo = f_prev;
        a_hi = a_cur;
        zoom = true;
        break;
      }
      if (std::abs(dgc) <= -c2 * dg0) {
        f_new = fc;
        found = true;
        break;
      }
      if (dgc >= 0.0) {
        a_lo = a_cur; f_lo = fc;
        a_hi = a_prev;
        zoom = true;
        break;
      }
      a_prev = a_cur; f_prev = fc; dg_prev = dgc;
      a_cur = std::min(2.0 * a_cur, a_max);
      if (a_cur >= a_max) break;
    }
    if (zoom) {
      for (int z = 0; z < 25 && !found; ++z) {
        const double a_mid = 0.5 * (a_lo + a_hi);
        if (std::abs(a_hi - a_lo) < 1e-16 * (1.0 + std::abs(a_lo))) break;
        double fc, dgc;
        eval_at(a_mid, fc, dgc);
        if (!std::isfinite(fc) || fc > f0 + c1 * a_mid * dg0 || fc >= f_lo) {
          a_hi = a_mid;
        } else {
          if (std::abs(dgc) <= -c2 * dg0) {
            f_new = fc;
            found = true;
            break;
          }
          if (dgc * (a_hi - a_lo) >= 0.0) a_hi = a_lo;
          a_lo = a_mid; f_lo = fc;
        }
      }
      if (!found && a_lo > 0.0) {  // accept the best sufficient-decrease point
        double fc, dgc;
        eval_at(a_lo, fc, dgc);
        if (std::isfinite(fc) && fc < f0) {
          f_new = fc;
          found = true;
        }
      }
    }
    if (!found) break;  // no progress possible along this direction

    // history update
    Vec s{}, yv{};
    for (int k = 0; k < N; ++k) {
      s[k] = x_new[k] - x[k];
      yv[k] = g_new[k] - g[k];
    }
    const double sy = lb_dot<N>(s, yv);
    if (sy > 1e-300) {
      if (hist == m) {
        for (int i = 0; i + 1 < m; ++i) {
          s_hist[i] = s_hist[i + 1];
          y_hist[i] = y_hist[i + 1];
          rho[i] = rho[i + 1];
        }
        --hist;
      }
      s_hist[hist] = s;
      y_hist[hist] = yv;
      rho[hist] = 1.0 / sy;
      ++hist;
    }

    const double drop = (f - f_new) / std::max(std::abs(f), 1e-300);
    x = x_new;
    g = g_new;
    f = f_new;
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
    if (!std::isfinite(f)) {
      res.failed = true;
      break;
    }
    // The gradient tolerance alone is loose; stop only once the objective
    // has also stopped improving, so exactly attainable optima are resolved
    // to rounding level rather than at the nominal tolerance.
    if (lb_norm_inf<N>(g) <= opt.grad_tol && (drop < 1e-2 || f <= opt.f_floor)) {
      res.converged = true;
      break;
    }
    if (drop <= 0.0) break;  // stalled at rounding level
  }

  if (f < best_f) {
    best_f = f;
    best_x = x;
  }
  res.x = best_x;
  res.f = best_f;
  return res;
}

}  // namespace ppic2d
