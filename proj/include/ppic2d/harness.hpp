#pragma once

// Benchmark experiments: flower-shape reconstruction convergence, the vortex
// reverse advection test, static curvature convergence, and a randomized
// geometry self-test.  Emits CSV tables and fitted convergence orders.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ppic2d/advect.hpp"
#include "ppic2d/curvature.hpp"
#include "ppic2d/fields.hpp"
#include "ppic2d/reconstruct.hpp"

namespace ppic2d {

struct ExperimentConfig {
  std::string experiment;
  Method method = Method::ELVIRA;
  std::vector<int> resolutions{32, 64, 128, 256};
  double period = 1.0;
  double courant = 1.0;
  std::string output_path;
  std::uint64_t seed = 12345;
  bool long_run = false;
  bool use_staggered = false;
  bool check = false;
  bool zero_walltime = false;

  void validate() const {
    for (size_t k = 0; k + 1 < resolutions.size(); ++k)
      if (resolutions[k] >= resolutions[k + 1])
        throw std::invalid_argument("resolutions must be ascending");
    if (resolutions.empty()) throw std::invalid_argument("no resolutions given");
    if (!(courant > 0.0 && courant <= 1.0))
      throw std::invalid_argument("courant must be in (0, 1]");
    if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
    if (!long_run && resolutions.back() > 512)
      throw std::invalid_argument("resolutions above 512 require --long");
  }
};

struct ConvergenceRow {
  int n = 0;
  double h = 0.0;
  double symm_diff = 0.0;
  double frac_linf = 0.0;
  double m1_linf = 0.0;
  double kappa_linf = 0.0;
  double wall_time_s = 0.0;
  double cost_evals_mean = 0.0;
};

struct ExperimentResult {
  std::vector<ConvergenceRow> rows;
  ReconStats recon;
  long long failed_cells = 0;
  long long interface_cells = 0;
};

// ------------------------------------------------------------- slope fits

struct FitResult {
  double slope = 0.0;
  bool defined = false;
  int points = 0;
};

// Least-squares slope of log(error) against log(h).  Rows at a detected
// floor (error below 100 machine epsilons of the coarsest row's error, or
// exactly zero) are excluded.
inline FitResult fit_order(const std::vector<ConvergenceRow>& rows,
                           double ConvergenceRow::*column) {
  FitResult out;
  double scale = 0.0;
  for (const ConvergenceRow& r : rows) scale = std::max(scale, r.*column);
  const double floor = 100.0 * 2.220446049250313e-16 * scale;
  std::vector<std::pair<double, double>> pts;
  for (const ConvergenceRow& r : rows) {
    const double e = r.*column;
    if (e > floor && e > 0.0 && r.h > 0.0) pts.push_back({std::log(r.h), std::log(e)});
  }
  out.points = int(pts.size());
  if (pts.size() < 2) return out;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = double(pts.size());
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return out;
  out.slope = (n * sxy - sx * sy) / den;
  out.defined = true;
  return out;
}

// ----------------------------------------------------------------- CSV io

inline std::string csv_header() {
  return "N,h,symm_diff,frac_linf,m1_linf,kappa_linf,wall_time_s,cost_evals_mean";
}

inline std::string csv_row(const ConvergenceRow& r) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.6f,%.17g", r.n,
                r.h, r.symm_diff, r.frac_linf, r.m1_linf, r.kappa_linf, r.wall_time_s,
                r.cost_evals_mean);
  return buf;
}

inline std::string csv_table(const std::vector<ConvergenceRow>& rows) {
  std::string out = csv_header() + "\n";
  for (const ConvergenceRow& r : rows) out += csv_row(r) + "\n";
  return out;
}

inline std::vector<ConvergenceRow> csv_parse(const std::string& text) {
  std::vector<ConvergenceRow> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ConvergenceRow r;
    if (std::sscanf(line.c_str(), "%d,%lg,%lg,%lg,%lg,%lg,%lg,%lg", &r.n, &r.h,
                    &r.symm_diff, &r.frac_linf, &r.m1_linf, &r.kappa_linf,
                    &r.wall_time_s, &r.cost_evals_mean) == 8)
      rows.push_back(r);
  }
  return rows;
}

inline void write_csv(const std::string& path, const std::vector<ConvergenceRow>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << csv_table(rows);
}

// ----------------------------------------------------------- experiments

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// Reconstruction of an exactly initialised field on one grid, with error
// norms against the shape.  Shared by the flower benchmark and the
// acceptance suite (which reuses one exact field across methods).
inline ConvergenceRow recon_convergence_row(const Grid& grid, const ExactField& exact,
                                            const ShapeLevelSet& shape, Method method,
                                            double length_scale, ExperimentResult* agg,
                                            bool zero_walltime) {
  const auto t0 = std::chrono::steady_clock::now();
  AdvectionState state = state_from_exact(exact);
  ReconStats stats;
  const InterfaceSet interfaces =
      reconstruct_all(grid, state, method, 1e-10, length_scale, &stats);
  const CurvatureField kf = ghf_curvature_field(grid, state.alpha, 1e-10);
  const ErrorReport rep = error_norms(grid, state.alpha, interfaces, exact, shape,
                                      &kf.kappa, &kf.valid);
  ConvergenceRow row;
  row.n = grid.nx;
  row.h = grid.hx;
  row.symm_diff = rep.symm_diff;
  row.frac_linf = rep.frac_linf;
  row.m1_linf = rep.m1_linf;
  row.kappa_linf = rep.kappa_linf;
  row.wall_time_s = zero_walltime ? 0.0 : detail::seconds_since(t0);
  row.cost_evals_mean = stats.mean_cost_evaluations();
  if (agg) {
    agg->recon.merge(stats);
    agg->failed_cells += stats.failures;
    agg->interface_cells += stats.cells;
  }
  return row;
}

inline FlowerShape recon_test_shape() { return FlowerShape({0.01, 0.03}, 0.3); }

// Flower-shape reconstruction accuracy over a resolution sweep on
// [-0.5, 0.5]^2 with exactly initialised moments.
inline ExperimentResult run_recon_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  const FlowerShape shape = recon_test_shape();
  for (int n : cfg.resolutions) {
    const Grid grid = make_grid({-0.5, -0.5}, {0.5, 0.5}, n, n);
    const ExactField exact = init_moments_exact(shape, grid);
    result.rows.push_back(recon_convergence_row(grid, exact, shape, cfg.method, 1.0,
                                                &result, cfg.zero_walltime));
  }
  return result;
}

// One vortex-reverse run: circle advected by the time-reversing vortex until
// t = T, then compared against the initial condition.
inline ConvergenceRow vortex_reverse_row(int n, Method method, double period,
                                         double courant, bool use_staggered,
                                         ExperimentResult* agg, bool zero_walltime) {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid grid = make_grid({0.0, 0.0}, {1.0, 1.0}, n, n);
  const CircleShape circle({0.5, 0.75}, 0.15);
  const ExactField exact = init_moments_exact(circle, grid);

  const VortexVelocity analytic(period);
  StaggeredVelocity staggered(analytic, grid);
  const VelocityProvider& vel =
      use_staggered ? static_cast<const VelocityProvider&>(staggered) : analytic;

  AdvanceOptions opt;
  opt.method = method;
  opt.length_scale = 1.0;

  AdvectionState state = state_from_exact(exact);
  ReconStats stats;
  double t = 0.0;
  while (t < period - 1e-14) {
    const double dt = cfl_timestep(grid, vel, t, courant, period - t);
    if (!(dt > 0.0)) throw std::runtime_error("vortex_reverse: time step collapsed");
    AdvanceResult step = advance(grid, state, vel, dt, opt);
    stats.merge(step.recon);
    state = std::move(step.state);
    t = state.time;
  }

  ReconStats final_stats;
  const InterfaceSet interfaces =
      reconstruct_all(grid, state, method, 1e-10, 1.0, &final_stats);
  stats.merge(final_stats);
  const CurvatureField kf = ghf_curvature_field(grid, state.alpha, 1e-10);
  const ErrorReport rep =
      error_norms(grid, state.alpha, interfaces, exact, circle, &kf.kappa, &kf.valid);

  ConvergenceRow row;
  row.n = n;
  row.h = grid.hx;
  row.symm_diff = rep.symm_diff;
  row.frac_linf = rep.frac_linf;
  row.m1_linf = rep.m1_linf;
  row.kappa_linf = rep.kappa_linf;
  row.wall_time_s = zero_walltime ? 0.0 : detail::seconds_since(t0);
  row.cost_evals_mean = stats.mean_cost_evaluations();
  if (agg) {
    agg->recon.merge(stats);
    agg->failed_cells += stats.failures;
    agg->interface_cells += stats.cells;
  }
  return row;
}

inline ExperimentResult run_vortex_reverse(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  for (int n : cfg.resolutions)
    result.rows.push_back(vortex_reverse_row(n, cfg.method, cfg.period, cfg.courant,
                                             cfg.use_staggered, &result,
                                             cfg.zero_walltime));
  return result;
}

// Static curvature convergence: generalized height-function estimates on
// exactly initialised circle fractions.
inline ExperimentResult run_curvature_static(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  const CircleShape circle({0.513, 0.521}, 0.25);
  for (int n : cfg.resolutions) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid grid = make_grid({0.0, 0.0}, {1.0, 1.0}, n, n);
    const ExactField exact = init_moments_exact(circle, grid);
    const CurvatureField kf = ghf_curvature_field(grid, exact.alpha, 1e-10);
    double kerr = 0.0;
    for (int idx = 0; idx < grid.cells(); ++idx)
      if (kf.valid[idx])
        kerr = std::max(kerr, std::abs(kf.kappa[idx] - 1.0 / circle.radius()));
    ConvergenceRow row;
    row.n = n;
    row.h = grid.hx;
    row.kappa_linf = kerr;
    row.wall_time_s = cfg.zero_walltime ? 0.0 : detail::seconds_since(t0);
    result.rows.push_back(row);
  }
  return result;
}

// ------------------------------------------------------ geometry self-test

struct SelfTestReport {
  long long trials = 0;
  long long failures = 0;
  double worst_complement = 0.0;
  double worst_reduction = 0.0;
  bool oracle_ok = false;
};

// Vertices on a circle in angular order, with a minimum angular gap so the
// polygons stay well-conditioned (no sliver shapes whose own area sits at
// the rounding floor of the ambient coordinates).
inline Polygon random_convex_polygon(std::mt19937_64& rng, Vec2 center, double radius,
                                     int min_v = 3, int max_v = 8) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int n = std::min(max_v, min_v + int(U(rng) * (max_v - min_v + 1)));
  std::vector<double> ang(n);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (double& a : ang) a = U(rng) * 2.0 * M_PI;
    std::sort(ang.begin(), ang.end());
    double min_gap = ang[0] + 2.0 * M_PI - ang[n - 1];
    for (int i = 0; i + 1 < n; ++i) min_gap = std::min(min_gap, ang[i + 1] - ang[i]);
    if (min_gap < 0.25) continue;
    Polygon p;
    for (int i = 0; i < n; ++i)
      p.push_back(
          {center.x + radius * std::cos(ang[i]), center.y + radius * std::sin(ang[i])});
    if (is_convex(p)) return p;
  }
  throw std::runtime_error("random_convex_polygon: generation failed");
}

inline InterfaceCut random_cut(std::mt19937_64& rng, Vec2 center, double scale,
                               double max_kappa_scaled = 4.0) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  return {Vec2{center.x + (U(rng) - 0.5) * scale, center.y + (U(rng) - 0.5) * scale},
          U(rng) * 2.0 * M_PI, (U(rng) - 0.5) * 2.0 * max_kappa_scaled / scale,
          (U(rng) - 0.5) * scale};
}

// Randomised identities of the geometric kernel: the complement identity,
// the straight-interface reduction, and the closed-form parabolic clip of a
// unit cell.
inline SelfTestReport geometry_selftest(std::uint64_t seed, int trials = 10000) {
  SelfTestReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);

  {  // closed-form oracle: q = y - 0.05 + 0.15 x^2 on the unit square
    const Polygon sq = make_cell_box({0.0, 0.0}, 1.0, 1.0);
    const InterfaceCut cut{{0.0, 0.0}, M_PI / 2.0, 0.3, 0.05};
    const Moments2 m = clip_parabola_moments(sq, cut);
    rep.oracle_ok = std::abs(m.m0 - 0.5375) <= 1e-12 * 0.5375 &&
                    std::abs(m.m1.y + 0.124234375) <= 1e-12 * 0.124234375 &&
                    std::abs(m.m1.x) <= 1e-13;
  }

  for (int k = 0; k < trials; ++k) {
    ++rep.trials;
    const Vec2 c{(U(rng) - 0.5) * 4.0, (U(rng) - 0.5) * 4.0};
    const double r = 0.1 + U(rng);
    const Polygon poly = random_convex_polygon(rng, c, r);
    const InterfaceCut cut = random_cut(rng, c, r);
    const Moments2 whole = polygon_moments(poly);

    const Moments2 a = clip_parabola_moments(poly, cut);
    const Moments2 b = clip_parabola_moments(poly, cut.complement());
    const double scale0 = whole.m0;
    const double scale1 = std::max(norm(whole.m1), scale0 * r);
    const double ec = std::max(std::abs(a.m0 + b.m0 - whole.m0) / scale0,
                               norm(a.m1 + b.m1 - whole.m1) / scale1);
    rep.worst_complement = std::max(rep.worst_complement, ec);

    // straight reduction at vanishing curvature
    InterfaceCut lin = cut;
    lin.kappa = 0.0;
    const Moments2 p0 = clip_parabola_moments(poly, lin);
    const Moments2 p1 = polygon_moments(clip_halfplane(poly, lin));
    const double er = std::max(std::abs(p0.m0 - p1.m0) / scale0,
                               norm(p0.m1 - p1.m1) / scale1);
    rep.worst_reduction = std::max(rep.worst_reduction, er);

    if (ec > 1e-13 || er > 1e-13) ++rep.failures;
  }
  if (!rep.oracle_ok) ++rep.failures;
  return rep;
}

// --------------------------------------------------------------- checking

// Acceptance windows for fitted orders, evaluated when --check is passed.
// Returns a list of human-readable failures (empty means pass).
inline std::vector<std::string> check_orders(const ExperimentConfig& cfg,
                                             const ExperimentResult& result) {
  std::vector<std::string> bad;
  auto expect = [&](const char* name, FitResult fit, double lo, double hi) {
    char buf[160];
    if (!fit.defined) {
      std::snprintf(buf, sizeof buf, "%s: order undefined", name);
      bad.push_back(buf);
      return;
    }
    if (fit.slope < lo || fit.slope > hi) {
      std::snprintf(buf, sizeof buf, "%s: order %.3f outside [%.2f, %.2f]", name,
                    fit.slope, lo, hi);
      bad.push_back(buf);
    }
  };

  const Method m = cfg.method;
  if (cfg.experiment == "recon-convergence") {
    const FitResult sd = fit_order(result.rows, &ConvergenceRow::symm_diff);
    if (m == Method::LVIRA || m == Method::MOF || m == Method::ELVIRA)
      expect("symm_diff", sd, 1.6, 2.4);
    else
      expect("symm_diff", sd, 2.6, 3.4);
    if (m == Method::MOF)
      expect("m1_linf", fit_order(result.rows, &ConvergenceRow::m1_linf), 4.5, 5.5);
    if (m == Method::PMOF && !result.rows.empty() &&
        result.rows.back().n >= 512 && result.rows.back().m1_linf > 1e-12) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "m1_linf floor: %.3g above 1e-12",
                    result.rows.back().m1_linf);
      bad.push_back(buf);
    }
  } else if (cfg.experiment == "vortex-reverse") {
    const FitResult fr = fit_order(result.rows, &ConvergenceRow::frac_linf);
    const FitResult ka = fit_order(result.rows, &ConvergenceRow::kappa_linf);
    if (m == Method::ELVIRA || m == Method::MOF || m == Method::LVIRA) {
      expect("frac_linf", fr, 0.6, 1.4);
      if (ka.defined && ka.slope > 0.3) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "kappa_linf: order %.3f above 0.3 (expected flat)",
                      ka.slope);
        bad.push_back(buf);
      }
    } else {
      expect("frac_linf", fr, 1.6, 2.4);
      if (m == Method::PMOF) expect("kappa_linf", ka, 0.5, 1.5);
      if (m == Method::PLVIRA || m == Method::PROST) expect("kappa_linf", ka, 1.4, 2.6);
    }
  } else if (cfg.experiment == "curvature-static") {
    const FitResult ka = fit_order(result.rows, &ConvergenceRow::kappa_linf);
    if (!ka.defined || ka.slope < 1.8) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "kappa_linf: order %.3f below 1.8",
                    ka.defined ? ka.slope : 0.0);
      bad.push_back(buf);
    }
  }
  return bad;
}

}  // namespace ppic2d
