// Acceptance suite: runs every benchmark criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion.  Exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "ppic2d/advect.hpp"
#include "ppic2d/harness.hpp"

using namespace ppic2d;

namespace {

struct Gate {
  int failures = 0;

  void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("%s  %2d %-28s %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

// exact symmetric difference of two straight cuts inside a convex cell
double line_symmdiff(const Polygon& cell, const InterfaceCut& a, const InterfaceCut& b) {
  const double ma = polygon_moments(clip_halfplane(cell, a)).m0;
  const double mb = polygon_moments(clip_halfplane(cell, b)).m0;
  const double mab = polygon_moments(clip_halfplane(clip_halfplane(cell, a), b)).m0;
  return ma + mb - 2.0 * mab;
}

// ------------------------------------------------------------ criterion 1

void criterion_geometry_oracle(Gate& gate) {
  const Polygon sq = make_cell_box({0.0, 0.0}, 1.0, 1.0);
  const InterfaceCut cut{{0.0, 0.0}, M_PI / 2.0, 0.3, 0.05};
  const auto t0 = std::chrono::steady_clock::now();
  const Moments2 m = clip_parabola_moments(sq, cut);
  const double us =
      std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0)
          .count();
  const double e0 = std::abs(m.m0 - 0.5375) / 0.5375;
  const double e1 = std::abs(m.m1.y + 0.124234375) / 0.124234375;
  const bool pass = e0 <= 1e-12 && e1 <= 1e-12 && std::abs(m.m1.x) <= 1e-13 && us < 1000.0;
  gate.report(1, "geometry-oracle", pass,
              fmt("m0 err %.2e, m1 err %.2e, %.1f us", e0, e1, us));
}

// ------------------------------------------------------------ criterion 2

void criterion_complement_suite(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();
  const SelfTestReport rep = geometry_selftest(20240601, 10000);
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = rep.failures == 0 && rep.worst_complement <= 1e-13 &&
                    rep.worst_reduction <= 1e-13 && s < 10.0;
  gate.report(2, "complement-reduction", pass,
              fmt("worst compl %.2e, worst reduction %.2e, %lld trials, %.2f s",
                  rep.worst_complement, rep.worst_reduction, rep.trials, s));
}

// ------------------------------------------------------------ criterion 3

void criterion_gradients(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(777);
  const double step = 1e-6;
  double worst = 0.0;
  int used = 0;
  for (int k = 0; k < 1000; ++k) {
    CellStencil st;
    st.center = {uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
    st.hx = st.hy = 1.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) st.alpha[i][j] = uniform(rng, 0.0, 1.0);
    st.alpha[1][1] = uniform(rng, 0.1, 0.9);
    st.has_ref_m1 = true;
    st.ref_m1 = {uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05)};
    const double theta = uniform(rng, 0.0, 2.0 * M_PI);
    const double kappa = uniform(rng, -3.0, 3.0);
    const CellBox cell = st.box(0, 0);
    const double target = st.alpha_center() * st.cell_area();
    auto cut_at = [&](double t, double ka) {
      return InterfaceCut{st.center, t, ka, shift_for_volume(t, ka, cell, target)};
    };
    const InterfaceCut cut = cut_at(theta, kappa);
    const LviraGradient gl = grad_cost_lvira(cut, st, true);
    const MofGradient gm = grad_cost_mof(cut, st);
    auto fd = [&](auto&& f, double x) {
      return (f(x + step) - f(x - step)) / (2.0 * step);
    };
    const double fd_t =
        fd([&](double t) { return cost_lvira(cut_at(t, kappa), st); }, theta);
    const double fd_k =
        fd([&](double ka) { return cost_lvira(cut_at(theta, ka), st); }, kappa);
    const double fd_m =
        fd([&](double t) { return cost_mof(cut_at(t, kappa), st); }, theta);
    if (std::abs(fd_t) > 1e-4) {
      worst = std::max(worst, std::abs(gl.dtheta - fd_t) / std::abs(fd_t));
      ++used;
    }
    if (std::abs(fd_k) > 1e-4)
      worst = std::max(worst, std::abs(gl.dkappa - fd_k) / std::abs(fd_k));
    if (std::abs(fd_m) > 1e-4 && !gm.degenerate)
      worst = std::max(worst, std::abs(gm.dtheta - fd_m) / std::abs(fd_m));
  }

  // straight-interface identity |dM1/dtheta| = |I|^3 / 12
  const InterfaceCut flat{{0.0, 0.0}, M_PI / 2.0, 0.0, 0.0};
  const ParabolaClip clip = clip_parabola_full(make_cell_box({0.0, 0.0}, 1.0, 1.0), flat);
  const auto sd = detail::shift_derivatives(clip.arcs, 0.0, 0.0);
  const Vec2 dm1 = detail::dm1_dtheta(flat, clip.arcs, sd.dphi_dtheta);
  const double ident_err = std::abs(norm(dm1) - 1.0 / 12.0);

  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = worst <= 1e-5 && ident_err <= 1e-10 && used > 500 && s < 30.0;
  gate.report(3, "gradient-suite", pass,
              fmt("worst rel %.2e (%d sized), |dM1|-1/12 err %.2e, %.2f s", worst, used,
                  ident_err, s));
}

// ------------------------------------------------------------ criterion 4

void criterion_linear_exactness(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(313);
  const double h = 1.0 / 16.0;
  double worst = 0.0;
  int tested = 0;
  for (int k = 0; k < 100; ++k) {
    const InterfaceCut line{{uniform(rng, -h, h), uniform(rng, -h, h)},
                            uniform(rng, 0.0, 2.0 * M_PI), 0.0,
                            uniform(rng, -0.3 * h, 0.3 * h)};
    CellStencil st;
    st.center = {0.0, 0.0};
    st.hx = st.hy = h;
    st.length_scale = 1.0;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        const Polygon box = make_cell_box({di * h, dj * h}, h, h);
        st.alpha[di + 1][dj + 1] = polygon_moments(clip_halfplane(box, line)).m0 / (h * h);
      }
    if (!(st.alpha_center() > 1e-6 && st.alpha_center() < 1.0 - 1e-6)) continue;
    const Polygon box = make_cell_box({0.0, 0.0}, h, h);
    const Moments2 m = polygon_moments(clip_halfplane(box, line));
    st.ref_m1 = m.m1;
    st.has_ref_m1 = true;
    st.kappa = 0.0;
    st.kappa_valid = true;
    ++tested;
    for (Method meth : {Method::ELVIRA, Method::LVIRA, Method::MOF, Method::PLVIRA,
                        Method::PMOF}) {
      const Reconstruction rec = reconstruct_cell(meth, st);
      worst = std::max(worst, line_symmdiff(box, line, rec.cut) / (h * h));
    }
  }
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = worst <= 1e-10 && tested >= 60 && s < 30.0;
  gate.report(4, "linear-exactness", pass,
              fmt("worst symmdiff %.2e h^2 over %d lines x 5 methods, %.2f s", worst,
                  tested, s));
}

// -------------------------------------------------- criteria 6, 7, 5, 10

struct SlopeWindow {
  const char* label;
  double got = 0.0;
  double lo, hi;
  bool defined = false;
  bool ok() const { return defined && got >= lo && got <= hi; }
};

void criterion_flower(Gate& gate, ReconStats& global) {
  const FlowerShape shape = recon_test_shape();
  const std::vector<int> ns{32, 64, 128, 256, 512};
  const std::vector<Method> methods{Method::LVIRA, Method::MOF, Method::PLVIRA,
                                    Method::PMOF, Method::PROST};
  std::vector<std::vector<ConvergenceRow>> rows(methods.size());
  ExperimentResult agg;
  for (int n : ns) {
    const Grid grid = make_grid({-0.5, -0.5}, {0.5, 0.5}, n, n);
    const ExactField exact = init_moments_exact(shape, grid);
    for (size_t m = 0; m < methods.size(); ++m)
      rows[m].push_back(
          recon_convergence_row(grid, exact, shape, methods[m], 1.0, &agg, true));
  }
  global.merge(agg.recon);

  std::vector<SlopeWindow> wins;
  auto add = [&](const char* label, size_t mi, double ConvergenceRow::*col, double lo,
                 double hi) {
    const FitResult f = fit_order(rows[mi], col);
    wins.push_back({label, f.slope, lo, hi, f.defined});
  };
  add("lvira sd", 0, &ConvergenceRow::symm_diff, 1.6, 2.4);
  add("mof sd", 1, &ConvergenceRow::symm_diff, 1.6, 2.4);
  add("plvira sd", 2, &ConvergenceRow::symm_diff, 2.6, 3.4);
  add("pmof sd", 3, &ConvergenceRow::symm_diff, 2.6, 3.4);
  add("prost sd", 4, &ConvergenceRow::symm_diff, 2.6, 3.4);
  add("mof m1", 1, &ConvergenceRow::m1_linf, 4.5, 5.5);

  const double pmof_floor = rows[3].back().m1_linf;
  bool pass = pmof_floor <= 1e-12;
  std::string detail;
  for (const SlopeWindow& w : wins) {
    pass = pass && w.ok();
    detail += fmt("%s %.2f%s ", w.label, w.got, w.ok() ? "" : "!");
  }
  detail += fmt("pmof m1@512 %.1e%s", pmof_floor, pmof_floor <= 1e-12 ? "" : "!");
  gate.report(6, "flower-convergence", pass, detail);
}

void criterion_vortex(Gate& gate, ReconStats& global) {
  const std::vector<int> ns{32, 64, 128, 256};
  const std::vector<Method> methods{Method::ELVIRA, Method::MOF, Method::PLVIRA,
                                    Method::PMOF, Method::PROST};
  std::vector<std::vector<ConvergenceRow>> rows(methods.size());
  ExperimentResult agg;
  for (size_t m = 0; m < methods.size(); ++m)
    for (int n : ns)
      rows[m].push_back(vortex_reverse_row(n, methods[m], 1.0, 1.0, false, &agg, true));
  global.merge(agg.recon);

  std::vector<SlopeWindow> wins;
  auto add = [&](const char* label, size_t mi, double ConvergenceRow::*col, double lo,
                 double hi) {
    const FitResult f = fit_order(rows[mi], col);
    wins.push_back({label, f.slope, lo, hi, f.defined});
  };
  add("elvira a", 0, &ConvergenceRow::frac_linf, 0.6, 1.4);
  add("mof a", 1, &ConvergenceRow::frac_linf, 0.6, 1.4);
  add("plvira a", 2, &ConvergenceRow::frac_linf, 1.6, 2.4);
  add("pmof a", 3, &ConvergenceRow::frac_linf, 1.6, 2.4);
  add("prost a", 4, &ConvergenceRow::frac_linf, 1.6, 2.4);
  // plic curvature must not converge; parabolic curvature must
  add("elvira k", 0, &ConvergenceRow::kappa_linf, -10.0, 0.3);
  add("mof k", 1, &ConvergenceRow::kappa_linf, -10.0, 0.3);
  add("plvira k", 2, &ConvergenceRow::kappa_linf, 1.4, 2.6);
  add("pmof k", 3, &ConvergenceRow::kappa_linf, 0.5, 1.5);
  add("prost k", 4, &ConvergenceRow::kappa_linf, 1.4, 2.6);

  bool pass = true;
  std::string detail;
  for (const SlopeWindow& w : wins) {
    pass = pass && w.ok();
    detail += fmt("%s %.2f%s ", w.label, w.got, w.ok() ? "" : "!");
  }
  gate.report(7, "vortex-reverse-T1", pass, detail);
}

void criterion_volume_enforcement(Gate& gate, const ReconStats& global) {
  const bool pass = global.cells > 0 && global.max_volume_error <= 1e-12 &&
                    global.mean_shift_evaluations() <= 10.0;
  gate.report(5, "volume-enforcement", pass,
              fmt("max |m0-target|/area %.2e over %lld cells, mean brent evals %.2f",
                  global.max_volume_error, global.cells,
                  global.mean_shift_evaluations()));
}

// ------------------------------------------------------------ criterion 8

void criterion_static_curvature(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.experiment = "curvature-static";
  cfg.resolutions = {32, 64, 128, 256};  // h/R from 1/8 to 1/64 at R = 1/4
  cfg.zero_walltime = true;
  const ExperimentResult res = run_curvature_static(cfg);
  const FitResult fit = fit_order(res.rows, &ConvergenceRow::kappa_linf);
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = fit.defined && fit.slope >= 1.8 && s < 10.0;
  gate.report(8, "static-curvature", pass,
              fmt("GHF order %.2f over h/R 1/8..1/64, %.2f s", fit.slope, s));
}

// ------------------------------------------------------------ criterion 9

void criterion_exact_translation(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid grid = make_grid({0.0, 0.0}, {1.0, 1.0}, 64, 64, true, true);
  const CircleShape circle({0.5, 0.5}, 0.2);
  const ExactField exact = init_moments_exact(circle, grid);
  AdvectionState state = state_from_exact(exact);
  const double U = 1.0;
  const UniformVelocity vel({U, 0.0});
  AdvanceOptions opt;
  opt.method = Method::MOF;
  const AdvanceResult res = advance(grid, state, vel, grid.hx / U, opt);
  double worst = 0.0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const int src = grid.index((i + grid.nx - 1) % grid.nx, j);
      worst = std::max(worst,
                       std::abs(res.state.alpha[grid.index(i, j)] - state.alpha[src]));
    }
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = worst <= 1e-12 && s < 5.0;
  gate.report(9, "exact-translation", pass, fmt("max shift error %.2e, %.2f s", worst, s));
}

// ----------------------------------------------------------- criterion 10

void criterion_determinism(Gate& gate) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.experiment = "vortex-reverse";
  cfg.method = Method::PLVIRA;
  cfg.resolutions = {64};
  cfg.period = 1.0;
  cfg.zero_walltime = true;
  const ExperimentResult a = run_vortex_reverse(cfg);
  const ExperimentResult b = run_vortex_reverse(cfg);
  const std::string ta = csv_table(a.rows), tb = csv_table(b.rows);
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = ta == tb && s < 60.0;
  gate.report(10, "determinism", pass,
              fmt("two N=64 runs byte-identical: %s, %.1f s", ta == tb ? "yes" : "NO", s));
}

}  // namespace

int main() {
  Gate gate;
  ReconStats global;

  criterion_geometry_oracle(gate);
  criterion_complement_suite(gate);
  criterion_gradients(gate);
  criterion_linear_exactness(gate);
  criterion_flower(gate, global);
  criterion_vortex(gate, global);
  criterion_volume_enforcement(gate, global);
  criterion_static_curvature(gate);
  criterion_exact_translation(gate);
  criterion_determinism(gate);

  std::printf("%s\n", gate.failures == 0 ? "acceptance: all criteria passed"
                                         : "acceptance: FAILURES present");
  return gate.failures == 0 ? 0 : 1;
}
