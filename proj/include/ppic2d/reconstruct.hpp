#pragma once

// Per-cell interface reconstruction by cost-function optimisation.  Supported
// methods: the linear-interface LVIRA, ELVIRA and MOF schemes plus their
// parabolic generalisations PLVIRA, PMOF (curvature prescribed) and PROST
// (curvature optimised).  Every evaluated interface is volume-enforced: the
// shift is chosen so the reconstructed liquid volume matches the stored one.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "ppic2d/brent.hpp"
#include "ppic2d/geometry.hpp"
#include "ppic2d/lbfgs.hpp"

namespace ppic2d {

enum class Method { LVIRA, ELVIRA, MOF, PLVIRA, PMOF, PROST };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::LVIRA: return "lvira";
    case Method::ELVIRA: return "elvira";
    case Method::MOF: return "mof";
    case Method::PLVIRA: return "plvira";
    case Method::PMOF: return "pmof";
    case Method::PROST: return "prost";
  }
  return "?";
}

inline bool method_is_parabolic(Method m) {
  return m == Method::PLVIRA || m == Method::PMOF || m == Method::PROST;
}
inline bool method_uses_first_moment(Method m) {
  return m == Method::MOF || m == Method::PMOF;
}

// Axis-aligned cell of size hx*hy centred at `center`.
struct CellBox {
  Vec2 center{0.0, 0.0};
  double hx = 1.0;
  double hy = 1.0;

  double area() const { return hx * hy; }
  Polygon polygon() const { return make_cell_box(center, hx, hy); }
};

// Everything reconstruction needs to know about one cell: its geometry, the
// 3x3 fraction neighbourhood, and optional reference data (first moment for
// the MOF family, prescribed curvature for the parabolic-fixed methods).
struct CellStencil {
  Vec2 center{0.0, 0.0};
  double hx = 1.0;
  double hy = 1.0;
  std::array<std::array<double, 3>, 3> alpha{};  // alpha[di+1][dj+1]
  Vec2 ref_m1{0.0, 0.0};  // reference first moment relative to `center`
  bool has_ref_m1 = false;
  double kappa = 0.0;     // prescribed interface curvature
  bool kappa_valid = false;
  double length_scale = 1.0;  // problem scale L entering optimiser tolerances

  double cell_area() const { return hx * hy; }
  double h() const { return std::sqrt(hx * hy); }
  double alpha_center() const { return alpha[1][1]; }
  CellBox box(int di, int dj) const {
    return {Vec2{center.x + di * hx, center.y + dj * hy}, hx, hy};
  }
};

struct Reconstruction {
  InterfaceCut cut;
  double cost_value = 0.0;
  int evaluations = 0;
  bool converged = true;
  bool failed = false;
};

// Counters accumulated across reconstructions; used for volume-enforcement
// monitoring and the per-run cost statistics reported by the benchmark CLI.
struct ReconStats {
  long long cells = 0;
  long long failures = 0;
  long long cost_evaluations = 0;
  long long shift_calls = 0;        // Brent-backed volume enforcements
  long long shift_evaluations = 0;  // g evaluations inside Brent
  double max_volume_error = 0.0;    // max |m0 - target| / cell area

  double mean_shift_evaluations() const {
    return shift_calls > 0 ? double(shift_evaluations) / double(shift_calls) : 0.0;
  }
  double mean_cost_evaluations() const {
    return cells > 0 ? double(cost_evaluations) / double(cells) : 0.0;
  }
  void merge(const ReconStats& o) {
    cells += o.cells;
    failures += o.failures;
    cost_evaluations += o.cost_evaluations;
    shift_calls += o.shift_calls;
    shift_evaluations += o.shift_evaluations;
    max_volume_error = std::max(max_volume_error, o.max_volume_error);
  }
};

// --------------------------------------------------------- volume shifts

namespace detail {

// Half-widths of the cell projected on the cut normal and tangent.
inline void cut_half_widths(double theta, const CellBox& cell, double& phi_eta,
                            double& phi_tau) {
  const double c = std::cos(theta), s = std::sin(theta);
  phi_eta = 0.5 * (cell.hx * std::abs(c) + cell.hy * std::abs(s));
  phi_tau = 0.5 * (cell.hx * std::abs(s) + cell.hy * std::abs(c));
}

// Shift that empties / fills the cell for the given normal and curvature.
inline double shift_empty(double theta, double kappa, const CellBox& cell) {
  double pe, pt;
  cut_half_widths(theta, cell, pe, pt);
  return -pe + 0.5 * std::min(kappa, 0.0) * pt * pt;
}
inline double shift_full(double theta, double kappa, const CellBox& cell) {
  double pe, pt;
  cut_half_widths(theta, cell, pe, pt);
  return pe + 0.5 * std::max(kappa, 0.0) * pt * pt;
}

}  // namespace detail

// Exact shift for a straight interface in a rectangular cell: the standard
// case split over the three fill regimes, mirrored about alpha = 1/2 so the
// inversion is exactly antisymmetric.
inline double linear_shift(double theta, const CellBox& cell, double volume_fraction) {
  double alpha = std::min(1.0, std::max(0.0, volume_fraction));
  if (alpha > 0.5) return -linear_shift(theta, cell, 1.0 - alpha);
  const double c = std::cos(theta), s = std::sin(theta);
  double a = cell.hx * std::abs(c), b = cell.hy * std::abs(s);
  if (a > b) std::swap(a, b);
  const double w = a + b;
  double sc;  // fill distance from the empty corner
  if (b <= 0.0) return -0.5 * w;  // degenerate cell
  if (alpha <= 0.5 * a / b) {
    sc = std::sqrt(2.0 * a * b * alpha);
  } else {
    sc = alpha * b + 0.5 * a;
  }
  return sc - 0.5 * w;
}

// Bracket [phi-, phi+] with g(phi-) <= 0 <= g(phi+), where g(phi) is the
// clipped cell volume minus targetM0.  The linear shift is one endpoint and
// an emptying/filling shift the other; no g evaluations are needed.
inline std::pair<double, double> initial_bracket(double theta, double kappa,
                                                 const CellBox& cell,
                                                 double targetM0) {
  const double alpha = targetM0 / cell.area();
  const double phi1 = linear_shift(theta, cell, alpha);
  if (kappa == 0.0) return {phi1, phi1};
  if (kappa < 0.0) return {detail::shift_empty(theta, kappa, cell), phi1};
  return {phi1, detail::shift_full(theta, kappa, cell)};
}

// Shift phi such that the liquid volume of the cut cell equals targetM0 to
// 1e-13 of the cell area.  kappa = 0 uses the exact case split; otherwise
// Brent iteration on the bracket above.  `evals` (optional) receives the
// number of volume evaluations spent.
inline double shift_for_volume(double theta, double kappa, const CellBox& cell,
                               double targetM0, int* evals = nullptr) {
  const double area = cell.area();
  if (evals) *evals = 0;
  if (!(targetM0 >= -1e-9 * area && targetM0 <= area * (1.0 + 1e-9)))
    throw std::invalid_argument("shift_for_volume: target volume out of range");
  targetM0 = std::min(area, std::max(0.0, targetM0));
  if (targetM0 == 0.0) return detail::shift_empty(theta, kappa, cell);
  if (targetM0 == area) return detail::shift_full(theta, kappa, cell);
  if (kappa == 0.0) return linear_shift(theta, cell, targetM0 / area);

  const Polygon box = cell.polygon();
  int count = 0;
  auto g = [&](double phi) {
    ++count;
    const InterfaceCut cut{cell.center, theta, kappa, phi};
    return clip_parabola_moments(box, cut).m0 - targetM0;
  };
  const double tol = 1e-13 * area;
  const auto [lo, hi] = initial_bracket(theta, kappa, cell, targetM0);
  double phi1, g1, phi2, g2;
  if (kappa < 0.0) {
    phi1 = hi;
    g1 = g(phi1);
    phi2 = lo;
    g2 = -targetM0;  // the cut empties the cell here by construction
  } else {
    phi1 = lo;
    g1 = g(phi1);
    phi2 = hi;
    g2 = area - targetM0;  // the cut fills the cell here
  }
  double result;
  if (std::abs(g1) <= tol) {
    result = phi1;
  } else if ((g1 > 0.0) == (g2 > 0.0)) {
    // rounding pushed g1 past zero; the exact endpoint is the answer
    result = phi1;
  } else {
    const BrentResult r = (phi2 < phi1)
                              ? brent_root(g, phi2, phi1, g2, g1, tol)
                              : brent_root(g, phi1, phi2, g1, g2, tol);
    if (!r.converged)
      throw std::runtime_error("shift_for_volume: volume bracket failed to converge");
    result = r.x;
  }
  if (evals) *evals = count;
  return result;
}

// ------------------------------------------------------------- cost values

// Squared LVIRA cost, nondimensionalised by the cell area: the volume
// mismatch of the cut extended over the 3x3 neighbourhood.  The centre cell
// is volume-enforced and never contributes.
inline double cost_lvira(const InterfaceCut& cut, const CellStencil& st) {
  const double area = st.cell_area();
  double acc = 0.0;
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj) {
      if (di == 0 && dj == 0) continue;
      const double m0 = clip_parabola_moments(st.box(di, dj).polygon(), cut).m0;
      const double diff = st.alpha[di + 1][dj + 1] * area - m0;
      acc += diff * diff / area;
    }
  return acc / area;
}

// MOF cost: distance between the reference first moment and the first moment
// of the cut cell, relative to the cell centre, nondimensionalised by h^3.
inline double cost_mof(const InterfaceCut& cut, const CellStencil& st) {
  if (!st.has_ref_m1)
    throw std::invalid_argument("cost_mof: stencil has no reference first moment");
  const Moments2 m = clip_parabola_moments(st.box(0, 0).polygon(), cut);
  const Vec2 m1_rel = m.m1 - st.center * m.m0;
  const double h3 = std::pow(st.cell_area(), 1.5);
  return norm(st.ref_m1 - m1_rel) / h3;
}

// Diagnostic symmetric-difference cost against an exact membership function;
// never optimised.
template <class Membership>
inline double cost_symmdiff(const InterfaceCut& cut, Membership&& exact_region,
                            const CellBox& cell, int depth = 12) {
  const Vec2 lo{cell.center.x - 0.5 * cell.hx, cell.center.y - 0.5 * cell.hy};
  const Vec2 hi{cell.center.x + 0.5 * cell.hx, cell.center.y + 0.5 * cell.hy};
  const double sd = symmetric_difference_area(
      [&](Vec2 p) { return region_membership(cut, p); },
      std::forward<Membership>(exact_region), lo, hi, depth);
  return sd / cell.area();
}

// ------------------------------------------------------- exact derivatives

namespace detail {

// Integrals over the interface arcs inside one polygon, in the cut's local
// frame.  P(t) = phi - (kappa/2) t^2 is the parabola height over tangent t.
struct ArcIntegrals {
  double len = 0.0;      // int 1 dt
  double t1 = 0.0;       // int t dt
  double t2_half = 0.0;  // int t^2/2 dt
  double a_num = 0.0;    // int (P k t - t) dt        (shift/angle coupling)
};

inline ArcIntegrals arc_integrals(const ArcList& arcs, double kappa, double phi) {
  ArcIntegrals out;
  for (int i = 0; i < arcs.n; ++i) {
    const double a = arcs.tau[i][0], b = arcs.tau[i][1];
    out.len += b - a;
    out.t1 += 0.5 * (b * b - a * a);
    out.t2_half += (b * b * b - a * a * a) / 6.0;
    out.a_num += gauss3(a, b, [&](double t) {
      const double P = phi - 0.5 * kappa * t * t;
      return P * kappa * t - t;
    });
  }
  return out;
}

struct ShiftDerivatives {
  double dphi_dtheta = 0.0;
  double dphi_dkappa = 0.0;
  bool degenerate = false;  // no interface inside the centre cell
};

// d(phi)/d(theta) and d(phi)/d(kappa) from conservation of the centre-cell
// volume under the parameter change.
inline ShiftDerivatives shift_derivatives(const ArcList& center_arcs, double kappa,
                                          double phi) {
  const ArcIntegrals ai = arc_integrals(center_arcs, kappa, phi);
  ShiftDerivatives out;
  if (ai.len <= 0.0) {
    out.degenerate = true;
    return out;
  }
  out.dphi_dtheta = -ai.a_num / ai.len;
  out.dphi_dkappa = ai.t2_half / ai.len;
  return out;
}

// d(M0 of poly n liquid)/d(theta) for a neighbour clipped by the same cut.
inline double dm0_dtheta(const ArcList& arcs, double kappa, double phi,
                         double dphi_dtheta) {
  double acc = 0.0;
  for (int i = 0; i < arcs.n; ++i)
    acc += gauss3(arcs.tau[i][0], arcs.tau[i][1], [&](double t) {
      const double P = phi - 0.5 * kappa * t * t;
      return dphi_dtheta - t + kappa * t * P;
    });
  return acc;
}

inline double dm0_dkappa(const ArcList& arcs, double dphi_dkappa) {
  double acc = 0.0;
  for (int i = 0; i < arcs.n; ++i)
    acc += gauss3(arcs.tau[i][0], arcs.tau[i][1],
                  [&](double t) { return dphi_dkappa - 0.5 * t * t; });
  return acc;
}

// d(M1 of the centre cell, relative to the anchor)/d(theta); valid when the
// centre volume is conserved (dphi_dtheta from shift_derivatives).
inline Vec2 dm1_dtheta(const InterfaceCut& cut, const ArcList& arcs,
                       double dphi_dtheta) {
  const double kappa = cut.kappa, phi = cut.phi;
  double comp_eta = 0.0, comp_tau = 0.0;
  for (int i = 0; i < arcs.n; ++i) {
    const double a = arcs.tau[i][0], b = arcs.tau[i][1];
    comp_eta += gauss3(a, b, [&](double t) {
      const double P = phi - 0.5 * kappa * t * t;
      return (dphi_dtheta - t) * P + kappa * t * P * P;
    });
    comp_tau += gauss3(a, b, [&](double t) {
      const double P = phi - 0.5 * kappa * t * t;
      return (dphi_dtheta - t + kappa * t * P) * t;
    });
  }
  return cut.normal() * comp_eta + cut.tangent() * comp_tau;
}

}  // namespace detail

struct MofGradient {
  double dtheta = 0.0;
  bool degenerate = false;
};

// Exact d(cost_mof)/d(theta) at fixed curvature, chain-ruled through the
// Euclidean norm.  Returns zero with the degeneracy flag when the interface
// misses the cell or the cost itself vanishes.
inline MofGradient grad_cost_mof(const InterfaceCut& cut, const CellStencil& st) {
  if (!st.has_ref_m1)
    throw std::invalid_argument("grad_cost_mof: stencil has no reference first moment");
  const ParabolaClip clip = clip_parabola_full(st.box(0, 0).polygon(), cut);
  const detail::ShiftDerivatives sd =
      detail::shift_derivatives(clip.arcs, cut.kappa, cut.phi);
  MofGradient out;
  if (sd.degenerate) {
    out.degenerate = true;
    return out;
  }
  const Vec2 m1_rel = clip.moments.m1 - st.center * clip.moments.m0;
  const Vec2 delta = st.ref_m1 - m1_rel;
  const double nd = norm(delta);
  const double h3 = std::pow(st.cell_area(), 1.5);
  if (nd == 0.0) {
    out.degenerate = true;
    return out;
  }
  const Vec2 dm1 = detail::dm1_dtheta(cut, clip.arcs, sd.dphi_dtheta);
  out.dtheta = -dot(delta, dm1) / (nd * h3);
  return out;
}

struct LviraGradient {
  double dtheta = 0.0;
  double dkappa = 0.0;
  bool degenerate = false;
};

// Exact derivatives of the squared LVIRA cost with respect to the normal
// angle and (for the curvature-optimising method) the curvature.
inline LviraGradient grad_cost_lvira(const InterfaceCut& cut, const CellStencil& st,
                                     bool want_kappa = true) {
  const ParabolaClip center = clip_parabola_full(st.box(0, 0).polygon(), cut);
  const detail::ShiftDerivatives sd =
      detail::shift_derivatives(center.arcs, cut.kappa, cut.phi);
  LviraGradient out;
  if (sd.degenerate) {
    out.degenerate = true;
    return out;
  }
  const double area = st.cell_area();
  double acc_t = 0.0, acc_k = 0.0;
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj) {
      if (di == 0 && dj == 0) continue;
      const ParabolaClip nb = clip_parabola_full(st.box(di, dj).polygon(), cut);
      const double mismatch = nb.moments.m0 - st.alpha[di + 1][dj + 1] * area;
      if (nb.arcs.n == 0) continue;
      acc_t += mismatch *
               detail::dm0_dtheta(nb.arcs, cut.kappa, cut.phi, sd.dphi_dtheta);
      if (want_kappa) acc_k += mismatch * detail::dm0_dkappa(nb.arcs, sd.dphi_dkappa);
    }
  out.dtheta = 2.0 * acc_t / (area * area);
  out.dkappa = 2.0 * acc_k / (area * area);
  return out;
}

// ------------------------------------------------------------------ ELVIRA

namespace detail {

// Youngs-type normal from central differences of the fraction field; points
// from liquid into gas.
inline double youngs_angle(const CellStencil& st) {
  const auto& a = st.alpha;
  const double gx = ((a[2][0] + 2.0 * a[2][1] + a[2][2]) -
                     (a[0][0] + 2.0 * a[0][1] + a[0][2])) /
                    (8.0 * st.hx);
  const double gy = ((a[0][2] + 2.0 * a[1][2] + a[2][2]) -
                     (a[0][0] + 2.0 * a[1][0] + a[2][0])) /
                    (8.0 * st.hy);
  if (gx == 0.0 && gy == 0.0) return 0.0;
  return std::atan2(-gy, -gx);
}

}  // namespace detail

// The six ELVIRA trial interfaces: backward/central/forward difference slopes
// of the column sums (heights over x) and of the row sums (heights over y),
// oriented by the Youngs normal and volume-enforced.
inline std::array<InterfaceCut, 6> elvira_candidates(const CellStencil& st) {
  const auto& a = st.alpha;
  const Vec2 ny{std::cos(detail::youngs_angle(st)), std::sin(detail::youngs_angle(st))};

  std::array<double, 3> hy_sum{}, hx_sum{};
  for (int i = 0; i < 3; ++i) {
    hy_sum[i] = st.hy * (a[i][0] + a[i][1] + a[i][2]);  // liquid height over x
    hx_sum[i] = st.hx * (a[0][i] + a[1][i] + a[2][i]);  // liquid height over y
  }
  const std::array<double, 3> sy{(hy_sum[1] - hy_sum[0]) / st.hx,
                                 (hy_sum[2] - hy_sum[0]) / (2.0 * st.hx),
                                 (hy_sum[2] - hy_sum[1]) / st.hx};
  const std::array<double, 3> sx{(hx_sum[1] - hx_sum[0]) / st.hy,
                                 (hx_sum[2] - hx_sum[0]) / (2.0 * st.hy),
                                 (hx_sum[2] - hx_sum[1]) / st.hy};

  const double target = st.alpha_center() * st.cell_area();
  const CellBox cell = st.box(0, 0);
  std::array<InterfaceCut, 6> out{};
  int k = 0;
  // liquid below: y_int = bottom + H; liquid above: y_int = top - H.  Either
  // way the slope of the interface contributes -s to the normal's x part.
  for (double s : sy) {
    const Vec2 n = (ny.y >= 0.0) ? Vec2{-s, 1.0} : Vec2{-s, -1.0};
    const double theta = std::atan2(n.y, n.x);
    out[k++] = {st.center, theta, 0.0, shift_for_volume(theta, 0.0, cell, target)};
  }
  for (double s : sx) {
    const Vec2 n = (ny.x >= 0.0) ? Vec2{1.0, -s} : Vec2{-1.0, -s};
    const double theta = std::atan2(n.y, n.x);
    out[k++] = {st.center, theta, 0.0, shift_for_volume(theta, 0.0, cell, target)};
  }
  return out;
}

// ------------------------------------------------------------ optimisation

// Reconstructs the interface of one mixed cell.  ELVIRA picks the best of
// its six candidates (ties broken by lowest index); the other methods run
// quasi-Newton descent on the normal angle (and curvature for PROST) with
// every evaluated cut volume-enforced.
inline Reconstruction reconstruct_cell(Method method, const CellStencil& st,
                                       ReconStats* stats = nullptr) {
  const double alpha = st.alpha_center();
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("reconstruct_cell: centre fraction must be in (0,1)");
  if (method_uses_first_moment(method) && !st.has_ref_m1)
    throw std::invalid_argument("reconstruct_cell: MOF methods need a reference moment");

  ReconStats local;
  local.cells = 1;
  const double target = alpha * st.cell_area();
  const CellBox cell = st.box(0, 0);

  auto enforced_cut = [&](double theta, double kappa) {
    int ev = 0;
    const double phi = shift_for_volume(theta, kappa, cell, target, &ev);
    if (kappa != 0.0) {
      ++local.shift_calls;
      local.shift_evaluations += ev;
    }
    return InterfaceCut{st.center, theta, kappa, phi};
  };

  Reconstruction result;
  if (method == Method::ELVIRA) {
    const auto candidates = elvira_candidates(st);
    int best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 6; ++i) {
      const double c = cost_lvira(candidates[i], st);
      ++local.cost_evaluations;
      if (c < best_cost) {
        best_cost = c;
        best = i;
      }
    }
    result.cut = candidates[best];
    result.cost_value = best_cost;
    result.evaluations = 6;
  } else {
    const bool lvira_family =
        method == Method::LVIRA || method == Method::PLVIRA || method == Method::PROST;
    const bool optimise_kappa = method == Method::PROST;
    const double h = st.h();
    double fixed_kappa = 0.0;
    if (method == Method::PLVIRA || method == Method::PMOF)
      fixed_kappa = st.kappa_valid ? st.kappa : 0.0;

    const double theta0 = detail::youngs_angle(st);
    const double kappa0 =
        optimise_kappa ? std::min(4.0, std::max(-4.0, (st.kappa_valid ? st.kappa : 0.0) * h))
                       : 0.0;

    const double h3 = std::pow(st.cell_area(), 1.5);
    auto objective = [&](const std::array<double, 4>& x, std::array<double, 4>& g) {
      const double theta = x[0];
      const double kappa = optimise_kappa ? x[1] / h : fixed_kappa;
      const InterfaceCut cut = enforced_cut(theta, kappa);
      ++local.cost_evaluations;
      g = {0.0, 0.0, 0.0, 0.0};
      if (lvira_family) {
        const double f = cost_lvira(cut, st);
        const LviraGradient gr = grad_cost_lvira(cut, st, optimise_kappa);
        g[0] = gr.dtheta;
        if (optimise_kappa) g[1] = gr.dkappa / h;
        return f;
      }
      // MOF family: minimise the squared nondimensional moment distance
      const ParabolaClip clip = clip_parabola_full(st.box(0, 0).polygon(), cut);
      const Vec2 m1_rel = clip.moments.m1 - st.center * clip.moments.m0;
      const Vec2 delta = st.ref_m1 - m1_rel;
      const double f = norm2(delta) / (h3 * h3);
      const detail::ShiftDerivatives sd =
          detail::shift_derivatives(clip.arcs, cut.kappa, cut.phi);
      if (!sd.degenerate) {
        const Vec2 dm1 = detail::dm1_dtheta(cut, clip.arcs, sd.dphi_dtheta);
        g[0] = -2.0 * dot(delta, dm1) / (h3 * h3);
      }
      return f;
    };

    LbfgsOptions opt;
    opt.grad_tol = std::min(1e-2, (h / st.length_scale) * (h / st.length_scale));
    opt.max_iterations = 100;
    if (optimise_kappa) {
      opt.lower[1] = -4.0;
      opt.upper[1] = 4.0;
    }
    const LbfgsResult lr = optimise_kappa
                               ? lbfgs_minimize<2>(objective, {theta0, kappa0}, opt)
                               : lbfgs_minimize<1>(objective, {theta0}, opt);

    double theta_star = lr.x[0];
    double kappa_star = optimise_kappa ? lr.x[1] / h : fixed_kappa;
    if (lr.failed) {
      theta_star = theta0;
      kappa_star = optimise_kappa ? kappa0 / h : fixed_kappa;
      result.failed = true;
      local.failures = 1;
    }
    result.cut = enforced_cut(theta_star, kappa_star);
    result.converged = lr.converged && !lr.failed;
    result.evaluations = lr.evaluations;
    result.cost_value =
        lvira_family ? cost_lvira(result.cut, st) : cost_mof(result.cut, st);
  }

  // volume-enforcement audit
  const double m0 = clip_parabola_moments(cell.polygon(), result.cut).m0;
  local.max_volume_error =
      std::max(local.max_volume_error, std::abs(m0 - target) / st.cell_area());
  if (stats) stats->merge(local);
  return result;
}

}  // namespace ppic2d
