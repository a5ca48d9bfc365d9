#pragma once

// One time step of Lagrangian-remap advection: trace cell corners backward
// with Heun's method, clip the preimage polygon against the reconstructed
// liquid domain of the 3x3 neighbourhood, and advect the liquid centroid
// forward for the moment-tracking methods.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ppic2d/curvature.hpp"
#include "ppic2d/fields.hpp"
#include "ppic2d/reconstruct.hpp"

namespace ppic2d {

struct AdvectionState {
  std::vector<double> alpha;
  std::vector<Vec2> m1;  // liquid first moment relative to the cell centroid
  double time = 0.0;
};

inline AdvectionState state_from_exact(const ExactField& f, double t = 0.0) {
  return {f.alpha, f.m1, t};
}

// Heun (explicit trapezoid) backward trace of dx/dt = u from t + dt to t.
inline Vec2 trace_point_backward(Vec2 x, const VelocityProvider& vel, double t,
                                 double dt) {
  const Vec2 k1 = vel.velocity(t + dt, x);
  const Vec2 x1 = x - k1 * dt;
  const Vec2 k2 = vel.velocity(t, x1);
  return x - (k1 + k2) * (0.5 * dt);
}

// Heun forward step from t to t + dt (used for the liquid centroid).
inline Vec2 trace_point_forward(Vec2 x, const VelocityProvider& vel, double t,
                                double dt) {
  const Vec2 k1 = vel.velocity(t, x);
  const Vec2 x1 = x + k1 * dt;
  const Vec2 k2 = vel.velocity(t + dt, x1);
  return x + (k1 + k2) * (0.5 * dt);
}

// Backward-traced cell, corners connected straight.  The result must stay
// convex (guaranteed for CFL <= 1 and smooth fields); a non-convex trace is
// rejected because the clipping operations require convexity.
inline Polygon build_preimage(const Grid& grid, int i, int j,
                              const VelocityProvider& vel, double t, double dt) {
  const Vec2 lo = grid.cell_lo(i, j), hi = grid.cell_hi(i, j);
  Polygon p;
  p.push_back(trace_point_backward({lo.x, lo.y}, vel, t, dt));
  p.push_back(trace_point_backward({hi.x, lo.y}, vel, t, dt));
  p.push_back(trace_point_backward({hi.x, hi.y}, vel, t, dt));
  p.push_back(trace_point_backward({lo.x, hi.y}, vel, t, dt));
  if (!is_convex(p, 1e-10))
    throw std::runtime_error("build_preimage: traced preimage is not convex");
  return p;
}

namespace detail {

// Liquid moments of one neighbour's contribution to the preimage overlap.
inline Moments2 neighbour_overlap(const Grid& grid, const InterfaceSet& interfaces,
                                  const Polygon& preimage, int gi, int gj) {
  // unwrapped neighbour box
  const Vec2 lo{grid.origin.x + gi * grid.hx, grid.origin.y + gj * grid.hy};
  const Vec2 hi{lo.x + grid.hx, lo.y + grid.hy};

  int wi = gi, wj = gj;
  if (grid.periodic_x) wi = ((gi % grid.nx) + grid.nx) % grid.nx;
  if (grid.periodic_y) wj = ((gj % grid.ny) + grid.ny) % grid.ny;
  if (!grid.in_bounds(wi, wj)) return {};  // outside a wall: no liquid there

  const int idx = grid.index(wi, wj);
  const CellKind kind = interfaces.kind[idx];
  if (kind == CellKind::Empty) return {};

  const Polygon piece = clip_to_box(preimage, lo, hi);
  if (piece.size() < 3) return {};
  if (kind == CellKind::Full) return polygon_moments(piece);

  const Vec2 offset{(gi - wi) * grid.hx, (gj - wj) * grid.hy};
  return clip_parabola_moments(piece, interfaces.cut[idx].translated(offset));
}

}  // namespace detail

// Liquid moments of the preimage: sum of the clipped overlaps with the 3x3
// neighbourhood's reconstructed liquid regions.
inline Moments2 remap_fraction(const Grid& grid, const InterfaceSet& interfaces,
                               const Polygon& preimage, int i, int j) {
  Moments2 acc;
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di)
      acc += detail::neighbour_overlap(grid, interfaces, preimage, i + di, j + dj);
  return acc;
}

// Reference first moment for the next step: the liquid centroid of the
// preimage overlap advected forward as a point particle, scaled by the new
// liquid volume.  Returns moments in absolute coordinates.
inline Vec2 advect_centroid(const Moments2& overlap, const VelocityProvider& vel,
                            double t, double dt, double new_m0) {
  if (!(new_m0 > 0.0))
    throw std::invalid_argument("advect_centroid: new volume must be positive");
  const Vec2 c = overlap.centroid();
  return trace_point_forward(c, vel, t, dt) * new_m0;
}

struct AdvanceOptions {
  Method method = Method::ELVIRA;
  double pure_band = 1e-10;    // fractions outside [band, 1-band] are pure
  double length_scale = 1.0;   // optimiser tolerance scale L
};

struct AdvanceResult {
  AdvectionState state;
  InterfaceSet interfaces;   // reconstruction of the *old* time level
  ReconStats recon;
  double clamped_volume = 0.0;
};

// Classifies cells and reconstructs every interface cell of a state.
inline InterfaceSet reconstruct_all(const Grid& grid, const AdvectionState& state,
                                    Method method, double pure_band,
                                    double length_scale, ReconStats* stats = nullptr) {
  InterfaceSet out;
  out.resize(grid.cells());

  const bool parabolic = method_is_parabolic(method);
  CurvatureField kf;
  if (parabolic) kf = ghf_curvature_field(grid, state.alpha, pure_band);

  auto sample = [&](int i, int j) {
    return state.alpha[grid.index(grid.stencil_x(i), grid.stencil_y(j))];
  };

  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const int idx = grid.index(i, j);
      const double a = state.alpha[idx];
      if (a <= pure_band) {
        out.kind[idx] = CellKind::Empty;
        continue;
      }
      if (a >= 1.0 - pure_band) {
        out.kind[idx] = CellKind::Full;
        continue;
      }
      CellStencil st;
      st.center = grid.centroid(i, j);
      st.hx = grid.hx;
      st.hy = grid.hy;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) st.alpha[di + 1][dj + 1] = sample(i + di, j + dj);
      st.alpha[1][1] = a;
      st.length_scale = length_scale;
      if (method_uses_first_moment(method)) {
        st.ref_m1 = state.m1[idx];
        st.has_ref_m1 = true;
      }
      if (parabolic) {
        st.kappa = kf.kappa[idx];
        st.kappa_valid = kf.valid[idx] != 0;
      }
      const Reconstruction rec = reconstruct_cell(method, st, stats);
      out.kind[idx] = CellKind::Cut;
      out.cut[idx] = rec.cut;
    }
  return out;
}

// One Lagrangian-remap step from state.time to state.time + dt.  Cells whose
// 3x3 neighbourhood is uniformly pure are copied; all others are remapped
// through their backward-traced preimages.
inline AdvanceResult advance(const Grid& grid, const AdvectionState& state,
                             const VelocityProvider& vel, double dt,
                             const AdvanceOptions& opt) {
  AdvanceResult out;
  const double t = state.time;
  vel.prepare(t, t + dt);

  out.interfaces =
      reconstruct_all(grid, state, opt.method, opt.pure_band, opt.length_scale,
                      &out.recon);

  const bool track_m1 = method_uses_first_moment(opt.method);
  out.state.alpha.assign(grid.cells(), 0.0);
  out.state.m1.assign(grid.cells(), Vec2{0.0, 0.0});
  out.state.time = t + dt;
  const double area = grid.cell_area();

  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const int idx = grid.index(i, j);

      // uniform neighbourhoods advect into themselves
      bool any_full = false, any_empty = false, any_cut = false;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          int wi = i + di, wj = j + dj;
          if (grid.periodic_x) wi = ((wi % grid.nx) + grid.nx) % grid.nx;
          if (grid.periodic_y) wj = ((wj % grid.ny) + grid.ny) % grid.ny;
          if (!grid.in_bounds(wi, wj)) {
            any_empty = true;  // outside a wall counts as gas
            continue;
          }
          switch (out.interfaces.kind[grid.index(wi, wj)]) {
            case CellKind::Full: any_full = true; break;
            case CellKind::Empty: any_empty = true; break;
            case CellKind::Cut: any_cut = true; break;
          }
        }
      if (!any_cut && !(any_full && any_empty)) {
        out.state.alpha[idx] = state.alpha[idx];
        out.state.m1[idx] = state.m1[idx];
        continue;
      }

      const Polygon preimage = build_preimage(grid, i, j, vel, t, dt);
      const Moments2 overlap = remap_fraction(grid, out.interfaces, preimage, i, j);
      double a_new = overlap.m0 / area;
      const double clamped = std::min(1.0, std::max(0.0, a_new));
      out.clamped_volume += std::abs(a_new - clamped) * area;
      out.state.alpha[idx] = clamped;

      if (track_m1) {
        if (overlap.m0 > 0.0 && clamped > 0.0) {
          const double m0_new = clamped * area;
          const Vec2 m1_abs = advect_centroid(overlap, vel, t, dt, m0_new);
          out.state.m1[idx] = m1_abs - grid.centroid(i, j) * m0_new;
        } else {
          out.state.m1[idx] = {0.0, 0.0};
        }
      }
    }
  return out;
}

}  // namespace ppic2d
