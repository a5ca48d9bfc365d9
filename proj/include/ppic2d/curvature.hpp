#pragma once

// Interface curvature from volume fractions: averaged local height functions
// in a principal axis direction with second-order finite differences, plus a
// mixed-direction least-squares fallback when aligned columns are invalid.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ppic2d/fields.hpp"

namespace ppic2d {

struct HeightSample {
  double value = 0.0;  // interface position along the direction, from the column centre
  bool valid = false;
};

// Principal direction of a height column: the axis and orientation the
// interface normal (liquid to gas) points along.
enum class HfDirection : int8_t { XPlus, XMinus, YPlus, YMinus };

inline constexpr int kHeightHalfWidth = 3;  // N_H: 7 cells per column

// Averaged heights of 3 adjacent columns of 7 fractions each.
// block[c][k]: c = transverse index (0..2), k = 0..6 along the direction with
// k = 0 at the liquid end.  A column is valid when the liquid end is full,
// the gas end is empty and the fractions fall monotonically.
// The height is h * sum(alpha) - (N_H + 1/2) h, the signed interface position
// along the direction measured from the column centre.
inline std::array<HeightSample, 3> averaged_heights(
    const std::array<std::array<double, 7>, 3>& block, double h) {
  std::array<HeightSample, 3> out{};
  for (int c = 0; c < 3; ++c) {
    const auto& col = block[c];
    bool valid = col[0] >= 1.0 - 1e-9 && col[6] <= 1e-9;
    for (int k = 0; k + 1 < 7 && valid; ++k)
      if (col[k + 1] > col[k] + 1e-12) valid = false;
    double sum = 0.0;
    for (int k = 0; k < 7; ++k) sum += col[k];
    out[c] = {h * sum - (kHeightHalfWidth + 0.5) * h, valid};
  }
  return out;
}

// Curvature from three valid adjacent heights.  The sign is mapped to the
// cut convention (a liquid disk has kappa = +1/R), which negates the raw
// height-function second derivative.
inline double lhf_curvature(const std::array<HeightSample, 3>& heights, double h) {
  for (const HeightSample& s : heights)
    if (!s.valid) throw std::invalid_argument("lhf_curvature: invalid height sample");
  const double hm = heights[0].value, h0 = heights[1].value, hp = heights[2].value;
  const double d1 = (hp - hm) / (2.0 * h);
  const double d2 = (hp - 2.0 * h0 + hm) / (h * h);
  return -d2 * std::pow(1.0 + d1 * d1, -1.5);
}

struct CurvatureField {
  std::vector<double> kappa;
  std::vector<uint8_t> valid;
};

namespace detail {

template <class AlphaFn>
inline std::array<std::array<double, 7>, 3> gather_columns(AlphaFn&& alpha, int i, int j,
                                                           HfDirection dir) {
  std::array<std::array<double, 7>, 3> block{};
  for (int c = -1; c <= 1; ++c)
    for (int k = -3; k <= 3; ++k) {
      double v = 0.0;
      switch (dir) {
        case HfDirection::XPlus: v = alpha(i + k, j + c); break;
        case HfDirection::XMinus: v = alpha(i - k, j + c); break;
        case HfDirection::YPlus: v = alpha(i + c, j + k); break;
        case HfDirection::YMinus: v = alpha(i + c, j - k); break;
      }
      block[c + 1][k + 3] = v;
    }
  return block;
}

inline Vec2 direction_unit(HfDirection dir) {
  switch (dir) {
    case HfDirection::XPlus: return {1.0, 0.0};
    case HfDirection::XMinus: return {-1.0, 0.0};
    case HfDirection::YPlus: return {0.0, 1.0};
    case HfDirection::YMinus: return {0.0, -1.0};
  }
  return {1.0, 0.0};
}

inline Vec2 transverse_unit(HfDirection dir) {
  switch (dir) {
    case HfDirection::XPlus:
    case HfDirection::XMinus: return {0.0, 1.0};
    default: return {1.0, 0.0};
  }
}

// Solve the 3x3 normal equations of the least-squares parabola fit
// nu = c0 + c1 xi + c2 xi^2; returns false when singular.
inline bool fit_parabola(const std::vector<Vec2>& pts, double scale, double& c1,
                         double& c2) {
  double s[5] = {0, 0, 0, 0, 0};
  double b[3] = {0, 0, 0};
  for (const Vec2& p : pts) {
    const double x = p.x / scale;
    double xp = 1.0;
    for (int k = 0; k < 5; ++k) {
      s[k] += xp;
      xp *= x;
    }
    b[0] += p.y;
    b[1] += p.y * (p.x / scale);
    b[2] += p.y * (p.x / scale) * (p.x / scale);
  }
  double A[3][3] = {{s[0], s[1], s[2]}, {s[1], s[2], s[3]}, {s[2], s[3], s[4]}};
  double rhs[3] = {b[0], b[1], b[2]};
  // Gaussian elimination with partial pivoting
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-12) return false;
    std::swap(A[col], A[piv]);
    std::swap(rhs[col], rhs[piv]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = A[r][col] / A[col][col];
      for (int cc = col; cc < 3; ++cc) A[r][cc] -= f * A[col][cc];
      rhs[r] -= f * rhs[col];
    }
  }
  double x[3];
  for (int r = 2; r >= 0; --r) {
    double acc = rhs[r];
    for (int cc = r + 1; cc < 3; ++cc) acc -= A[r][cc] * x[cc];
    x[r] = acc / A[r][r];
  }
  c1 = x[1] / scale;
  c2 = x[2] / (scale * scale);
  return true;
}

}  // namespace detail

struct GhfResult {
  double kappa = 0.0;
  bool valid = false;
};

// Generalised height-function curvature of one interface cell.  The aligned
// direction (dominant Youngs-normal component) is tried first; if any of its
// three columns is invalid, valid heights from both principal directions are
// converted to interface points and a parabola is fitted in the frame of the
// Youngs normal (at least 4 points required).
template <class AlphaFn>
inline GhfResult ghf_curvature_at(AlphaFn&& alpha, int i, int j, double h) {
  std::array<std::array<double, 3>, 3> a33{};
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj) a33[di + 1][dj + 1] = alpha(i + di, j + dj);
  const Vec2 n = youngs_normal(a33, h, h);

  const HfDirection dir_x = n.x >= 0.0 ? HfDirection::XPlus : HfDirection::XMinus;
  const HfDirection dir_y = n.y >= 0.0 ? HfDirection::YPlus : HfDirection::YMinus;
  const HfDirection primary = std::abs(n.x) >= std::abs(n.y) ? dir_x : dir_y;

  const auto primary_heights =
      averaged_heights(detail::gather_columns(alpha, i, j, primary), h);
  if (primary_heights[0].valid && primary_heights[1].valid && primary_heights[2].valid)
    return {lhf_curvature(primary_heights, h), true};

  // mixed mode: gather interface points from both principal directions
  std::vector<Vec2> pts;
  const Vec2 tau{-n.y, n.x};
  for (const HfDirection dir : {dir_x, dir_y}) {
    const auto heights = averaged_heights(detail::gather_columns(alpha, i, j, dir), h);
    const Vec2 d = detail::direction_unit(dir);
    const Vec2 tr = detail::transverse_unit(dir);
    for (int c = -1; c <= 1; ++c) {
      if (!heights[c + 1].valid) continue;
      // interface point relative to the cell centre
      const Vec2 p = d * heights[c + 1].value + tr * (c * h);
      pts.push_back({dot(p, tau), dot(p, n)});
    }
  }
  if (pts.size() < 4) return {};
  double c1 = 0.0, c2 = 0.0;
  if (!detail::fit_parabola(pts, h, c1, c2)) return {};
  const double kappa = -2.0 * c2 * std::pow(1.0 + c1 * c1, -1.5);
  return {kappa, true};
}

// GHF curvature for every interface cell of a fraction field.
inline CurvatureField ghf_curvature_field(const Grid& grid,
                                          const std::vector<double>& alpha,
                                          double band = 1e-10) {
  if (std::abs(grid.hx - grid.hy) > 1e-12 * grid.hx)
    throw std::invalid_argument("ghf_curvature_field: requires square cells");
  CurvatureField out;
  out.kappa.assign(grid.cells(), 0.0);
  out.valid.assign(grid.cells(), 0);
  auto sample = [&](int i, int j) {
    return alpha[grid.index(grid.stencil_x(i), grid.stencil_y(j))];
  };
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const double a = alpha[grid.index(i, j)];
      if (!(a > band && a < 1.0 - band)) continue;
      const GhfResult r = ghf_curvature_at(sample, i, j, grid.hx);
      out.kappa[grid.index(i, j)] = r.kappa;
      out.valid[grid.index(i, j)] = r.valid ? 1 : 0;
    }
  return out;
}

}  // namespace ppic2d
