#pragma once

// Experimental substrate: uniform rectilinear grids, analytic shapes and
// velocity fields, exact moment initialisation and error-norm measurement.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ppic2d/geometry.hpp"

namespace ppic2d {

// -------------------------------------------------------------------- grid

struct Grid {
  Vec2 origin{0.0, 0.0};
  int nx = 1;
  int ny = 1;
  double hx = 1.0;
  double hy = 1.0;
  bool periodic_x = false;
  bool periodic_y = false;

  int cells() const { return nx * ny; }
  double cell_area() const { return hx * hy; }
  double h() const { return std::min(hx, hy); }
  Vec2 domain_lo() const { return origin; }
  Vec2 domain_hi() const { return {origin.x + nx * hx, origin.y + ny * hy}; }
  double domain_area() const { return nx * hx * ny * hy; }

  int index(int i, int j) const { return j * nx + i; }
  Vec2 centroid(int i, int j) const {
    return {origin.x + (i + 0.5) * hx, origin.y + (j + 0.5) * hy};
  }
  Vec2 cell_lo(int i, int j) const { return {origin.x + i * hx, origin.y + j * hy}; }
  Vec2 cell_hi(int i, int j) const {
    return {origin.x + (i + 1) * hx, origin.y + (j + 1) * hy};
  }
  bool in_bounds(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }

  // Index lookup for stencil reads: periodic axes wrap, non-periodic axes
  // mirror about the boundary (exterior cell k maps to cell -k-1).
  int stencil_x(int i) const {
    if (periodic_x) return ((i % nx) + nx) % nx;
    if (i < 0) i = -i - 1;
    if (i >= nx) i = 2 * nx - 1 - i;
    return std::min(std::max(i, 0), nx - 1);
  }
  int stencil_y(int j) const {
    if (periodic_y) return ((j % ny) + ny) % ny;
    if (j < 0) j = -j - 1;
    if (j >= ny) j = 2 * ny - 1 - j;
    return std::min(std::max(j, 0), ny - 1);
  }
};

inline Grid make_grid(Vec2 lo, Vec2 hi, int nx, int ny, bool periodic_x = false,
                      bool periodic_y = false) {
  return {lo, nx, ny, (hi.x - lo.x) / nx, (hi.y - lo.y) / ny, periodic_x, periodic_y};
}

// Per-cell interface classification produced by a reconstruction sweep.
enum class CellKind : int8_t { Empty = 0, Full = 1, Cut = 2 };

struct InterfaceSet {
  std::vector<CellKind> kind;
  std::vector<InterfaceCut> cut;  // meaningful where kind == Cut

  void resize(int n) {
    kind.assign(n, CellKind::Empty);
    cut.assign(n, InterfaceCut{});
  }
};

// Youngs-type interface normal from a 3x3 fraction block (a[di+1][dj+1]);
// points from liquid into gas.  Zero gradient returns (1, 0).
inline Vec2 youngs_normal(const std::array<std::array<double, 3>, 3>& a, double hx,
                          double hy) {
  const double gx = ((a[2][0] + 2.0 * a[2][1] + a[2][2]) -
                     (a[0][0] + 2.0 * a[0][1] + a[0][2])) /
                    (8.0 * hx);
  const double gy = ((a[0][2] + 2.0 * a[1][2] + a[2][2]) -
                     (a[0][0] + 2.0 * a[1][0] + a[2][0])) /
                    (8.0 * hy);
  const double n = std::hypot(gx, gy);
  if (n == 0.0) return {1.0, 0.0};
  return {-gx / n, -gy / n};
}

// ------------------------------------------------------------------ shapes

// Closed-form level set with the library-wide convention liquid = {q <= 0}.
class ShapeLevelSet {
 public:
  virtual ~ShapeLevelSet() = default;
  virtual double value(Vec2 p) const = 0;

  virtual Vec2 gradient(Vec2 p) const {
    const double e = 1e-6 * scale();
    return {(value({p.x + e, p.y}) - value({p.x - e, p.y})) / (2.0 * e),
            (value({p.x, p.y + e}) - value({p.x, p.y - e})) / (2.0 * e)};
  }

  // Conservative bounds of q over an axis-aligned box; the default uses the
  // centre value and a Lipschitz constant.
  virtual std::array<double, 2> value_range(Vec2 lo, Vec2 hi) const {
    const Vec2 c = (lo + hi) * 0.5;
    const double r = 0.5 * norm(hi - lo) * lipschitz();
    const double v = value(c);
    return {v - r, v + r};
  }

  virtual double lipschitz() const { return 1.0; }
  virtual double scale() const = 0;

  // Signed curvature of the interface near p (at the closest boundary point),
  // in the liquid-disk-positive convention; nullopt when undefined.
  virtual std::optional<double> curvature_near(Vec2 p) const { return std::nullopt; }
};

class CircleShape final : public ShapeLevelSet {
 public:
  CircleShape(Vec2 center, double radius) : c_(center), r_(radius) {}
  double value(Vec2 p) const override { return norm(p - c_) - r_; }
  Vec2 gradient(Vec2 p) const override {
    const Vec2 d = p - c_;
    const double n = norm(d);
    if (n == 0.0) return {1.0, 0.0};
    return d / n;
  }
  std::array<double, 2> value_range(Vec2 lo, Vec2 hi) const override {
    const double dx = std::max({lo.x - c_.x, c_.x - hi.x, 0.0});
    const double dy = std::max({lo.y - c_.y, c_.y - hi.y, 0.0});
    const double rlo = std::hypot(dx, dy);
    double rhi = 0.0;
    for (const Vec2 v : {Vec2{lo.x, lo.y}, Vec2{hi.x, lo.y}, Vec2{lo.x, hi.y},
                         Vec2{hi.x, hi.y}})
      rhi = std::max(rhi, norm(v - c_));
    return {rlo - r_, rhi - r_};
  }
  double scale() const override { return r_; }
  std::optional<double> curvature_near(Vec2) const override { return 1.0 / r_; }
  Vec2 center() const { return c_; }
  double radius() const { return r_; }

 private:
  Vec2 c_;
  double r_;
};

// Five-petalled perturbed circle: the boundary is r = R (1 + A sin(p0 + n w))
// in polar coordinates (r, w) about the centre, with the full two-argument
// angle so the perturbation is continuous around the loop.
class FlowerShape final : public ShapeLevelSet {
 public:
  FlowerShape(Vec2 center, double radius, double amplitude = 0.1, int petals = 5,
              double phase = 0.1)
      : c_(center), r_(radius), a_(amplitude), n_(petals), p0_(phase) {}

  double boundary_radius(double w) const { return r_ * (1.0 + a_ * std::sin(p0_ + n_ * w)); }

  double value(Vec2 p) const override {
    const Vec2 d = p - c_;
    const double r = norm(d);
    const double w = std::atan2(d.y, d.x);
    return r - boundary_radius(w);
  }

  Vec2 gradient(Vec2 p) const override {
    const Vec2 d = p - c_;
    const double r2 = norm2(d);
    if (r2 == 0.0) return {1.0, 0.0};
    const double r = std::sqrt(r2);
    const double w = std::atan2(d.y, d.x);
    const double db_dw = r_ * a_ * n_ * std::cos(p0_ + n_ * w);
    // grad w = (-y, x) / r^2
    return Vec2{d.x / r, d.y / r} - Vec2{-d.y / r2, d.x / r2} * db_dw;
  }

  std::array<double, 2> value_range(Vec2 lo, Vec2 hi) const override {
    const double dx = std::max({lo.x - c_.x, c_.x - hi.x, 0.0});
    const double dy = std::max({lo.y - c_.y, c_.y - hi.y, 0.0});
    const double rlo = std::hypot(dx, dy);
    double rhi = 0.0;
    for (const Vec2 v : {Vec2{lo.x, lo.y}, Vec2{hi.x, lo.y}, Vec2{lo.x, hi.y},
                         Vec2{hi.x, hi.y}})
      rhi = std::max(rhi, norm(v - c_));
    return {rlo - r_ * (1.0 + a_), rhi - r_ * (1.0 - a_)};
  }

  double scale() const override { return r_; }

  // |grad q| <= 1 + (amplitude * petals * R) / r; boxes closer to the centre
  // than r ~ R/3 are certified pure by value_range before this bound is used
  double lipschitz() const override { return 1.0 + 3.0 * a_ * n_; }

  std::optional<double> curvature_near(Vec2 p) const override {
    const Vec2 d = p - c_;
    if (norm(d) == 0.0) return std::nullopt;
    const double w = std::atan2(d.y, d.x);
    const double s = std::sin(p0_ + n_ * w), c = std::cos(p0_ + n_ * w);
    const double r = r_ * (1.0 + a_ * s);
    const double rp = r_ * a_ * n_ * c;
    const double rpp = -r_ * a_ * n_ * n_ * s;
    return (r * r + 2.0 * rp * rp - r * rpp) / std::pow(r * r + rp * rp, 1.5);
  }

 private:
  Vec2 c_;
  double r_, a_;
  int n_;
  double p0_;
};

class HalfPlaneShape final : public ShapeLevelSet {
 public:
  explicit HalfPlaneShape(const InterfaceCut& cut, double scale = 1.0)
      : cut_(cut), scale_(scale) {
    if (cut.kappa != 0.0)
      throw std::invalid_argument("HalfPlaneShape: cut must be linear");
  }
  double value(Vec2 p) const override { return cut_.value(p); }
  Vec2 gradient(Vec2 p) const override { (void)p; return cut_.normal(); }
  double scale() const override { return scale_; }
  std::optional<double> curvature_near(Vec2) const override { return 0.0; }

 private:
  InterfaceCut cut_;
  double scale_;
};

// Level set advected backward along a velocity field with dense RK4 substeps;
// used as a reference solution for single-step advection tests.
template <class Vel>
class WarpedShape final : public ShapeLevelSet {
 public:
  WarpedShape(const ShapeLevelSet& base, const Vel& vel, double t0, double t1,
              int substeps, double lipschitz_bound)
      : base_(base), vel_(vel), t0_(t0), t1_(t1), sub_(substeps), lip_(lipschitz_bound) {}

  double value(Vec2 p) const override { return base_.value(trace_back(p)); }
  double lipschitz() const override { return lip_ * base_.lipschitz(); }
  double scale() const override { return base_.scale(); }

 private:
  Vec2 trace_back(Vec2 x) const {
    const double dt = (t0_ - t1_) / sub_;  // negative: integrate backward
    double t = t1_;
    for (int s = 0; s < sub_; ++s) {
      const Vec2 k1 = vel_(t, x);
      const Vec2 k2 = vel_(t + 0.5 * dt, x + k1 * (0.5 * dt));
      const Vec2 k3 = vel_(t + 0.5 * dt, x + k2 * (0.5 * dt));
      const Vec2 k4 = vel_(t + dt, x + k3 * dt);
      x += (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
      t += dt;
    }
    return x;
  }

  const ShapeLevelSet& base_;
  const Vel& vel_;
  double t0_, t1_;
  int sub_;
  double lip_;
};

// -------------------------------------------------------------- velocities

class VelocityProvider {
 public:
  virtual ~VelocityProvider() = default;
  virtual Vec2 velocity(double t, Vec2 p) const = 0;
  // Called once before a step covering [t0, t1]; sampling providers refresh
  // their time levels here.
  virtual void prepare(double t0, double t1) const { (void)t0; (void)t1; }
};

// Divergence-free single vortex with period T: the perpendicular gradient of
// psi = cos(pi t / T) / pi * sin^2(pi x) cos^2(pi y).
class VortexVelocity final : public VelocityProvider {
 public:
  explicit VortexVelocity(double period) : T_(period) {}
  Vec2 velocity(double t, Vec2 p) const override {
    const double a = std::cos(M_PI * t / T_);
    const double sx = std::sin(M_PI * p.x), cx = std::cos(M_PI * p.x);
    const double sy = std::sin(M_PI * p.y), cy = std::cos(M_PI * p.y);
    return {-a * sx * sx * 2.0 * sy * cy, -a * 2.0 * sx * cx * cy * cy};
  }
  double period() const { return T_; }

 private:
  double T_;
};

class UniformVelocity final : public VelocityProvider {
 public:
  explicit UniformVelocity(Vec2 u) : u_(u) {}
  Vec2 velocity(double, Vec2) const override { return u_; }

 private:
  Vec2 u_;
};

// Staggered-grid sampling of an analytic field: face-normal components are
// sampled at the two step endpoints, interpolated bilinearly in space and
// linearly in time.
class StaggeredVelocity final : public VelocityProvider {
 public:
  StaggeredVelocity(const VelocityProvider& base, const Grid& grid)
      : base_(base), g_(grid) {
    u_[0].resize((g_.nx + 1) * g_.ny);
    u_[1].resize((g_.nx + 1) * g_.ny);
    v_[0].resize(g_.nx * (g_.ny + 1));
    v_[1].resize(g_.nx * (g_.ny + 1));
  }

  void prepare(double t0, double t1) const override {
    t0_ = t0;
    t1_ = t1;
    for (int lvl = 0; lvl < 2; ++lvl) {
      const double t = lvl == 0 ? t0 : t1;
      for (int j = 0; j < g_.ny; ++j)
        for (int i = 0; i <= g_.nx; ++i) {
          const Vec2 p{g_.origin.x + i * g_.hx, g_.origin.y + (j + 0.5) * g_.hy};
          u_[lvl][j * (g_.nx + 1) + i] = base_.velocity(t, p).x;
        }
      for (int j = 0; j <= g_.ny; ++j)
        for (int i = 0; i < g_.nx; ++i) {
          const Vec2 p{g_.origin.x + (i + 0.5) * g_.hx, g_.origin.y + j * g_.hy};
          v_[lvl][j * g_.nx + i] = base_.velocity(t, p).y;
        }
    }
  }

  Vec2 velocity(double t, Vec2 p) const override {
    const double w =
        (t1_ > t0_) ? std::min(1.0, std::max(0.0, (t - t0_) / (t1_ - t0_))) : 0.0;
    const double ux = (1.0 - w) * sample_u(0, p) + w * sample_u(1, p);
    const double vy = (1.0 - w) * sample_v(0, p) + w * sample_v(1, p);
    return {ux, vy};
  }

 private:
  double sample_u(int lvl, Vec2 p) const {
    // u lives at (i, j+1/2); bilinear with clamped indices
    const double fx = (p.x - g_.origin.x) / g_.hx;
    const double fy = (p.y - g_.origin.y) / g_.hy - 0.5;
    return bilinear(u_[lvl].data(), g_.nx + 1, g_.ny, fx, fy);
  }
  double sample_v(int lvl, Vec2 p) const {
    const double fx = (p.x - g_.origin.x) / g_.hx - 0.5;
    const double fy = (p.y - g_.origin.y) / g_.hy;
    return bilinear(v_[lvl].data(), g_.nx, g_.ny + 1, fx, fy);
  }
  static double bilinear(const double* f, int nx, int ny, double x, double y) {
    x = std::min(double(nx - 1), std::max(0.0, x));
    y = std::min(double(ny - 1), std::max(0.0, y));
    const int i = std::min(int(x), nx - 2 >= 0 ? nx - 2 : 0);
    const int j = std::min(int(y), ny - 2 >= 0 ? ny - 2 : 0);
    const double ax = x - i, ay = y - j;
    const int i1 = std::min(i + 1, nx - 1), j1 = std::min(j + 1, ny - 1);
    return (1 - ax) * (1 - ay) * f[j * nx + i] + ax * (1 - ay) * f[j * nx + i1] +
           (1 - ax) * ay * f[j1 * nx + i] + ax * ay * f[j1 * nx + i1];
  }

  const VelocityProvider& base_;
  Grid g_;
  mutable double t0_ = 0.0, t1_ = 0.0;
  mutable std::array<std::vector<double>, 2> u_{}, v_{};
};

// Analytic vortex velocity usable as a plain callable (for reference traces).
struct VortexCallable {
  double T;
  Vec2 operator()(double t, Vec2 p) const {
    const double a = std::cos(M_PI * t / T);
    const double sx = std::sin(M_PI * p.x), cx = std::cos(M_PI * p.x);
    const double sy = std::sin(M_PI * p.y), cy = std::cos(M_PI * p.y);
    return {-a * sx * sx * 2.0 * sy * cy, -a * 2.0 * sx * cx * cy * cy};
  }
};

// --------------------------------------------------- exact initialisation

struct ExactField {
  std::vector<double> alpha;
  std::vector<Vec2> m1;          // first moment relative to the cell centroid
  std::vector<uint8_t> mixed;    // shape boundary crosses the cell
  double total_volume = 0.0;
};

namespace detail {

// Local parabolic model of the level set on a box: interface point by Newton
// along the gradient, curvature from second differences of q.
inline std::optional<InterfaceCut> local_quadratic_cut(const ShapeLevelSet& shape,
                                                       Vec2 lo, Vec2 hi) {
  const Vec2 c = (lo + hi) * 0.5;
  const double diag = norm(hi - lo);
  Vec2 g = shape.gradient(c);
  const double gn = norm(g);
  if (!(gn > 1e-12)) return std::nullopt;
  Vec2 n = g / gn;

  double s = 0.0;
  bool ok = false;
  for (int it = 0; it < 40; ++it) {
    const Vec2 p{c.x + s * n.x, c.y + s * n.y};
    const double v = shape.value(p);
    const double dv = dot(shape.gradient(p), n);
    if (!(std::abs(dv) > 1e-14)) break;
    const double step = v / dv;
    s -= step;
    if (std::abs(s) > 4.0 * diag) return std::nullopt;  // interface far away
    if (std::abs(step) < 1e-15 * std::max(diag, shape.scale())) {
      ok = true;
      break;
    }
  }
  if (!ok) return std::nullopt;

  const Vec2 p{c.x + s * n.x, c.y + s * n.y};
  const Vec2 gp = shape.gradient(p);
  const double gpn = norm(gp);
  if (!(gpn > 1e-12)) return std::nullopt;

  // level-set curvature from central differences at the interface point
  const double e = std::max(diag / 8.0, 1e-7 * shape.scale());
  const double qxx =
      (shape.value({p.x + e, p.y}) - 2.0 * shape.value(p) + shape.value({p.x - e, p.y})) /
      (e * e);
  const double qyy =
      (shape.value({p.x, p.y + e}) - 2.0 * shape.value(p) + shape.value({p.x, p.y - e})) /
      (e * e);
  const double qxy = (shape.value({p.x + e, p.y + e}) - shape.value({p.x + e, p.y - e}) -
                      shape.value({p.x - e, p.y + e}) + shape.value({p.x - e, p.y - e})) /
                     (4.0 * e * e);
  const double kappa =
      (qxx * gp.y * gp.y - 2.0 * qxy * gp.x * gp.y + qyy * gp.x * gp.x) /
      (gpn * gpn * gpn);

  return InterfaceCut{p, std::atan2(gp.y, gp.x), kappa, 0.0};
}

inline Moments2 box_moments(Vec2 lo, Vec2 hi) {
  const double a = (hi.x - lo.x) * (hi.y - lo.y);
  return {a, Vec2{0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)} * a};
}

struct ExactCellIntegrator {
  const ShapeLevelSet& shape;
  double cell_diag;
  double tol;  // per-cell tolerance, relative to the cell area
  int max_depth;

  // conservative range bounds can straddle zero for boxes that are actually
  // pure; the inscribed-ball certificate settles those by the centre value
  bool certified_pure(Vec2 lo, Vec2 hi, Moments2& out) const {
    const auto range = shape.value_range(lo, hi);
    if (range[1] <= 0.0) {
      out = box_moments(lo, hi);
      return true;
    }
    if (range[0] > 0.0) {
      out = {};
      return true;
    }
    const double v = shape.value((lo + hi) * 0.5);
    if (std::abs(v) > shape.lipschitz() * 0.5 * norm(hi - lo)) {
      out = v <= 0.0 ? box_moments(lo, hi) : Moments2{};
      return true;
    }
    return false;
  }

  Moments2 integrate(Vec2 lo, Vec2 hi, int depth,
                     const std::optional<InterfaceCut>& fit_hint) const {
    Moments2 pure;
    if (certified_pure(lo, hi, pure)) return pure;

    const double diag = norm(hi - lo);
    const std::optional<InterfaceCut> fit =
        fit_hint ? fit_hint : local_quadratic_cut(shape, lo, hi);

    if (depth >= max_depth) return leaf_moments(lo, hi, fit);

    // children and their local fits
    const Vec2 mid = (lo + hi) * 0.5;
    const std::array<std::array<Vec2, 2>, 4> kids{{{Vec2{lo.x, lo.y}, Vec2{mid.x, mid.y}},
                                                   {Vec2{mid.x, lo.y}, Vec2{hi.x, mid.y}},
                                                   {Vec2{lo.x, mid.y}, Vec2{mid.x, hi.y}},
                                                   {Vec2{mid.x, mid.y}, Vec2{hi.x, hi.y}}}};
    std::array<std::optional<InterfaceCut>, 4> kid_fits{};
    Moments2 kid_sum;
    bool kids_exactish = true;
    for (int k = 0; k < 4; ++k) {
      Moments2 kid_pure;
      if (certified_pure(kids[k][0], kids[k][1], kid_pure)) {
        kid_sum += kid_pure;
      } else {
        kid_fits[k] = local_quadratic_cut(shape, kids[k][0], kids[k][1]);
        if (!kid_fits[k]) kids_exactish = false;
        kid_sum += leaf_moments(kids[k][0], kids[k][1], kid_fits[k]);
      }
    }

    // Richardson acceptance: one-level agreement between the parabolic model
    // of this box and of its children.  Budget scales with the boundary-leaf
    // count so the per-cell total stays below tol * cell area.  The first
    // moment is compared relative to the box centre; the stored quantity is
    // centroid-relative, so absolute-coordinate arms must not enter.
    if (fit && kids_exactish && depth >= 2) {
      const Moments2 self = leaf_moments(lo, hi, fit);
      const double eps0 = 0.5 * tol * cell_diag * cell_diag * (diag / cell_diag);
      const double eps1 = eps0 * cell_diag;
      const double dm0 = self.m0 - kid_sum.m0;
      const Vec2 dm1 = (self.m1 - kid_sum.m1) - ((lo + hi) * 0.5) * dm0;
      if (std::abs(dm0) <= eps0 && std::abs(dm1.x) <= eps1 && std::abs(dm1.y) <= eps1)
        return kid_sum;
    }

    Moments2 acc;
    for (int k = 0; k < 4; ++k)
      acc += integrate(kids[k][0], kids[k][1], depth + 1, kid_fits[k]);
    return acc;
  }

  Moments2 leaf_moments(Vec2 lo, Vec2 hi, const std::optional<InterfaceCut>& fit) const {
    if (fit) return clip_parabola_moments(make_box(lo, hi), *fit);
    // no usable local model: classify by the centre sample
    return shape.value((lo + hi) * 0.5) <= 0.0 ? box_moments(lo, hi) : Moments2{};
  }
};

}  // namespace detail

// Per-cell volume fractions and first moments of the shape's liquid region,
// by quadtree subdivision with parabolic leaf models; per-cell error is held
// below tol * cell area (tol >= 1e-13).
inline ExactField init_moments_exact(const ShapeLevelSet& shape, const Grid& grid,
                                     double tol = 1e-12, int max_depth = 24) {
  if (!(tol >= 1e-13))
    throw std::invalid_argument("init_moments_exact: tol must be >= 1e-13");
  ExactField out;
  out.alpha.assign(grid.cells(), 0.0);
  out.m1.assign(grid.cells(), Vec2{0.0, 0.0});
  out.mixed.assign(grid.cells(), 0);

  const double area = grid.cell_area();
  const double cell_diag = std::hypot(grid.hx, grid.hy);
  const detail::ExactCellIntegrator integrator{shape, cell_diag, tol, max_depth};

  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const Vec2 lo = grid.cell_lo(i, j), hi = grid.cell_hi(i, j);
      const auto range = shape.value_range(lo, hi);
      if (!std::isfinite(range[0]) || !std::isfinite(range[1]))
        throw std::runtime_error("init_moments_exact: level set is not finite");
      const int idx = grid.index(i, j);
      const Moments2 m = integrator.integrate(lo, hi, 0, std::nullopt);
      const double a = std::min(1.0, std::max(0.0, m.m0 / area));
      out.alpha[idx] = a;
      out.m1[idx] = m.m1 - grid.centroid(i, j) * m.m0;
      out.mixed[idx] = (a > 1e-13 && a < 1.0 - 1e-13) ? 1 : 0;
      out.total_volume += m.m0;
    }
  return out;
}

// ---------------------------------------------------------------- timestep

// CFL-limited step: courant * h over the fastest corner speed, evaluated
// self-consistently over the step window, and never beyond max_dt (the
// experiment's output interval).
inline double cfl_timestep(const Grid& grid, const VelocityProvider& vel, double t,
                           double courant, double max_dt) {
  if (!(courant > 0.0 && courant <= 1.0))
    throw std::invalid_argument("cfl_timestep: courant must be in (0, 1]");
  auto max_speed = [&](double tt) {
    double u = 0.0;
    for (int j = 0; j <= grid.ny; ++j)
      for (int i = 0; i <= grid.nx; ++i)
        u = std::max(u, norm(vel.velocity(tt, {grid.origin.x + i * grid.hx,
                                               grid.origin.y + j * grid.hy})));
    return u;
  };
  const double h = grid.h();
  double u = max_speed(t);
  double dt = max_dt;
  for (int it = 0; it < 3; ++it) {
    if (u <= 1e-14) break;
    dt = std::min(courant * h / u, max_dt);
    u = std::max(u, max_speed(t + dt));
  }
  if (u > 1e-14) dt = std::min(courant * h / u, max_dt);
  return dt;
}

// -------------------------------------------------------------- error norms

struct ErrorReport {
  double symm_diff = 0.0;
  double frac_linf = 0.0;
  double m1_linf = 0.0;
  double kappa_linf = 0.0;
  bool kappa_defined = false;
};

namespace detail {

// Adaptive Simpson integration with a recursion cap; integrands here are
// piecewise smooth with a few kinks, which subdivision isolates.
template <class F>
inline double adaptive_simpson(F&& f, double a, double b, double fa, double fm,
                               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
inline double integrate_adaptive(F&& f, double a, double b, double tol, int panels = 8) {
  double acc = 0.0;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double pa = a + p * w, pb = pa + w;
    const double fa = f(pa), fb = f(pb), fm = f(0.5 * (pa + pb));
    const double whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
    acc += adaptive_simpson(f, pa, pb, fa, fm, fb, whole, tol / panels, 28);
  }
  return acc;
}

// Liquid interval of the shape along the line anchor + tau*t + eta*e for
// e in [elo, ehi]; assumes at most one boundary crossing in the segment
// (resolved interfaces), with the full/empty cases handled by sign.
struct ColumnInterval {
  double lo, hi;  // liquid sub-interval, possibly empty (lo >= hi)
};

template <class Q>
inline ColumnInterval liquid_interval_1d(Q&& q, double elo, double ehi) {
  const double qlo = q(elo), qhi = q(ehi);
  if (qlo <= 0.0 && qhi <= 0.0) return {elo, ehi};
  if (qlo > 0.0 && qhi > 0.0) return {elo, elo};
  // single crossing: bisection to machine width
  double a = elo, b = ehi, qa = qlo;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    const double qm = q(m);
    if ((qm <= 0.0) == (qa <= 0.0)) {
      a = m;
      qa = qm;
    } else {
      b = m;
    }
    if (b - a <= 1e-16 * (std::abs(a) + std::abs(b) + 1e-30)) break;
  }
  const double c = 0.5 * (a + b);
  if (qlo <= 0.0) return {elo, c};
  return {c, ehi};
}

inline double interval_symmdiff(double a0, double a1, double b0, double b1) {
  const double la = std::max(0.0, a1 - a0), lb = std::max(0.0, b1 - b0);
  const double overlap =
      std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
  return la + lb - 2.0 * overlap;
}

// Area of (cell n liquid(cut)) symm-diff (cell n liquid(shape)) by exact
// column slicing in the cut's frame: both boundaries are graphs over the
// cut tangent for resolved interfaces.
inline double cell_symmdiff_vs_shape_impl(Vec2 lo, Vec2 hi, const InterfaceCut& cut,
                                          const ShapeLevelSet& shape) {
  const Vec2 n = cut.normal();
  const Vec2 tg{-n.y, n.x};
  const Vec2 anchor = cut.anchor;

  const std::array<Vec2, 4> corners{Vec2{lo.x, lo.y}, Vec2{hi.x, lo.y},
                                    Vec2{hi.x, hi.y}, Vec2{lo.x, hi.y}};
  std::array<double, 4> taus{};
  for (int k = 0; k < 4; ++k) taus[k] = dot(corners[k] - anchor, tg);
  std::sort(taus.begin(), taus.end());

  // eta-interval of the box along the line at tangential coordinate t
  auto eta_interval = [&](double t, double& elo, double& ehi) -> bool {
    elo = -std::numeric_limits<double>::infinity();
    ehi = std::numeric_limits<double>::infinity();
    const Vec2 base = anchor + tg * t;
    // x and y slab constraints on: base + eta * n
    for (int axis = 0; axis < 2; ++axis) {
      const double bn = axis == 0 ? n.x : n.y;
      const double bb = axis == 0 ? base.x : base.y;
      const double slo = axis == 0 ? lo.x : lo.y;
      const double shi = axis == 0 ? hi.x : hi.y;
      if (std::abs(bn) < 1e-14) {
        if (bb < slo - 1e-14 || bb > shi + 1e-14) return false;
      } else {
        double e0 = (slo - bb) / bn, e1 = (shi - bb) / bn;
        if (e0 > e1) std::swap(e0, e1);
        elo = std::max(elo, e0);
        ehi = std::min(ehi, e1);
      }
    }
    return elo < ehi;
  };

  auto integrand = [&](double t) -> double {
    double elo, ehi;
    if (!eta_interval(t, elo, ehi)) return 0.0;
    // cut liquid: eta <= P(t), clamped to the box column
    const double pcut = cut.phi - 0.5 * cut.kappa * t * t;
    const double acut = std::min(ehi, std::max(elo, pcut));
    const Vec2 base = anchor + tg * t;
    auto qshape = [&](double e) { return shape.value(base + n * e); };
    const ColumnInterval s = liquid_interval_1d(qshape, elo, ehi);
    return interval_symmdiff(elo, acut, s.lo, s.hi);
  };

  const double cell_area = (hi.x - lo.x) * (hi.y - lo.y);
  double acc = 0.0;
  for (int seg = 0; seg < 3; ++seg) {
    const double a = taus[seg], b = taus[seg + 1];
    if (b - a <= 1e-300) continue;
    acc += integrate_adaptive(integrand, a, b, 1e-13 * cell_area, 6);
  }
  return acc;
}

}  // namespace detail

// Error norms of a reconstructed state against an exact reference field and
// shape: total symmetric difference of the liquid domains, Linf norms of the
// fraction and (cell-relative) first moment errors, and the Linf curvature
// error over cells where both the estimate and the exact value exist.
inline ErrorReport error_norms(const Grid& grid, const std::vector<double>& alpha_hat,
                               const InterfaceSet& interfaces,
                               const ExactField& exact, const ShapeLevelSet& shape,
                               const std::vector<double>* kappa_hat = nullptr,
                               const std::vector<uint8_t>* kappa_valid = nullptr) {
  ErrorReport rep;
  const double area = grid.cell_area();
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const int idx = grid.index(i, j);
      rep.frac_linf = std::max(rep.frac_linf, std::abs(alpha_hat[idx] - exact.alpha[idx]));

      // symmetric difference
      const CellKind kind = interfaces.kind[idx];
      if (kind == CellKind::Cut) {
        rep.symm_diff += detail::cell_symmdiff_vs_shape_impl(
            grid.cell_lo(i, j), grid.cell_hi(i, j), interfaces.cut[idx], shape);
      } else {
        const double rec_alpha = kind == CellKind::Full ? 1.0 : 0.0;
        rep.symm_diff += std::abs(rec_alpha - exact.alpha[idx]) * area;
      }

      // first moment of the reconstructed interface vs the exact one,
      // relative to the cell centroid
      Vec2 m1_rec{0.0, 0.0};
      if (kind == CellKind::Cut) {
        const Moments2 m = clip_parabola_moments(
            make_box(grid.cell_lo(i, j), grid.cell_hi(i, j)), interfaces.cut[idx]);
        m1_rec = m.m1 - grid.centroid(i, j) * m.m0;
      }
      rep.m1_linf = std::max(rep.m1_linf, norm(m1_rec - exact.m1[idx]));

      // curvature over interface cells where the estimate is valid
      if (kappa_hat && kappa_valid && (*kappa_valid)[idx]) {
        const auto kex = shape.curvature_near(grid.centroid(i, j));
        if (kex) {
          rep.kappa_linf = std::max(rep.kappa_linf, std::abs((*kappa_hat)[idx] - *kex));
          rep.kappa_defined = true;
        }
      }
    }
  return rep;
}

}  // namespace ppic2d
