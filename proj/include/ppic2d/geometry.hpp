#pragma once

// 2D geometric kernel: polygons, linear/parabolic interface cuts, and exact
// zeroth/first moments of the intersection of a convex polygon with the
// liquid side of a cut.  All operations are pure functions; results depend
// only on the arguments.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifndef M_PI
#define M_PI 3.14159265358979323846
#endif

namespace ppic2d {

// ---------------------------------------------------------------- vectors

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double xx, double yy) : x(xx), y(yy) {}

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double norm2(Vec2 a) { return dot(a, a); }

// ---------------------------------------------------------------- moments

// Zeroth moment (area) and first moment (integral of position) of a region.
struct Moments2 {
  double m0 = 0.0;
  Vec2 m1{0.0, 0.0};

  Vec2 centroid() const { return m1 / m0; }
  Moments2 operator+(const Moments2& o) const { return {m0 + o.m0, m1 + o.m1}; }
  Moments2 operator-(const Moments2& o) const { return {m0 - o.m0, m1 - o.m1}; }
  Moments2& operator+=(const Moments2& o) { m0 += o.m0; m1 += o.m1; return *this; }
};

// ------------------------------------------------------------ interface cut

// One cell's interface as a level set
//   q(x) = eta.(x - anchor) - phi + (kappa/2) (tau.(x - anchor))^2
// with eta = (cos theta, sin theta), tau = (-sin theta, cos theta).
// The liquid region is { q <= 0 }; boundary points count as liquid.
// kappa = 0 gives a straight interface; a liquid disk of radius R has
// kappa = +1/R.
struct InterfaceCut {
  Vec2 anchor{0.0, 0.0};
  double theta = 0.0;
  double kappa = 0.0;
  double phi = 0.0;

  Vec2 normal() const { return {std::cos(theta), std::sin(theta)}; }
  Vec2 tangent() const { return {-std::sin(theta), std::cos(theta)}; }

  double value(Vec2 p) const {
    const Vec2 d = p - anchor;
    const Vec2 n = normal();
    const double tn = dot(d, Vec2{-n.y, n.x});
    return dot(d, n) - phi + 0.5 * kappa * tn * tn;
  }

  // Same zero set with the sign of q flipped (liquid and gas exchanged).
  InterfaceCut complement() const {
    return {anchor, theta + (theta > 0.0 ? -M_PI : M_PI), -kappa, -phi};
  }

  InterfaceCut translated(Vec2 d) const { return {anchor + d, theta, kappa, phi}; }

  InterfaceCut rotated(Vec2 about, double angle) const {
    const double c = std::cos(angle), s = std::sin(angle);
    const Vec2 r = anchor - about;
    const Vec2 a{about.x + c * r.x - s * r.y, about.y + s * r.x + c * r.y};
    return {a, theta + angle, kappa, phi};
  }
};

// true iff p lies in the liquid region of the cut (q <= 0).
inline bool region_membership(const InterfaceCut& cut, Vec2 p) {
  return cut.value(p) <= 0.0;
}

// ---------------------------------------------------------------- polygon

// Ordered counterclockwise vertex loop with small fixed capacity.  Used for
// cells, preimages and clipped pieces; capacity is sized for a box clipped by
// a handful of half-planes plus parabola intersection points.
class Polygon {
 public:
  static constexpr int kCapacity = 48;

  Polygon() = default;

  int size() const { return n_; }
  bool empty() const { return n_ == 0; }
  Vec2& operator[](int i) { return v_[i]; }
  const Vec2& operator[](int i) const { return v_[i]; }
  const Vec2* begin() const { return v_.data(); }
  const Vec2* end() const { return v_.data() + n_; }

  void clear() { n_ = 0; }
  void push_back(Vec2 p) {
    if (n_ >= kCapacity) throw std::runtime_error("Polygon: capacity exceeded");
    v_[n_++] = p;
  }

  Vec2 vertex_mean() const {
    Vec2 s{0.0, 0.0};
    for (int i = 0; i < n_; ++i) s += v_[i];
    return n_ > 0 ? s / double(n_) : s;
  }

  double bounding_diagonal() const {
    if (n_ == 0) return 0.0;
    Vec2 lo = v_[0], hi = v_[0];
    for (int i = 1; i < n_; ++i) {
      lo.x = std::min(lo.x, v_[i].x);
      lo.y = std::min(lo.y, v_[i].y);
      hi.x = std::max(hi.x, v_[i].x);
      hi.y = std::max(hi.y, v_[i].y);
    }
    return norm(hi - lo);
  }

 private:
  std::array<Vec2, kCapacity> v_{};
  int n_ = 0;
};

inline Polygon make_box(Vec2 lo, Vec2 hi) {
  Polygon p;
  p.push_back({lo.x, lo.y});
  p.push_back({hi.x, lo.y});
  p.push_back({hi.x, hi.y});
  p.push_back({lo.x, hi.y});
  return p;
}

// Axis-aligned box of size hx*hy centred at c.
inline Polygon make_cell_box(Vec2 c, double hx, double hy) {
  return make_box({c.x - 0.5 * hx, c.y - 0.5 * hy}, {c.x + 0.5 * hx, c.y + 0.5 * hy});
}

// Signed cross products of consecutive edges must all be >= -tol for a CCW
// convex loop; tol is relative to the squared bounding diagonal so that
// roundoff-level concavity (e.g. traced preimages) passes.
inline bool is_convex(const Polygon& poly, double rel_tol = 1e-12) {
  const int n = poly.size();
  if (n < 3) return false;
  const double d = poly.bounding_diagonal();
  const double tol = rel_tol * d * d;
  for (int i = 0; i < n; ++i) {
    const Vec2 a = poly[(i + 1) % n] - poly[i];
    const Vec2 b = poly[(i + 2) % n] - poly[(i + 1) % n];
    if (cross(a, b) < -tol) return false;
  }
  return true;
}

// Exact area and first moment of a simple CCW polygon.  Accumulated relative
// to the vertex mean and shifted back, which keeps cancellation mild for
// small cells far from the origin.  Fewer than 3 vertices gives zero moments.
inline Moments2 polygon_moments(const Polygon& poly) {
  const int n = poly.size();
  if (n < 3) return {};
  const Vec2 ref = poly.vertex_mean();
  double m0 = 0.0;
  Vec2 m1{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    const Vec2 a = poly[i] - ref;
    const Vec2 b = poly[(i + 1) % n] - ref;
    const double c = cross(a, b);
    m0 += c;
    m1 += (a + b) * c;
  }
  m0 *= 0.5;
  m1 *= (1.0 / 6.0);
  return {m0, m1 + ref * m0};
}

// ------------------------------------------------------- half-plane clipping

// poly n {q <= 0} for a straight cut (kappa must be 0).  Convex input gives
// convex output; an empty result is a valid empty polygon.
inline Polygon clip_halfplane(const Polygon& poly, const InterfaceCut& cut) {
  if (cut.kappa != 0.0)
    throw std::invalid_argument("clip_halfplane: cut must have kappa == 0");
  Polygon out;
  const int n = poly.size();
  if (n == 0) return out;
  double qa = cut.value(poly[0]);
  for (int i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    const double qb = cut.value(b);
    const bool ina = qa <= 0.0, inb = qb <= 0.0;
    if (ina) out.push_back(a);
    if (ina != inb) {
      const double t = qa / (qa - qb);
      out.push_back(a + (b - a) * t);
    }
    qa = qb;
  }
  return out;
}

// Clip poly against the half-plane {n.(x) <= c} given by a raw normal; used
// for box/box intersections where building an InterfaceCut would be noise.
inline Polygon clip_halfplane_raw(const Polygon& poly, Vec2 n, double c) {
  Polygon out;
  const int m = poly.size();
  if (m == 0) return out;
  double qa = dot(n, poly[0]) - c;
  for (int i = 0; i < m; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % m];
    const double qb = dot(n, b) - c;
    const bool ina = qa <= 0.0, inb = qb <= 0.0;
    if (ina) out.push_back(a);
    if (ina != inb) {
      const double t = qa / (qa - qb);
      out.push_back(a + (b - a) * t);
    }
    qa = qb;
  }
  return out;
}

// Intersection of a convex polygon with an axis-aligned box.
inline Polygon clip_to_box(const Polygon& poly, Vec2 lo, Vec2 hi) {
  Polygon p = clip_halfplane_raw(poly, {1.0, 0.0}, hi.x);
  p = clip_halfplane_raw(p, {-1.0, 0.0}, -lo.x);
  p = clip_halfplane_raw(p, {0.0, 1.0}, hi.y);
  p = clip_halfplane_raw(p, {0.0, -1.0}, -lo.y);
  return p;
}

// --------------------------------------------------- edge/parabola roots

struct RootList {
  std::array<double, 2> t{};
  int n = 0;
};

namespace detail {

// Roots of a s^2 + b s + c = 0 in [0,1], ascending, computed with the
// sign-safe quadratic form (w = -(b + sign(b) sqrt(disc))/2, roots w/a and
// c/w) so near-tangent intersections do not cancel.  A near-linear equation
// (|a| < 1e-12 |b|) is solved as linear.  A double root is reported once.
inline RootList quadratic_roots_01(double a, double b, double c) {
  RootList out;
  auto accept = [&out](double t) {
    if (!(t >= 0.0 && t <= 1.0)) return;
    if (out.n == 1 && std::abs(out.t[0] - t) <= 1e-14) return;
    out.t[out.n++] = t;
  };
  if (std::abs(a) < 1e-12 * std::abs(b)) {
    if (b != 0.0) accept(-c / b);
    return out;
  }
  if (a == 0.0) return out;  // b == 0 as well: constant, no isolated roots
  double disc = b * b - 4.0 * a * c;
  // roundoff-level negative discriminants are grazing tangencies
  if (disc < 0.0 && disc >= -8.0 * 2.220446049250313e-16 * (b * b + std::abs(4.0 * a * c)))
    disc = 0.0;
  if (disc < 0.0) return out;
  const double sq = std::sqrt(disc);
  const double w = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  double r1, r2;
  if (w != 0.0) {
    r1 = w / a;
    r2 = c / w;
  } else {
    r1 = r2 = 0.0;  // b == 0 and disc == 0
  }
  if (r1 > r2) std::swap(r1, r2);
  accept(r1);
  accept(r2);
  return out;
}

}  // namespace detail

// Real roots in [0,1] of q(t p0 + (1-t) p1) = 0, ascending.  Callers handle
// kappa > 0 through the complement cut first.
inline RootList edge_parabola_roots(Vec2 p0, Vec2 p1, const InterfaceCut& cut) {
  const Vec2 n = cut.normal();
  const Vec2 tg{-n.y, n.x};
  const Vec2 m = p1 - cut.anchor;   // t = 0 endpoint
  const Vec2 d = p0 - p1;           // direction towards the t = 1 endpoint
  const double T0 = dot(m, tg), Td = dot(d, tg);
  const double N0 = dot(m, n), Nd = dot(d, n);
  const double a = 0.5 * cut.kappa * Td * Td;
  const double b = Nd + cut.kappa * T0 * Td;
  const double c = N0 - cut.phi + 0.5 * cut.kappa * T0 * T0;
  return detail::quadratic_roots_01(a, b, c);
}

// ------------------------------------------- polygon/parabola intersection

// Tangential intervals of the interface arcs inside a clipped polygon,
// expressed in the cut's local frame; these drive the analytic derivatives
// of clipped moments.
struct ArcList {
  static constexpr int kCapacity = 24;
  std::array<std::array<double, 2>, kCapacity> tau{};
  int n = 0;

  void add(double a, double b) {
    if (n >= kCapacity) throw std::runtime_error("ArcList: capacity exceeded");
    tau[n][0] = std::min(a, b);
    tau[n][1] = std::max(a, b);
    ++n;
  }
};

struct ParabolaClip {
  Moments2 moments;
  ArcList arcs;
};

namespace detail {

struct LocalPt {
  double t;  // tangential coordinate
  double e;  // normal coordinate
};

// Shoelace moments of a loop in local coordinates.  The (tau, eta) frame is
// left-handed, so a loop walked in world-CCW order is clockwise here and the
// shoelace sums enter with a minus sign.
inline void accumulate_loop(const LocalPt* pts, int n, double& m0, double& m1t,
                            double& m1e) {
  if (n < 3) return;
  for (int i = 0; i < n; ++i) {
    const LocalPt& a = pts[i];
    const LocalPt& b = pts[(i + 1) % n];
    const double c = a.t * b.e - b.t * a.e;
    m0 -= 0.5 * c;
    m1t -= (a.t + b.t) * c / 6.0;
    m1e -= (a.e + b.e) * c / 6.0;
  }
}

// 3-point Gauss-Legendre on [a,b]; exact for polynomials up to degree 5,
// which covers every correction integrand used here.
template <class F>
inline double gauss3(double a, double b, F&& f) {
  constexpr double x1 = 0.7745966692414834;  // sqrt(3/5)
  constexpr double w0 = 0.8888888888888888;
  constexpr double w1 = 0.5555555555555556;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  return half * (w0 * f(mid) + w1 * f(mid - half * x1) + w1 * f(mid + half * x1));
}

// Core clipper for kappa <= 0.  Walks the polygon boundary, classifies each
// edge against the parabola (removed / bisected / retained / trisected),
// stitches the retained boundary into closed loops whose chords replace the
// interface arcs, and adds the analytic area between each chord and the
// parabola.  All computation happens in the cut's local (tau, eta) frame.
struct LocalClipper {
  double kappa, phi;

  double q_of(const LocalPt& p) const {
    return p.e - phi + 0.5 * kappa * p.t * p.t;
  }

  // items along the boundary walk
  enum class Kind { Vertex, Entry, Exit };
  struct Item {
    LocalPt p;
    Kind kind;
  };

  std::array<Item, 3 * Polygon::kCapacity> items{};
  int n_items = 0;
  void push(LocalPt p, Kind k) { items[n_items++] = {p, k}; }

  RootList edge_roots(const LocalPt& a, const LocalPt& b) const {
    const double dt = b.t - a.t, de = b.e - a.e;
    const double qa = 0.5 * kappa * dt * dt;
    const double qb = de + kappa * a.t * dt;
    const double qc = q_of(a);
    return quadratic_roots_01(qa, qb, qc);
  }

  static LocalPt lerp(const LocalPt& a, const LocalPt& b, double s) {
    return {a.t + s * (b.t - a.t), a.e + s * (b.e - a.e)};
  }

  // Bisection fallback for a sign-change edge whose root was lost to
  // roundoff (e.g. grazing tangency); the sign change guarantees a root.
  double bisect_root(const LocalPt& a, const LocalPt& b) const {
    double lo = 0.0, hi = 1.0;
    double qlo = q_of(a);
    for (int it = 0; it < 120; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double qm = q_of(lerp(a, b, mid));
      if ((qm <= 0.0) == (qlo <= 0.0)) {
        lo = mid;
        qlo = qm;
      } else {
        hi = mid;
      }
      if (hi - lo < 1e-17) break;
    }
    return 0.5 * (lo + hi);
  }

  void run(const LocalPt* v, int n, double& m0, double& m1t, double& m1e,
           ArcList* arcs) {
    bool any_liquid = false;
    std::array<bool, Polygon::kCapacity> liquid{};
    for (int i = 0; i < n; ++i) {
      liquid[i] = q_of(v[i]) <= 0.0;
      any_liquid = any_liquid || liquid[i];
    }
    if (!any_liquid) return;  // gas side is convex for kappa <= 0

    for (int i = 0; i < n; ++i) {
      const LocalPt &a = v[i], &b = v[(i + 1) % n];
      const bool la = liquid[i], lb = liquid[(i + 1) % n];
      if (la) push(a, Kind::Vertex);
      if (la != lb) {
        const RootList r = edge_roots(a, b);
        double s;
        if (r.n == 0) {
          s = bisect_root(a, b);
        } else if (r.n == 1) {
          s = r.t[0];
        } else {
          // concavity of q along the edge decides which root is the crossing
          s = la ? r.t[0] : r.t[1];
        }
        push(lerp(a, b, s), la ? Kind::Exit : Kind::Entry);
      } else if (la && lb) {
        const RootList r = edge_roots(a, b);
        if (r.n == 2 && r.t[1] - r.t[0] > 1e-14) {
          push(lerp(a, b, r.t[0]), Kind::Exit);
          push(lerp(a, b, r.t[1]), Kind::Entry);
        }
      }
      // gas-gas edges cannot dip into the liquid when kappa <= 0
    }

    // no crossings: the whole polygon is liquid
    bool has_marker = false;
    for (int i = 0; i < n_items; ++i)
      if (items[i].kind != Kind::Vertex) has_marker = true;
    if (!has_marker) {
      accumulate_loop_from_items(0, n_items, m0, m1t, m1e);
      return;
    }

    // stitch maximal liquid runs into loops, one chord per run
    int start = -1;
    for (int i = 0; i < n_items; ++i)
      if (items[i].kind == Kind::Entry) {
        start = i;
        break;
      }
    if (start < 0) throw std::runtime_error("parabola clip: unmatched crossings");

    std::array<LocalPt, 3 * Polygon::kCapacity> loop{};
    int ln = 0;
    LocalPt entry_pt{};
    bool in_run = false;
    for (int k = 0; k <= n_items; ++k) {
      const Item& it = items[(start + k) % n_items];
      if (!in_run) {
        if (it.kind != Kind::Entry) {
          if (k == n_items) break;
          throw std::runtime_error("parabola clip: exit without entry");
        }
        if (k == n_items) break;
        in_run = true;
        ln = 0;
        entry_pt = it.p;
        loop[ln++] = it.p;
        continue;
      }
      loop[ln++] = it.p;
      if (it.kind == Kind::Exit) {
        finish_loop(loop.data(), ln, entry_pt, m0, m1t, m1e, arcs);
        in_run = false;
      } else if (it.kind == Kind::Entry) {
        throw std::runtime_error("parabola clip: nested entries");
      }
      if (k == n_items) break;
    }
  }

 private:
  void accumulate_loop_from_items(int from, int count, double& m0, double& m1t,
                                  double& m1e) const {
    std::array<LocalPt, 3 * Polygon::kCapacity> loop{};
    int ln = 0;
    for (int i = 0; i < count; ++i) loop[ln++] = items[from + i].p;
    accumulate_loop(loop.data(), ln, m0, m1t, m1e);
  }

  void finish_loop(LocalPt* pts, int ln, const LocalPt& entry, double& m0,
                   double& m1t, double& m1e, ArcList* arcs) const {
    // dedupe consecutive coincident points (crossing on a vertex, slivers)
    double scale = 0.0;
    for (int i = 0; i < ln; ++i)
      scale = std::max(scale, std::max(std::abs(pts[i].t), std::abs(pts[i].e)));
    const double tol = 1e-14 * std::max(scale, 1e-300);
    std::array<LocalPt, 3 * Polygon::kCapacity> dedup{};
    int m = 0;
    for (int i = 0; i < ln; ++i) {
      const LocalPt& p = pts[i];
      if (m > 0 && std::abs(p.t - dedup[m - 1].t) <= tol &&
          std::abs(p.e - dedup[m - 1].e) <= tol)
        continue;
      dedup[m++] = p;
    }
    while (m > 1 && std::abs(dedup[m - 1].t - dedup[0].t) <= tol &&
           std::abs(dedup[m - 1].e - dedup[0].e) <= tol)
      --m;
    accumulate_loop(dedup.data(), m, m0, m1t, m1e);

    // chord from the run's exit back to its entry, corrected by the exact
    // integral between the chord and the parabola.  Both chord endpoints lie
    // on the parabola, so the gap factors as -(kappa/2)(t - tl)(t - tr),
    // which evaluates without cancellation even for sharp curvatures.
    const LocalPt exit_pt = pts[ln - 1];
    const double tl = exit_pt.t, el = exit_pt.e;
    const double tr = entry.t, er = entry.e;
    if (arcs && std::abs(tr - tl) > 0.0) arcs->add(tl, tr);
    if (tr == tl) return;
    const double dtau = tr - tl;
    const double slope = (er - el) / dtau;
    auto gap = [&](double t) { return -0.5 * kappa * (t - tl) * (t - tr); };
    auto chord = [&](double t) { return el + slope * (t - tl); };
    m0 += kappa * dtau * dtau * dtau / 12.0;
    m1t += gauss3(tl, tr, [&](double t) { return t * gap(t); });
    m1e += gauss3(tl, tr, [&](double t) {
      const double g = gap(t);
      return g * (chord(t) + 0.5 * g);
    });
  }
};

inline ParabolaClip clip_parabola_impl(const Polygon& poly, const InterfaceCut& cut,
                                       bool want_arcs) {
  ParabolaClip out;
  const int n = poly.size();
  if (n < 3) return out;
  if (!is_convex(poly))
    throw std::invalid_argument("clip_parabola_moments: polygon must be convex");

  const Vec2 nrm = cut.normal();
  const Vec2 tng{-nrm.y, nrm.x};

  // kappa > 0: moments via the complement identity
  //   M(P n l(q)) = M(P) - M(P n l(-q)),
  // where -q has negative curvature again.  Local coordinates of the
  // complement cut are the negation of ours, so arcs map back by negation.
  if (cut.kappa > 0.0) {
    const ParabolaClip inner = clip_parabola_impl(poly, cut.complement(), want_arcs);
    const Moments2 whole = polygon_moments(poly);
    out.moments.m0 = std::max(0.0, whole.m0 - inner.moments.m0);
    out.moments.m1 = whole.m1 - inner.moments.m1;
    if (want_arcs)
      for (int i = 0; i < inner.arcs.n; ++i)
        out.arcs.add(-inner.arcs.tau[i][1], -inner.arcs.tau[i][0]);
    return out;
  }

  std::array<LocalPt, Polygon::kCapacity> local{};
  for (int i = 0; i < n; ++i) {
    const Vec2 d = poly[i] - cut.anchor;
    local[i] = {dot(d, tng), dot(d, nrm)};
  }

  LocalClipper clipper{cut.kappa, cut.phi};
  double m0 = 0.0, m1t = 0.0, m1e = 0.0;
  clipper.run(local.data(), n, m0, m1t, m1e, want_arcs ? &out.arcs : nullptr);

  out.moments.m0 = std::max(0.0, m0);
  out.moments.m1 = cut.anchor * out.moments.m0 + tng * m1t + nrm * m1e;
  return out;
}

}  // namespace detail

// Exact moments of poly n {q <= 0}.  poly must be convex; an empty
// intersection gives zero moments.
inline Moments2 clip_parabola_moments(const Polygon& poly, const InterfaceCut& cut) {
  return detail::clip_parabola_impl(poly, cut, false).moments;
}

// Moments plus the tangential intervals of the interface arcs inside poly.
inline ParabolaClip clip_parabola_full(const Polygon& poly, const InterfaceCut& cut) {
  return detail::clip_parabola_impl(poly, cut, true);
}

// --------------------------------------------- symmetric difference (area)

// Adaptive quadtree estimate of the area of A (symmetric difference) B inside
// an axis-aligned window.  Boxes whose sampled memberships agree everywhere
// are taken uniform; disagreeing boxes subdivide down to the given depth,
// where the disagreement fraction of a 3x3 sample decides the contribution.
template <class FA, class FB>
inline double symmetric_difference_area(FA&& in_a, FB&& in_b, Vec2 lo, Vec2 hi,
                                        int depth) {
  if (depth < 1) throw std::invalid_argument("symmetric_difference_area: depth >= 1");
  struct Rec {
    FA& a;
    FB& b;
    int top;
    double operator()(Vec2 l, Vec2 h, int d) const {
      const Vec2 mid = (l + h) * 0.5;
      const std::array<Vec2, 5> pts{Vec2{l.x, l.y}, Vec2{h.x, l.y}, Vec2{h.x, h.y},
                                    Vec2{l.x, h.y}, mid};
      bool all_agree = true, all_differ = true;
      for (const Vec2& p : pts) {
        const bool d2 = a(p) != b(p);
        all_agree = all_agree && !d2;
        all_differ = all_differ && d2;
      }
      const double area = (h.x - l.x) * (h.y - l.y);
      if (all_differ) return area;
      if (d == 0) {
        if (all_agree) return 0.0;
        int differ = 0, total = 0;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            const Vec2 p{l.x + (h.x - l.x) * (0.5 + i) / 3.0,
                         l.y + (h.y - l.y) * (0.5 + j) / 3.0};
            differ += (a(p) != b(p)) ? 1 : 0;
            ++total;
          }
        return area * double(differ) / double(total);
      }
      if (all_agree && d < top - 1) return 0.0;  // always refine the top levels
      return (*this)({l.x, l.y}, {mid.x, mid.y}, d - 1) +
             (*this)({mid.x, l.y}, {h.x, mid.y}, d - 1) +
             (*this)({l.x, mid.y}, {mid.x, h.y}, d - 1) +
             (*this)({mid.x, mid.y}, {h.x, h.y}, d - 1);
    }
  };
  Rec rec{in_a, in_b, depth};
  return rec(lo, hi, depth);
}

}  // namespace ppic2d
