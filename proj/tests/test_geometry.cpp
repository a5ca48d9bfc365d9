#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ppic2d/geometry.hpp"
#include "ppic2d/harness.hpp"

using namespace ppic2d;

namespace {

std::mt19937_64 seeded(std::uint64_t s) { return std::mt19937_64(s); }

double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

}  // namespace

TEST_CASE("polygon moments: unit square and triangle") {
  const Polygon sq = make_cell_box({0.0, 0.0}, 1.0, 1.0);
  const Moments2 m = polygon_moments(sq);
  CHECK(m.m0 == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(m.m1.x) < 1e-15);
  CHECK(std::abs(m.m1.y) < 1e-15);

  Polygon tri;
  tri.push_back({0.0, 0.0});
  tri.push_back({1.0, 0.0});
  tri.push_back({0.0, 1.0});
  const Moments2 t = polygon_moments(tri);
  CHECK(t.m0 == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(t.m1.x == Catch::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(t.m1.y == Catch::Approx(1.0 / 6.0).epsilon(1e-14));

  Polygon degenerate;
  degenerate.push_back({0.0, 0.0});
  degenerate.push_back({1.0, 0.0});
  const Moments2 d = polygon_moments(degenerate);
  CHECK(d.m0 == 0.0);
  CHECK(norm(d.m1) == 0.0);
}

TEST_CASE("polygon moments: random convex pentagon vs Monte Carlo") {
  auto rng = seeded(101);
  const Polygon poly = random_convex_polygon(rng, {0.4, -0.7}, 0.9, 5, 5);
  const Moments2 m = polygon_moments(poly);

  Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const Vec2& v : poly) {
    lo.x = std::min(lo.x, v.x);
    lo.y = std::min(lo.y, v.y);
    hi.x = std::max(hi.x, v.x);
    hi.y = std::max(hi.y, v.y);
  }
  const auto mc = oracles::monte_carlo_moments(
      [&](Vec2 p) { return oracles::inside_convex(poly, p); }, lo, hi, 1000000, 77);
  CHECK(std::abs(m.m0 - mc.mean.m0) < 3.0 * mc.m0_sigma);
  CHECK(norm(m.m1 - mc.mean.m1) < 5.0 * mc.m0_sigma * norm(hi - lo));
}

TEST_CASE("half-plane clipping") {
  const Polygon sq = make_cell_box({0.0, 0.0}, 1.0, 1.0);

  SECTION("horizontal cut through the middle keeps the lower half") {
    const InterfaceCut cut{{0.0, 0.0}, M_PI / 2.0, 0.0, 0.0};
    const Moments2 m = polygon_moments(clip_halfplane(sq, cut));
    CHECK(m.m0 == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(m.m1.y == Catch::Approx(-0.125).epsilon(1e-13));
  }
  SECTION("cut entirely below gives the empty polygon") {
    const InterfaceCut cut{{0.0, 0.0}, M_PI / 2.0, 0.0, -2.0};
    CHECK(clip_halfplane(sq, cut).size() == 0);
  }
  SECTION("random lines satisfy the complement identity") {
    auto rng = seeded(5);
    for (int k = 0; k < 200; ++k) {
      const InterfaceCut cut{{uniform(rng, -0.4, 0.4), uniform(rng, -0.4, 0.4)},
                             uniform(rng, 0.0, 2.0 * M_PI), 0.0,
                             uniform(rng, -0.3, 0.3)};
      const double a = polygon_moments(clip_halfplane(sq, cut)).m0;
      const double b = polygon_moments(clip_halfplane(sq, cut.complement())).m0;
      CHECK(std::abs(a + b - 1.0) < 1e-14);
    }
  }
}

TEST_CASE("edge/parabola roots") {
  SECTION("straight cut crossed once") {
    const InterfaceCut cut{{0.0, 0.0}, M_PI / 2.0, 0.0, 0.25};
    // q(t p0 + (1-t) p1) with p0 above, p1 below: crossing where y = 0.25
    const RootList r = edge_parabola_roots({0.0, 1.0}, {0.0, 0.0}, cut);
    REQUIRE(r.n == 1);
    CHECK(r.t[0] == Catch::Approx(0.25).epsilon(1e-13));
  }
  SECTION("tangent edge reports a double root once") {
    // parabola y = -x^2/2 (kappa = -1, phi = 0 at theta = pi/2 has liquid
    // y <= x^2/2); edge along y = 0 touches at x = 0
    const InterfaceCut cut{{0.0, 0.0}, M_PI / 2.0, -1.0, 0.0};
    const RootList r = edge_parabola_roots({1.0, 0.0}, {-1.0, 0.0}, cut);
    REQUIRE(r.n == 1);
    CHECK(r.t[0] == Catch::Approx(0.5).epsilon(1e-12));
  }
  SECTION("edge with no crossing gives an empty list") {
    const InterfaceCut cut{{0.0, 0.0}, M_PI / 2.0, -0.5, 0.0};
    const RootList r = edge_parabola_roots({1.0, 2.0}, {-1.0, 2.0}, cut);
    CHECK(r.n == 0);
  }
}

TEST_CASE("parabolic clipping: closed forms on the unit cell") {
  const Polygon sq = make_cell_box({0.0, 0.0}, 1.0, 1.0);

  SECTION("positive curvature (complement route)") {
    const InterfaceCut cut{{0.0, 0.0}, M_PI / 2.0, 0.3, 0.05};
    const Moments2 m = clip_parabola_moments(sq, cut);
    CHECK(m.m0 == Catch::Approx(0.5375).epsilon(1e-13));
    CHECK(std::abs(m.m1.x) < 1e-15);
    CHECK(m.m1.y == Catch::Approx(-0.124234375).epsilon(1e-13));
  }
  SECTION("negative curvature (direct route)") {
    const double kappa = -0.3, phi = 0.05;
    const InterfaceCut cut{{0.0, 0.0}, M_PI / 2.0, kappa, phi};
    const Moments2 m = clip_parabola_moments(sq, cut);
    const double m0 = 0.5 + phi - kappa / 24.0;
    CHECK(m.m0 == Catch::Approx(m0).epsilon(1e-13));
    CHECK(m.m1.y ==
          Catch::Approx(0.5 * (kappa * kappa / 720.0 + m0 * (m0 - 1.0))).epsilon(1e-12));
  }
  SECTION("vanishing curvature reduces to the half-plane clip") {
    auto rng = seeded(99);
    for (int k = 0; k < 100; ++k) {
      const InterfaceCut cut{{uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3)},
                             uniform(rng, 0.0, 2.0 * M_PI), 0.0,
                             uniform(rng, -0.4, 0.4)};
      const Moments2 a = clip_parabola_moments(sq, cut);
      const Moments2 b = polygon_moments(clip_halfplane(sq, cut));
      CHECK(std::abs(a.m0 - b.m0) < 1e-13);
      CHECK(norm(a.m1 - b.m1) < 1e-13);
    }
  }
  SECTION("non-convex input is rejected") {
    Polygon bad;
    bad.push_back({0.0, 0.0});
    bad.push_back({1.0, 0.0});
    bad.push_back({0.1, 0.1});
    bad.push_back({0.0, 1.0});
    CHECK_THROWS_AS(clip_parabola_moments(bad, InterfaceCut{}), std::invalid_argument);
  }
}

TEST_CASE("parabolic clipping: random cases against the slicing oracle") {
  auto rng = seeded(2024);
  double worst = 0.0;
  for (int k = 0; k < 400; ++k) {
    const Vec2 c{uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0)};
    const double r = uniform(rng, 0.2, 1.2);
    const Polygon poly = random_convex_polygon(rng, c, r);
    const InterfaceCut cut = random_cut(rng, c, r);
    const Moments2 got = clip_parabola_moments(poly, cut);
    const Moments2 ref = oracles::sliced_clip_moments(poly, cut);
    const double scale = polygon_moments(poly).m0;
    worst = std::max(worst, std::abs(got.m0 - ref.m0) / scale);
    worst = std::max(worst, norm(got.m1 - ref.m1) / (scale * r));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("parabolic clipping: disconnected liquid region") {
  // liquid y <= x^2 - 0.5 inside [-2,2]x[0,1] splits into two lobes
  const Polygon rect = make_box({-2.0, 0.0}, {2.0, 1.0});
  const InterfaceCut cut{{0.0, 0.0}, M_PI / 2.0, -2.0, -0.5};
  const Moments2 m = clip_parabola_moments(rect, cut);
  const double s15 = std::sqrt(1.5), s05 = std::sqrt(0.5);
  const double exact =
      2.0 * ((2.0 - s15) +
             ((s15 * s15 * s15 / 3.0 - 0.5 * s15) - (s05 * s05 * s05 / 3.0 - 0.5 * s05)));
  CHECK(m.m0 == Catch::Approx(exact).epsilon(1e-13));
  CHECK(std::abs(m.m1.x) < 1e-14);  // symmetric in x
}

TEST_CASE("complement identity over random polygons and cuts") {
  const SelfTestReport rep = geometry_selftest(31337, 2000);
  CHECK(rep.failures == 0);
  CHECK(rep.worst_complement < 1e-13);
  CHECK(rep.worst_reduction < 1e-13);
  CHECK(rep.oracle_ok);
}

TEST_CASE("rigid-motion equivariance of clipped moments") {
  auto rng = seeded(7000);
  for (int k = 0; k < 100; ++k) {
    const Vec2 c{uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
    const double r = uniform(rng, 0.3, 1.0);
    const Polygon poly = random_convex_polygon(rng, c, r);
    const InterfaceCut cut = random_cut(rng, c, r);

    const double ang = uniform(rng, 0.0, 2.0 * M_PI);
    const Vec2 shift{uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0)};
    const Vec2 about{uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
    const double ca = std::cos(ang), sa = std::sin(ang);
    auto xform = [&](Vec2 p) {
      const Vec2 d = p - about;
      return Vec2{about.x + ca * d.x - sa * d.y + shift.x,
                  about.y + sa * d.x + ca * d.y + shift.y};
    };
    Polygon moved;
    for (const Vec2& v : poly) moved.push_back(xform(v));
    const InterfaceCut moved_cut = cut.rotated(about, ang).translated(shift);

    const Moments2 a = clip_parabola_moments(poly, cut);
    const Moments2 b = clip_parabola_moments(moved, moved_cut);
    CHECK(std::abs(a.m0 - b.m0) < 1e-12 * std::max(1.0, a.m0));
    if (a.m0 > 1e-12) {
      const Vec2 centroid_moved = xform(a.m1 / a.m0);
      CHECK(norm(centroid_moved - b.m1 / b.m0) < 1e-10);
    }
  }
}

TEST_CASE("monotonicity: shrinking the shift never grows the clipped area") {
  auto rng = seeded(4242);
  for (int k = 0; k < 200; ++k) {
    const Polygon poly = random_convex_polygon(rng, {0.0, 0.0}, 1.0);
    InterfaceCut cut = random_cut(rng, {0.0, 0.0}, 1.0);
    cut.kappa = -std::abs(cut.kappa);
    const double m_hi = clip_parabola_moments(poly, cut).m0;
    InterfaceCut lower = cut;
    lower.phi -= uniform(rng, 0.0, 1.0);
    const double m_lo = clip_parabola_moments(poly, lower).m0;
    CHECK(m_lo <= m_hi + 1e-14);
  }
}

TEST_CASE("region membership uses the boundary-is-liquid convention") {
  const InterfaceCut cut{{0.0, 0.0}, 0.3, 0.7, 0.2};
  CHECK(region_membership(cut, {0.0, 0.0}));                     // anchor with phi > 0
  CHECK_FALSE(region_membership(cut, cut.normal() * 10.0));      // far along the normal
  // a point on the zero level set counts as liquid
  const Vec2 on_boundary = cut.normal() * cut.phi;
  CHECK(std::abs(cut.value(on_boundary)) < 1e-15);
  CHECK(region_membership(cut, on_boundary));
}

TEST_CASE("symmetric difference quadtree estimate") {
  const Vec2 lo{-0.5, -0.5}, hi{0.5, 0.5};

  SECTION("identical regions give zero") {
    auto a = [](Vec2 p) { return p.y <= 0.1; };
    CHECK(symmetric_difference_area(a, a, lo, hi, 8) == 0.0);
  }
  SECTION("opposite half-planes cover the window") {
    auto a = [](Vec2 p) { return p.y <= 0.0; };
    auto b = [](Vec2 p) { return p.y > 0.0; };
    CHECK(symmetric_difference_area(a, b, lo, hi, 8) == Catch::Approx(1.0).epsilon(1e-12));
  }
  SECTION("circle vs tangent line converges to the lens area") {
    // circle of radius R centred below the origin so its top point touches
    // y = 0; the symmetric difference against the half-plane y <= 0 within
    // the window is twice the area between chord and arc near the touch point
    const double R = 0.8;
    auto circle = [&](Vec2 p) { return norm(p - Vec2{0.0, -R}) <= R; };
    auto half = [](Vec2 p) { return p.y <= 0.0; };
    // analytic: area between y = 0 and the circle over x in [-1/2, 1/2],
    // i.e. integral of (R - sqrt(R^2 - x^2)) dx
    const double a = 0.5;
    const double lens =
        2.0 * (R * a - 0.5 * (a * std::sqrt(R * R - a * a) +
                              R * R * std::asin(a / R)));
    const double est = symmetric_difference_area(circle, half, lo, hi, 10);
    CHECK(est == Catch::Approx(lens).epsilon(0.01));
  }
  SECTION("refinement improves on coarse estimates") {
    const double R = 0.8;
    auto circle = [&](Vec2 p) { return norm(p - Vec2{0.0, -R}) <= R; };
    auto half = [](Vec2 p) { return p.y <= 0.0; };
    const double a = 0.5;
    const double lens =
        2.0 * (R * a - 0.5 * (a * std::sqrt(R * R - a * a) +
                              R * R * std::asin(a / R)));
    const double coarse =
        std::abs(symmetric_difference_area(circle, half, lo, hi, 3) - lens);
    for (int depth : {6, 8, 10}) {
      const double err =
          std::abs(symmetric_difference_area(circle, half, lo, hi, depth) - lens);
      CHECK(err <= coarse);
    }
  }
}

TEST_CASE("set inequality |M0(A) - M0(B)| <= M0(A symmdiff B)") {
  auto rng = seeded(880);
  for (int k = 0; k < 20; ++k) {
    const InterfaceCut ca = random_cut(rng, {0.0, 0.0}, 1.0);
    const InterfaceCut cb = random_cut(rng, {0.0, 0.0}, 1.0);
    auto in_a = [&](Vec2 p) { return region_membership(ca, p); };
    auto in_b = [&](Vec2 p) { return region_membership(cb, p); };
    const Vec2 lo{-0.5, -0.5}, hi{0.5, 0.5};
    const Polygon sq = make_box(lo, hi);
    const double m0a = clip_parabola_moments(sq, ca).m0;
    const double m0b = clip_parabola_moments(sq, cb).m0;
    const double sd = symmetric_difference_area(in_a, in_b, lo, hi, 9);
    CHECK(std::abs(m0a - m0b) <= sd + 2e-3);
  }
}
