#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "thinscat/bodies.hpp"
#include "thinscat/curve.hpp"

using namespace thinscat;

namespace {
TubeGeometry straight_tube(double delta, int n_t = 10, int n_theta = 12) {
  TubeGeometry g;
  g.curve = GeneratingCurve::segment(Vec3(0, 0, 0), Vec3(0, 0, 1));
  g.delta = delta;
  g.n_t = n_t;
  g.n_theta = n_theta;
  return g;
}
}  // namespace

TEST_CASE("curve_eval on a straight segment") {
  auto c = GeneratingCurve::segment(Vec3(0, 0, 0), Vec3(0, 0, 1));
  auto [p, f] = curve_eval(c, 0.5);
  CHECK((p - Vec3(0, 0, 0.5)).norm() < 1e-15);
  CHECK((f.T - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK_THROWS_AS(curve_eval(c, 1.5), std::domain_error);
  for (double t : {0.0, 0.13, 0.77, 1.0}) {
    auto fr = c.frame(t);
    CHECK(fr.T.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(fr.T.dot(fr.N1)) < 1e-12);
    CHECK(std::abs(fr.T.dot(fr.N2)) < 1e-12);
    CHECK(std::abs(fr.N1.dot(fr.N2)) < 1e-12);
  }
}

TEST_CASE("arc frame: N1 points toward the center, matches finite differences") {
  Vec3 ctr(0.3, -0.2, 0.1);
  double R = 2.0;
  auto c = GeneratingCurve::arc(ctr, R, Vec3(1, 0, 0), Vec3(0, 1, 0), 0.2, 1.9);
  for (double t : {0.0, 0.4 * c.length(), c.length()}) {
    Vec3 p = c.position(t);
    auto f = c.frame(t);
    Vec3 toward = (ctr - p).normalized();
    CHECK((f.N1 - toward).norm() < 1e-12);
    // tangent against centered differences of the position map
    double h = 1e-6 * c.length();
    double a = std::max(0.0, t - h), b = std::min(c.length(), t + h);
    Vec3 fd = (c.position(b) - c.position(a)) / (b - a);
    // one-sided at the endpoints, so only O(h) there
    CHECK((f.T - fd.normalized()).norm() < 2e-6);
  }
  CHECK(c.r0() == doctest::Approx(R));
}

TEST_CASE("rotation-minimizing transport stays continuous on a generic curve") {
  auto pos = [](double t) {
    return Vec3(std::cos(2 * t), std::sin(2 * t), 0.4 * t * t);
  };
  auto c = GeneratingCurve::from_position_map(pos, 1.5, Vec3(1, 0, 0), 1024);
  CurveFrame prev = c.frame(0.0);
  for (int i = 1; i <= 200; ++i) {
    CurveFrame f = c.frame(1.5 * i / 200.0);
    CHECK(f.T.norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(f.T.dot(f.N1)) < 1e-9);
    CHECK((f.N1 - prev.N1).norm() < 0.1);  // no frame flips
    prev = f;
  }
}

TEST_CASE("tube surface: areas, counts, normals, Jacobian relation") {
  double delta = 0.1;
  auto g = straight_tube(delta, 10, 12);
  auto s = build_tube_surface(g);

  CHECK(s.patch_area(PatchTag::facade) ==
        doctest::Approx(2 * pi * delta * 1.0).epsilon(1e-12));
  double cap_area = s.patch_area(PatchTag::capA) + s.patch_area(PatchTag::capB);
  CHECK(cap_area == doctest::Approx(4 * pi * delta * delta).epsilon(1e-10));
  CHECK(s.area() == doctest::Approx(2 * pi * delta + 4 * pi * delta * delta).epsilon(1e-3));

  int facade_nodes = 0;
  for (auto t : s.tag) facade_nodes += (t == PatchTag::facade);
  CHECK(facade_nodes == g.n_t * g.q_t * g.n_theta);

  for (int i = 0; i < s.size(); ++i) {
    CHECK(s.nu[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
    // outward: positive dot with the ray from the generator projection
    CHECK(s.nu[i].dot(s.x[i] - s.z[i]) > 0);
    // B nu = nu / delta at every boundary node
    CHECK((s.B[i] * s.nu[i] - s.nu[i] / delta).norm() < 1e-10);
    CHECK((s.B[i] - s.B[i].transpose()).norm() < 1e-14);
  }
}

TEST_CASE("facade Jacobian eigenvalues are {1/delta, 1/delta, 1}") {
  auto g = straight_tube(0.07);
  auto s = build_tube_surface(g);
  for (int i = 0; i < s.size(); i += 97) {
    if (s.tag[i] != PatchTag::facade) continue;
    Eigen::SelfAdjointEigenSolver<Mat3> es(s.B[i]);
    Vec3 ev = es.eigenvalues();
    CHECK(ev[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev[1] == doctest::Approx(1.0 / g.delta).epsilon(1e-12));
    CHECK(ev[2] == doctest::Approx(1.0 / g.delta).epsilon(1e-12));
  }
}

TEST_CASE("tube geometry errors") {
  auto g = straight_tube(0.1);
  g.n_theta = 4;
  CHECK_THROWS_AS(build_tube_surface(g), config_error);
  TubeGeometry arcg;
  arcg.curve = GeneratingCurve::arc(Vec3(0, 0, 0), 0.5, Vec3(1, 0, 0), Vec3(0, 1, 0), 0.0, 2.0);
  arcg.delta = 0.8;  // exceeds r0 = R = 0.5
  CHECK_THROWS_AS(build_tube_surface(arcg), geometry_error);
}

TEST_CASE("curved tube area matches 2 pi delta L") {
  TubeGeometry g;
  g.curve = GeneratingCurve::arc(Vec3(0, 0, 0), 1.0, Vec3(1, 0, 0), Vec3(0, 1, 0), 0.0, 1.2);
  g.delta = 0.1;
  g.n_t = 12;
  auto s = build_tube_surface(g);
  CHECK(s.patch_area(PatchTag::facade) ==
        doctest::Approx(2 * pi * g.delta * g.curve.length()).epsilon(1e-10));
}

TEST_CASE("screen surface: patch areas and flat-face normals") {
  ScreenGeometry g;
  g.side = 1.0;
  g.delta = 0.05;
  auto s = build_screen_surface(g);
  CHECK(s.patch_area(PatchTag::s0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(s.patch_area(PatchTag::s1) == doctest::Approx(4 * pi * g.delta).epsilon(1e-10));
  CHECK(s.patch_area(PatchTag::s2) ==
        doctest::Approx(4 * pi * g.delta * g.delta).epsilon(1e-7));
  CHECK(s.area() ==
        doctest::Approx(2.0 + 4 * pi * g.delta + 4 * pi * g.delta * g.delta).epsilon(1e-7));
  for (int i = 0; i < s.size(); ++i) {
    if (s.tag[i] == PatchTag::s0) {
      CHECK(std::abs(std::abs(s.nu[i].z()) - 1.0) < 1e-15);
      CHECK(std::abs(s.nu[i].x()) < 1e-15);
    }
    CHECK((s.B[i] * s.nu[i] - s.nu[i] / g.delta).norm() < 1e-10);
  }
  CHECK_THROWS_AS(build_screen_surface(ScreenGeometry{.side = 1.0, .delta = -0.1}),
                  geometry_error);
}

TEST_CASE("projection onto the generating set") {
  auto g = straight_tube(0.2);
  CHECK((project_to_generator(g, Vec3(0.1, 0, 0.3)) - Vec3(0, 0, 0.3)).norm() < 1e-14);
  CHECK((project_to_generator(g, Vec3(0.05, 0.05, -0.1)) - Vec3(0, 0, 0)).norm() < 1e-14);

  ScreenGeometry sg;
  sg.delta = 0.05;
  CHECK((project_to_generator(sg, Vec3(0.2, 0.3, sg.delta)) - Vec3(0.2, 0.3, 0)).norm() < 1e-14);
  CHECK((project_to_generator(sg, Vec3(0.7, 0.3, 0)) - Vec3(0.5, 0.3, 0)).norm() < 1e-14);
}

TEST_CASE("blow-up map: cap form, facade form, round trip, delta=1 identity") {
  auto g = straight_tube(0.1);
  // cap point: B = I/delta
  Vec3 yc = Vec3(0, 0.03, -0.05);
  auto [ytc, Bc] = blowup(g, yc);
  CHECK((Bc - Mat3::Identity() / g.delta).norm() < 1e-14);
  CHECK((blowdown(g, ytc) - yc).norm() < 1e-12);
  // facade point with tangent e3: B = diag(1/delta, 1/delta, 1)
  Vec3 yf(0.05, 0.02, 0.4);
  auto [ytf, Bf] = blowup(g, yf);
  Mat3 expect = Mat3::Zero();
  expect.diagonal() << 1 / g.delta, 1 / g.delta, 1.0;
  CHECK((Bf - expect).norm() < 1e-13);
  CHECK((blowdown(g, ytf) - yf).norm() < 1e-12);
  CHECK_THROWS_AS(blowup(g, Vec3(1, 1, 0.5)), std::domain_error);

  auto g1 = straight_tube(1.0);
  g1.delta = 1.0;
  Vec3 y(0.3, -0.2, 0.6);
  auto [yt1, B1] = blowup(g1, y);
  CHECK((yt1 - y).norm() < 1e-14);
  CHECK((B1 - Mat3::Identity()).norm() < 1e-14);
}

TEST_CASE("rescaled twin equals the delta=1 body node-for-node") {
  auto g = straight_tube(0.08);
  auto s = build_tube_surface(g);
  auto g1 = g;
  g1.delta = 1.0;
  auto s1 = build_tube_surface(g1);
  REQUIRE(s.size() == s1.size());
  double m = 0;
  for (int i = 0; i < s.size(); ++i) m = std::max(m, (s.xt[i] - s1.x[i]).norm());
  CHECK(m < 1e-12);
  // surface measure ratio between twins: delta on the facade, delta^2 on caps
  for (int i = 0; i < s.size(); i += 53) {
    double expect = s.tag[i] == PatchTag::facade ? g.delta : g.delta * g.delta;
    CHECK(s.w[i] / s1.w[i] == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("screen rescaled twin and measure scales") {
  ScreenGeometry g;
  g.delta = 0.04;
  auto s = build_screen_surface(g);
  auto g1 = g;
  g1.delta = 1.0;
  auto s1 = build_screen_surface(g1);
  REQUIRE(s.size() == s1.size());
  for (int i = 0; i < s.size(); i += 29) {
    CHECK((s.xt[i] - s1.x[i]).norm() < 1e-12);
    double expect = s.tag[i] == PatchTag::s0   ? 1.0
                    : s.tag[i] == PatchTag::s1 ? g.delta
                                               : g.delta * g.delta;
    CHECK(s.w[i] / s1.w[i] == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("cross-section rings have zero mean normal") {
  auto g = straight_tube(0.15, 6, 16);
  auto s = build_tube_surface(g);
  // facade nodes of one t-ring share node_u; sum nu * dtheta over the ring
  const Panel& p = s.panels[2];
  for (int iu = 0; iu < p.nu; ++iu) {
    Vec3 acc = Vec3::Zero();
    for (int iv = 0; iv < p.nv; ++iv) acc += s.nu[p.first_node + iu * p.nv + iv];
    CHECK(acc.norm() * (2 * pi / p.nv) < 1e-12);
  }
}

TEST_CASE("surface area converges under resolution doubling") {
  TubeGeometry g;
  g.curve = GeneratingCurve::arc(Vec3(0, 0, 0), 1.5, Vec3(0, 1, 0), Vec3(0, 0, 1), 0.1, 1.0);
  g.delta = 0.12;
  g.n_t = 4;
  g.cap_panels = 1;
  auto coarse = build_tube_surface(g);
  g.n_t = 8;
  g.cap_panels = 2;
  auto fine = build_tube_surface(g);
  double exact_facade = 2 * pi * g.delta * g.curve.length();
  double ec = std::abs(coarse.patch_area(PatchTag::facade) - exact_facade);
  double ef = std::abs(fine.patch_area(PatchTag::facade) - exact_facade);
  CHECK(ef <= std::max(ec / 4, 1e-14));  // at least the nominal order
}

TEST_CASE("surface dump/load round trip is bit-identical") {
  auto g = straight_tube(0.1, 3, 8);
  auto s = build_tube_surface(g);
  std::ostringstream o1;
  s.dump(o1);
  std::istringstream in(o1.str());
  auto s2 = SurfaceQuadrature::load(in);
  REQUIRE(s2.size() == s.size());
  std::ostringstream o2;
  s2.dump(o2);
  CHECK(o1.str() == o2.str());
  for (int i = 0; i < s.size(); ++i) {
    CHECK(s2.x[i] == s.x[i]);  // exact, not approximate
    CHECK(s2.w[i] == s.w[i]);
    CHECK(s2.tag[i] == s.tag[i]);
  }
}

TEST_CASE("disk non-self-intersection check catches a hairpin") {
  auto pos = [](double t) {  // hairpin: comes back near itself
    double a = pi * t;
    return Vec3(std::cos(a), std::sin(a), 0.02 * t);
  };
  auto c = GeneratingCurve::from_position_map(pos, 2.0, Vec3(0, 0, 1), 512);
  CHECK(c.r0() < 0.25);  // ends approach within ~0.04 in space
}
