#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "thinscat/energy.hpp"
#include "thinscat/mie.hpp"

using namespace thinscat;

namespace {

TubeGeometry straight_tube(double delta, int n_t = 12, int n_theta = 12) {
  TubeGeometry g;
  g.curve = GeneratingCurve::segment(Vec3(0, 0, 0), Vec3(0, 0, 1));
  g.delta = delta;
  g.n_t = n_t;
  g.n_theta = n_theta;
  return g;
}

}  // namespace

TEST_CASE("Mie series: truncation tail and rotational symmetry") {
  DirectionGrid grid = make_direction_grid(6, 12);
  Vec3 d = Vec3(0.3, -0.5, 0.8).normalized();
  auto a = mie_sound_hard_sphere(1.0, 1.0, d, grid.dir, 25);
  auto b = mie_sound_hard_sphere(1.0, 1.0, d, grid.dir, 30);
  CHECK(!a.truncated);
  CHECK((a.ff.u - b.ff.u).cwiseAbs().maxCoeff() < 1e-12);

  // u_inf depends on xhat.d only
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    Vec3 x1(g(rng), g(rng), g(rng));
    x1.normalize();
    double c = x1.dot(d);
    // rotate x1 about d by a random angle: same xhat.d
    Vec3 axis = d;
    double ang = 2 * pi * (t + 0.3) / 20;
    Eigen::AngleAxisd rot(ang, axis);
    Vec3 x2 = rot * x1;
    auto f1 = mie_sound_hard_sphere(1.0, 1.3, d, {x1, x2}, 25);
    CHECK(std::abs(f1.ff.u[0] - f1.ff.u[1]) < 1e-12);
    (void)c;
  }
  CHECK_THROWS_AS(mie_sound_hard_sphere(1.0, 1.0, d, grid.dir, 5), config_error);
}

TEST_CASE("Mie series: Rayleigh scaling at fixed omega*a") {
  DirectionGrid grid = make_direction_grid(6, 12);
  Vec3 d(0, 0, 1);
  double target = 0.1;  // omega * a
  double s1, s2;
  {
    double w = 0.05, a = target / w;
    s1 = mie_sound_hard_sphere(a, w, d, grid.dir, 20).ff.sup() / (w * w * a * a * a);
  }
  {
    double w = 0.1, a = target / w;
    s2 = mie_sound_hard_sphere(a, w, d, grid.dir, 20).ff.sup() / (w * w * a * a * a);
  }
  CHECK(std::abs(s1 - s2) / s1 < 0.02);
}

TEST_CASE("sound-hard sphere matches the Mie oracle") {
  SphereGeometry g;
  g.n_phi = 6;
  g.n_theta = 16;
  auto s = build_sphere_surface(g);
  DirectionGrid grid = make_direction_grid(8, 16);
  Vec3 d = Vec3(0.2, 0.3, 0.93).normalized();
  auto sol = solve_sound_hard(s, 1.0, {d}, grid.dir);
  auto mie = mie_sound_hard_sphere(1.0, 1.0, d, grid.dir, 30);
  double num = 0, den = 0;
  for (int i = 0; i < grid.size(); ++i) {
    num = std::max(num, std::abs(sol.ff[0].u[i] - mie.ff.u[i]));
    den = std::max(den, std::abs(mie.ff.u[i]));
  }
  CHECK(num / den < 1e-3);
  CHECK(sol.lin_resid < 1e-12);

  // optical theorem on the direction grid
  CHECK(optical_theorem_defect(s, sol.phi[0], 1.0, d, grid) < 1e-4);
}

TEST_CASE("sound-hard solver: Rayleigh omega^2 growth of a small sphere") {
  SphereGeometry g;
  g.radius = 0.1;
  g.n_phi = 4;
  g.n_theta = 12;
  auto s = build_sphere_surface(g);
  DirectionGrid grid = make_direction_grid(6, 12);
  Vec3 d(0, 0, 1);
  double s1 = solve_sound_hard(s, 0.5, {d}, grid.dir).ff[0].sup();
  double s2 = solve_sound_hard(s, 1.0, {d}, grid.dir).ff[0].sup();
  CHECK(s2 / s1 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("sound-hard solver: scattered field satisfies the Neumann condition") {
  auto g = straight_tube(0.15);
  auto s = build_tube_surface(g);
  double w = 1.0;
  Vec3 d = Vec3(0.6, 0, 0.8).normalized();
  auto sol = solve_sound_hard(s, w, {d}, {Vec3(1, 0, 0)});
  double worst = 0;
  for (int i = 0; i < s.size(); i += s.size() / 5 + 1) {
    cplx q[3];
    for (int j = 0; j < 3; ++j) {
      double tau = 0.06 / std::pow(2.0, j);
      std::vector<Vec3> t{s.x[i] + tau * s.nu[i]};
      auto gr = evaluate_potential_grad(OpKind::S, s, sol.phi[0], t, w);
      q[j] = dot_c(gr[0], s.nu[i]) + dot_c(plane_wave_grad(w, d, t[0]), s.nu[i]);
    }
    worst = std::max(worst, std::abs((8.0 * q[2] - 6.0 * q[1] + q[0]) / 3.0));
  }
  CHECK(worst < 2e-3);  // relative to the O(omega)=1 data scale
}

TEST_CASE("reciprocity of the sound-hard far field") {
  auto g = straight_tube(0.2, 14, 12);
  auto s = build_tube_surface(g);
  std::mt19937 rng(5);
  std::normal_distribution<double> gg;
  std::vector<Vec3> ds, xs;
  for (int i = 0; i < 10; ++i) {
    ds.push_back(Vec3(gg(rng), gg(rng), gg(rng)).normalized());
    xs.push_back(Vec3(gg(rng), gg(rng), gg(rng)).normalized());
  }
  std::vector<Vec3> inc = ds, obs = xs;
  for (auto& x : xs) inc.push_back(-x);
  for (auto& d : ds) obs.push_back(-d);
  auto sol = solve_sound_hard(s, 1.0, inc, obs);
  for (int i = 0; i < 10; ++i)
    CHECK(std::abs(sol.ff[i].u[i] - sol.ff[10 + i].u[10 + i]) < 1e-4);
}

TEST_CASE("resonance detection at an interior Dirichlet eigenvalue") {
  SphereGeometry g;
  g.n_phi = 8;
  g.n_theta = 24;
  auto s = build_sphere_surface(g);
  CHECK_NOTHROW(solve_sound_hard(s, 1.0, {Vec3(0, 0, 1)}, {Vec3(0, 0, 1)}));
  CHECK_THROWS_AS(solve_sound_hard(s, pi, {Vec3(0, 0, 1)}, {Vec3(0, 0, 1)}),
                  resonance_error);
}

TEST_CASE("material spec validation and branch choice") {
  LossyLayerSpec l;
  l.beta = 2.0;
  CHECK(l.k_l(1.0).imag() > 0);
  l.gamma = -1;
  CHECK_THROWS_AS(l.validate(), config_error);
  ContentSpec c;
  c.q = cplx(2, 3);
  CHECK(c.k_a(1.0).imag() > 0);
  c.q = cplx(-1, 0);
  CHECK_THROWS_AS(c.validate(), config_error);
}

TEST_CASE("trivial cloak: delta=1 free space scatters nothing") {
  auto g = straight_tube(1.0, 8, 12);
  g.delta = 1.0;
  LossyLayerSpec lossy;
  lossy.beta = 0.0;
  ContentSpec content;  // sigma=1, q=1
  DirectionGrid grid = make_direction_grid(6, 12);
  Vec3 d = Vec3(0.3, 0.4, std::sqrt(1 - 0.25)).normalized();
  auto sol = solve_cloak(g, lossy, content, 1.0, {d}, grid.dir);
  CHECK(sol.sup_farfield() < 1e-6);
  CHECK(sol.lin_resid < 1e-10);
}

TEST_CASE("curved generator is rejected by the cloak solver") {
  TubeGeometry g;
  g.curve = GeneratingCurve::arc(Vec3(0, 0, 0), 2.0, Vec3(1, 0, 0), Vec3(0, 1, 0), 0.0, 0.5);
  g.delta = 0.1;
  CHECK_THROWS_AS(build_cloak_bodies(g), geometry_error);
}

TEST_CASE("content equal to the lossy medium makes the inner interface invisible") {
  auto g = straight_tube(0.15, 10, 12);
  LossyLayerSpec lossy;  // gamma=alpha=beta=1
  ContentSpec content;
  content.sigma = lossy.gamma;
  content.q = cplx(lossy.alpha, lossy.beta);
  DirectionGrid grid = make_direction_grid(6, 12);
  Vec3 d = Vec3(0.6, 0, 0.8).normalized();
  auto sol3 = solve_cloak(g, lossy, content, 1.0, {d}, grid.dir);

  // two-medium reference: exterior + homogeneous k_l interior on dD_delta alone
  CloakBodies b = build_cloak_bodies(g);
  double omega = 1.0, delta = g.delta, gamma = lossy.gamma;
  cplx kl = lossy.k_l(omega);
  int ne = b.outer_phys.size();
  CMat S_ee = assemble_operator(OpKind::S, b.outer_phys, b.outer_phys, omega);
  CMat Ks_ee = assemble_operator(OpKind::Kstar, b.outer_phys, b.outer_phys, omega);
  CMat S_oo = assemble_operator(OpKind::S, b.outer_resc, b.outer_resc, kl);
  CMat Ks_oo = assemble_operator(OpKind::Kstar, b.outer_resc, b.outer_resc, kl);
  CMat Ie = CMat::Identity(ne, ne);
  CMat A = CMat::Zero(2 * ne, 2 * ne);
  A.block(0, 0, ne, ne) = S_ee;
  A.block(0, ne, ne, ne) = -S_oo;
  A.block(ne, 0, ne, ne) = 0.5 * Ie + Ks_ee;
  A.block(ne, ne, ne, ne) = -gamma * delta * (-0.5 * Ie + Ks_oo);
  CMat rhs(2 * ne, 1);
  for (int i = 0; i < ne; ++i) {
    rhs(i, 0) = -plane_wave(omega, d, b.outer_phys.x[i]);
    rhs(ne + i, 0) = -dot_c(plane_wave_grad(omega, d, b.outer_phys.x[i]), b.outer_phys.nu[i]);
  }
  auto two = solve_dense({std::move(A), std::move(rhs)});
  Density phi2(b.outer_phys, two.X.topRows(ne).col(0));
  FarField f2 = far_field(b.outer_phys, phi2, omega, grid.dir);

  double diff = 0;
  for (int i = 0; i < grid.size(); ++i)
    diff = std::max(diff, std::abs(f2.u[i] - sol3.ff[0].u[i]));
  CHECK(diff < 1e-6);
}

TEST_CASE("linearity in the incident amplitude") {
  auto g = straight_tube(0.2, 8, 12);
  LossyLayerSpec lossy;
  ContentSpec content;
  DirectionGrid grid = make_direction_grid(4, 8);
  Vec3 d(0, 0, 1);
  CloakOptions o1, o2;
  o2.incident_amplitude = 2.0;
  auto s1 = solve_cloak(g, lossy, content, 1.0, {d}, grid.dir, o1);
  auto s2 = solve_cloak(g, lossy, content, 1.0, {d}, grid.dir, o2);
  double worst = 0;
  for (int i = 0; i < grid.size(); ++i)
    worst = std::max(worst, std::abs(s2.ff[0].u[i] - 2.0 * s1.ff[0].u[i]));
  CHECK(worst < 1e-13 * s2.ff[0].sup());
}

TEST_CASE("cloak solve: diagnostics, energy balance, absorbed power sign") {
  auto g = straight_tube(0.1, 10, 12);
  LossyLayerSpec lossy;
  ContentSpec content;
  content.sigma = 5.0;
  content.q = cplx(2, 3);
  DirectionGrid grid = make_direction_grid(8, 16);
  Vec3 d = Vec3(0.6, 0, 0.8).normalized();
  CloakBodies b = build_cloak_bodies(g);
  auto sol = solve_cloak_system(b, lossy, content, 1.0, {d}, grid.dir);
  CHECK(sol.lin_resid < 1e-10);
  CHECK(sol.trans_resid_value < 1e-4);

  EnergyBreakdown e = energy_residual(sol, b, grid);
  CHECK(e.residual < 1e-6);
  CHECK(e.interior_closure < 1e-5);
  CHECK(e.extinction > 0);
  CHECK(e.shell_absorption >= 0);
  CHECK(e.content_absorption >= 0);

  // refinement of the volume rule improves the interior closure
  EnergyBreakdown e2 = energy_residual(sol, b, grid, 2);
  CHECK(e2.interior_closure <= e.interior_closure * 1.05);
}

TEST_CASE("energy residual of the trivial free-space configuration") {
  auto g = straight_tube(1.0, 8, 12);
  g.delta = 1.0;
  LossyLayerSpec lossy;
  lossy.beta = 0.0;
  ContentSpec content;
  DirectionGrid grid = make_direction_grid(6, 12);
  CloakBodies b = build_cloak_bodies(g);
  auto sol = solve_cloak_system(b, lossy, content, 1.0, {Vec3(0, 0, 1)}, grid.dir);
  EnergyBreakdown e = energy_residual(sol, b, grid);
  // all constituent terms vanish for free space; the defect is absolute here
  double absdef = e.residual * std::max({std::abs(e.radiated), e.shell_absorption,
                                         std::abs(e.extinction), 1e-300});
  CHECK(absdef < 1e-10);
}
