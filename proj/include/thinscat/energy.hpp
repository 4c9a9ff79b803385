#pragma once

#include <vector>

#include "thinscat/solvers.hpp"

namespace thinscat {

struct VolumePoint {
  Vec3 x;
  double w;
};

namespace detail {

/// Volume rule for the tube region between radii [r0, r1] about the
/// generating curve (facade part plus the two cap sectors).
inline std::vector<VolumePoint> tube_volume(const GeneratingCurve& c, double r0, double r1,
                                            int nt, int ntheta, int nrho, int ncap) {
  std::vector<VolumePoint> out;
  QuadratureRule th = periodic_trapezoid(ntheta);
  QuadratureRule rr = map_rule(gauss_legendre(nrho), r0, r1);
  QuadratureRule tt = panel_rule(0.0, c.length(), nt, 4);
  for (int i = 0; i < tt.n(); ++i) {
    Vec3 z = c.position(tt.x[i]);
    CurveFrame f = c.frame(tt.x[i]);
    Vec3 dT = c.dtangent(tt.x[i]);
    for (int j = 0; j < th.n(); ++j) {
      Vec3 nhat = std::cos(th.x[j]) * f.N1 + std::sin(th.x[j]) * f.N2;
      double curv = dT.dot(nhat);
      for (int k = 0; k < rr.n(); ++k) {
        double rho = rr.x[k];
        out.push_back({z + rho * nhat,
                       tt.w[i] * th.w[j] * rr.w[k] * rho * (1.0 - rho * curv)});
      }
    }
  }
  QuadratureRule ph = map_rule(gauss_legendre(ncap), 0.0, pi / 2);
  for (int cap = 0; cap < 2; ++cap) {
    Vec3 pe = cap == 0 ? c.p0() : c.q0();
    CurveFrame f = c.frame(cap == 0 ? 0.0 : c.length());
    double sgn = cap == 0 ? -1.0 : 1.0;
    for (int a = 0; a < ph.n(); ++a)
      for (int j = 0; j < th.n(); ++j) {
        Vec3 nhat = std::cos(th.x[j]) * f.N1 + std::sin(th.x[j]) * f.N2;
        Vec3 u = std::sin(ph.x[a]) * nhat + sgn * std::cos(ph.x[a]) * f.T;
        for (int k = 0; k < rr.n(); ++k) {
          double rho = rr.x[k];
          out.push_back({pe + rho * u,
                         ph.w[a] * th.w[j] * rr.w[k] * rho * rho * std::sin(ph.x[a])});
        }
      }
  }
  return out;
}

/// Volume rule for the screen region between offsets [r0, r1] about the
/// generating square (slabs, edge sectors, corner sectors).
inline std::vector<VolumePoint> screen_volume(double side, double r0, double r1, int nface,
                                              int nrho) {
  std::vector<VolumePoint> out;
  double h = side / 2;
  QuadratureRule xy = panel_rule(-h, h, nface, 4);
  std::vector<QuadratureRule> zr;
  if (r0 == 0.0)
    zr.push_back(map_rule(gauss_legendre(2 * nrho), -r1, r1));
  else {
    zr.push_back(map_rule(gauss_legendre(nrho), r0, r1));
    zr.push_back(map_rule(gauss_legendre(nrho), -r1, -r0));
  }
  for (int i = 0; i < xy.n(); ++i)
    for (int j = 0; j < xy.n(); ++j)
      for (const auto& zrule : zr)
        for (int k = 0; k < zrule.n(); ++k)
          out.push_back({Vec3(xy.x[i], xy.x[j], zrule.x[k]), xy.w[i] * xy.w[j] * zrule.w[k]});

  QuadratureRule rr = map_rule(gauss_legendre(nrho), std::max(r0, 0.0), r1);
  QuadratureRule bb = map_rule(gauss_legendre(2 * nrho), -pi / 2, pi / 2);
  struct Edge {
    Vec3 e, outn, base;
  };
  const Edge edges[4] = {{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, h, 0)},
                         {Vec3(1, 0, 0), Vec3(0, -1, 0), Vec3(0, -h, 0)},
                         {Vec3(0, 1, 0), Vec3(1, 0, 0), Vec3(h, 0, 0)},
                         {Vec3(0, 1, 0), Vec3(-1, 0, 0), Vec3(-h, 0, 0)}};
  for (const auto& ed : edges)
    for (int i = 0; i < xy.n(); ++i)
      for (int jb = 0; jb < bb.n(); ++jb) {
        Vec3 dir = std::cos(bb.x[jb]) * ed.outn + std::sin(bb.x[jb]) * Vec3(0, 0, 1);
        for (int k = 0; k < rr.n(); ++k)
          out.push_back({ed.base + xy.x[i] * ed.e + rr.x[k] * dir,
                         xy.w[i] * bb.w[jb] * rr.w[k] * rr.x[k]});
      }

  QuadratureRule pp = map_rule(gauss_legendre(nrho), 0.0, pi / 2);
  QuadratureRule ss = map_rule(gauss_legendre(2 * nrho), -pi / 2, pi / 2);
  for (int sx = -1; sx <= 1; sx += 2)
    for (int sy = -1; sy <= 1; sy += 2) {
      Vec3 corner(sx * h, sy * h, 0.0);
      Vec3 u1(sx, 0, 0), u2(0, sy, 0);
      for (int a = 0; a < pp.n(); ++a)
        for (int b = 0; b < ss.n(); ++b) {
          Vec3 dir = std::cos(ss.x[b]) * (std::cos(pp.x[a]) * u1 + std::sin(pp.x[a]) * u2) +
                     std::sin(ss.x[b]) * Vec3(0, 0, 1);
          for (int k = 0; k < rr.n(); ++k)
            out.push_back({corner + rr.x[k] * dir,
                           pp.w[a] * ss.w[b] * rr.w[k] * rr.x[k] * rr.x[k] * std::cos(ss.x[b])});
        }
    }
  return out;
}

inline int patch_scale_exponent(PatchTag t) {
  switch (t) {
    case PatchTag::facade: return 1;
    case PatchTag::capA:
    case PatchTag::capB: return 2;
    case PatchTag::s0: return 0;
    case PatchTag::s1: return 1;
    case PatchTag::s2: return 2;
    default: return 0;
  }
}

}  // namespace detail

struct EnergyBreakdown {
  double residual = 0.0;          // normalized defect of the flux-balance identity
  double interior_closure = 0.0;  // boundary-vs-volume absorption bookkeeping defect
  double radiated = 0.0;          // omega * int |u_inf|^2
  double shell_absorption = 0.0;  // beta omega^2 * int_shell |v|^2 (rescaled measure)
  double content_absorption = 0.0;
  double extinction = 0.0;  // -(coupling terms); nonnegative for a physical solve
};

/// Flux-balance defect of a cloak solve: the radiated power plus the
/// absorbed power (shell and content, with the per-patch surface-measure
/// scale factors of the blow-up) must balance the two boundary coupling
/// terms against the incident wave. Near zero for a converged solve.
inline EnergyBreakdown energy_residual(const CloakSolution& sol, const CloakBodies& b,
                                       const DirectionGrid& grid, int volume_level = 1,
                                       const NystromOptions& nyst = {}) {
  const double omega = sol.omega, delta = b.delta;
  const double gamma = sol.lossy.gamma, beta = sol.lossy.beta;
  const cplx kl = sol.lossy.k_l(omega), ka = sol.content.k_a(omega);

  // rescaled-region volume rules
  std::vector<VolumePoint> shell_pts, content_pts;
  int lv = std::max(1, volume_level);
  if (std::holds_alternative<TubeGeometry>(b.geom)) {
    const auto& g = std::get<TubeGeometry>(b.geom);
    shell_pts = detail::tube_volume(g.curve, 0.5, 1.0, 6 * lv, 10 * lv, 5 * lv, 5 * lv);
    content_pts = detail::tube_volume(g.curve, 0.0, 0.5, 6 * lv, 10 * lv, 5 * lv, 5 * lv);
  } else {
    const auto& g = std::get<ScreenGeometry>(b.geom);
    shell_pts = detail::screen_volume(g.side, 0.5, 1.0, 4 * lv, 4 * lv);
    content_pts = detail::screen_volume(g.side, 0.0, 0.5, 4 * lv, 4 * lv);
  }
  std::vector<Vec3> spx(shell_pts.size()), cpx(content_pts.size());
  for (size_t i = 0; i < shell_pts.size(); ++i) spx[i] = shell_pts[i].x;
  for (size_t i = 0; i < content_pts.size(); ++i) cpx[i] = content_pts[i].x;

  // evaluation matrices, shared by all incidences
  CMat Vso = potential_matrix(OpKind::S, b.outer_resc, spx, kl, nyst);
  CMat Vsi = potential_matrix(OpKind::S, b.inner_resc, spx, kl, nyst);
  CMat Vci = potential_matrix(OpKind::S, b.inner_resc, cpx, ka, nyst);

  int pmin = 3;
  for (int i = 0; i < b.outer_resc.size(); ++i)
    pmin = std::min(pmin, detail::patch_scale_exponent(b.outer_resc.tag[i]));

  EnergyBreakdown worst;
  for (size_t kd = 0; kd < sol.incidences.size(); ++kd) {
    const Vec3 d = sol.incidences[kd];
    Density phie(b.outer_phys, sol.phi_ext.col(kd));
    FarField f = far_field(b.outer_phys, phie, omega, grid.dir);
    double e_rad = 0;
    for (int g = 0; g < grid.size(); ++g) e_rad += std::norm(f.u[g]) * grid.w[g];
    e_rad *= omega;

    CVec v_sh = Vso * sol.phi_shell_outer.col(kd) + Vsi * sol.phi_shell_inner.col(kd);
    CVec w_ct = Vci * sol.phi_content.col(kd);
    double vol_shell = 0, vol_content = 0;
    for (size_t i = 0; i < shell_pts.size(); ++i) vol_shell += std::norm(v_sh[i]) * shell_pts[i].w;
    for (size_t i = 0; i < content_pts.size(); ++i)
      vol_content += std::norm(w_ct[i]) * content_pts[i].w;
    double abs_shell = beta * omega * omega * vol_shell;
    double abs_content = sol.content.q.imag() * omega * omega * vol_content;

    // per-patch boundary flux terms of the rescaled shell
    double green_uniform = 0;  // Im int_dD dv/dnu conj(v)
    double corr = 0;           // patch-scale corrections beyond delta^(1+pmin)
    for (int i = 0; i < b.outer_resc.size(); ++i) {
      double im = std::imag(sol.dv_bnd(i, kd) * std::conj(sol.v_bnd(i, kd))) * b.outer_resc.w[i];
      green_uniform += im;
      int p = detail::patch_scale_exponent(b.outer_resc.tag[i]);
      corr += (std::pow(delta, 1 + p) - std::pow(delta, 1 + pmin)) * im;
    }
    green_uniform *= gamma;
    corr *= gamma;

    double t3 = 0, t4 = 0;
    for (int i = 0; i < b.outer_phys.size(); ++i) {
      cplx ui = plane_wave(omega, d, b.outer_phys.x[i]);
      cplx dui = dot_c(plane_wave_grad(omega, d, b.outer_phys.x[i]), b.outer_phys.nu[i]);
      t3 += std::imag(sol.Phi_ext(i, kd) * std::conj(ui)) * b.outer_phys.w[i];
      t4 += std::imag(dui * std::conj(sol.u_scat_surf(i, kd))) * b.outer_phys.w[i];
    }

    double base = std::pow(delta, 1 + pmin);
    double defect = e_rad + base * (abs_shell + abs_content) - corr + t3 + t4;
    double scale = std::max({std::abs(e_rad), base * (abs_shell + abs_content), std::abs(corr),
                             std::abs(t3), std::abs(t4), 1e-300});
    double closure = std::abs(green_uniform + abs_shell + abs_content) /
                     std::max({std::abs(green_uniform), abs_shell + abs_content, 1e-300});

    EnergyBreakdown e;
    e.residual = std::abs(defect) / scale;
    e.interior_closure = closure;
    e.radiated = e_rad;
    e.shell_absorption = abs_shell;
    e.content_absorption = abs_content;
    e.extinction = -(t3 + t4);
    if (e.residual >= worst.residual) {
      double ic = std::max(e.interior_closure, worst.interior_closure);
      worst = e;
      worst.interior_closure = ic;
    }
  }
  return worst;
}

/// Optical-theorem defect of a sound-hard far field:
/// (4 pi / omega) Im u_inf(d,d) - int_grid |u_inf|^2.
inline double optical_theorem_defect(const SurfaceQuadrature& surf, const Density& phi,
                                     double omega, const Vec3& d, const DirectionGrid& grid) {
  FarField fwd = far_field(surf, phi, omega, {d});
  FarField all = far_field(surf, phi, omega, grid.dir);
  double scat = 0;
  for (int g = 0; g < grid.size(); ++g) scat += std::norm(all.u[g]) * grid.w[g];
  double ext = 4.0 * pi / omega * fwd.u[0].imag();
  return std::abs(ext - scat) / std::max(scat, 1e-300);
}

}  // namespace thinscat
