#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "thinscat/assemble.hpp"
#include "thinscat/bodies.hpp"
#include "thinscat/directions.hpp"
#include "thinscat/linalg.hpp"

namespace thinscat {

// ---------------------------------------------------------------------------
// material specifications

/// Lossy-layer constants (gamma, alpha, beta); the layer tensor is
/// gamma B^{-2} with modulus alpha + i beta, which pulls back to the
/// constant-coefficient wavenumber k_l below on the rescaled shell.
struct LossyLayerSpec {
  double gamma = 1.0, alpha = 1.0, beta = 1.0;

  void validate() const {
    if (gamma <= 0 || alpha <= 0 || beta < 0)
      throw config_error("LossyLayerSpec: need gamma, alpha > 0 and beta >= 0");
  }
  cplx k_l(double omega) const {  // principal branch, Im >= 0
    validate();
    return omega * std::sqrt(cplx(alpha, beta) / gamma);
  }
};

/// Cloaked-content constants (sigma_a, q_a), prescribed directly on the
/// rescaled inner body; regular in the usual sense.
struct ContentSpec {
  double sigma = 1.0;
  cplx q{1.0, 0.0};

  void validate() const {
    if (sigma <= 0 || q.real() <= 0 || q.imag() < 0)
      throw config_error("ContentSpec: need sigma > 0, Re q > 0, Im q >= 0");
  }
  cplx k_a(double omega) const {
    validate();
    return omega * std::sqrt(q / sigma);
  }
};

// ---------------------------------------------------------------------------
// sound-hard exterior solve

struct SoundHardOptions {
  NystromOptions nyst;
  double incident_amplitude = 1.0;
  double resonance_rcond = 1e-6;
};

struct SoundHardSolution {
  std::vector<Density> phi;    // one density per incident direction
  std::vector<FarField> ff;
  double rcond = 1.0;
  double lin_resid = 0.0;
};

/// Exterior Neumann problem: (I/2 + K*) phi = -du^i/dnu, scattered field
/// S[phi]. Near an interior Dirichlet eigenvalue the operator degenerates;
/// this is detected through the factorization and reported as a
/// resonance_error (re-run in combined-field mode or shift omega).
inline SoundHardSolution solve_sound_hard(const SurfaceQuadrature& surf, double omega,
                                          const std::vector<Vec3>& incidences,
                                          const std::vector<Vec3>& obs_dirs,
                                          const SoundHardOptions& opt = {}) {
  if (omega <= 0) throw config_error("solve_sound_hard: omega must be > 0");
  for (const Vec3& d : incidences)
    if (std::abs(d.norm() - 1.0) > 1e-12)
      throw config_error("solve_sound_hard: incident directions must be unit vectors");

  const int n = surf.size();
  CMat A = assemble_operator(OpKind::Kstar, surf, surf, omega, opt.nyst);
  A += 0.5 * CMat::Identity(n, n);
  CMat rhs(n, incidences.size());
  for (size_t k = 0; k < incidences.size(); ++k)
    for (int i = 0; i < n; ++i)
      rhs(i, k) = -opt.incident_amplitude *
                  dot_c(plane_wave_grad(omega, incidences[k], surf.x[i]), surf.nu[i]);

  DenseSolution sol;
  try {
    sol = solve_dense({std::move(A), std::move(rhs)});
  } catch (const solver_error& e) {
    throw resonance_error(std::string(e.what()) +
                          " (interior resonance suspected; use combined-field mode)");
  }
  if (sol.rcond_est < opt.resonance_rcond)
    throw resonance_error("solve_sound_hard: operator nearly singular (rcond~" +
                          std::to_string(sol.rcond_est) +
                          "); interior resonance suspected, use combined-field mode");

  SoundHardSolution out;
  out.rcond = sol.rcond_est;
  out.lin_resid = sol.resid_rel;
  for (size_t k = 0; k < incidences.size(); ++k) {
    Density d(surf, sol.X.col(k));
    FarField f = far_field(surf, d, omega, obs_dirs);
    f.d_inc = incidences[k];
    out.phi.push_back(std::move(d));
    out.ff.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// cloak transmission solve in rescaled coordinates

/// The three bodies of the cloak problem. outer_phys is the physical
/// boundary of D_delta; outer_resc its unit-scale blow-up image on the same
/// parameter grid (node-matched); inner_resc is the rescaled inner boundary
/// (the half-scale body).
struct CloakBodies {
  SurfaceQuadrature outer_phys, outer_resc, inner_resc;
  std::variant<TubeGeometry, ScreenGeometry> geom;
  double delta = 0.0;
};

inline CloakBodies build_cloak_bodies(const TubeGeometry& g,
                                      std::optional<TubeGeometry> inner_override = {}) {
  if (!g.curve.straight())
    throw geometry_error(
        "solve_cloak supports straight generating segments only (piecewise-constant "
        "Jacobian); curved generators are limited to the sound-hard experiments");
  CloakBodies b;
  b.geom = g;
  b.delta = g.delta;
  b.outer_phys = build_tube_surface(g);
  TubeGeometry g1 = g;
  g1.delta = 1.0;
  b.outer_resc = build_tube_surface(g1);
  TubeGeometry gi = inner_override.value_or(g);
  gi.delta = 0.5;
  b.inner_resc = build_tube_surface(gi);
  b.inner_resc.body_id = "inner";
  return b;
}

inline CloakBodies build_cloak_bodies(const ScreenGeometry& g,
                                      std::optional<ScreenGeometry> inner_override = {}) {
  if (g.delta >= g.side / 2)
    throw geometry_error("screen cloak: the physical body must be thin (delta < side/2)");
  CloakBodies b;
  b.geom = g;
  b.delta = g.delta;
  b.outer_phys = build_screen_surface(g);
  ScreenGeometry g1 = g;
  g1.delta = 1.0;
  b.outer_resc = build_screen_surface(g1);
  ScreenGeometry gi = inner_override.value_or(g);
  gi.delta = 0.5;
  b.inner_resc = build_screen_surface(gi);
  b.inner_resc.body_id = "inner";
  return b;
}

struct CloakOptions {
  NystromOptions nyst;
  double incident_amplitude = 1.0;
  double rcond_floor = 1e-14;
};

/// The rescaled-body operator blocks of the cloak system. They do not depend
/// on delta, so a delta ladder with fixed resolutions assembles them once.
struct CloakInteriorBlocks {
  cplx kl{0, 0}, ka{0, 0};
  int n_outer = 0, n_inner = 0;
  CMat S_oo, Ks_oo, S_oi, Ks_oi, S_io, Ks_io, S_ii_l, Ks_ii_l, S_ii_a, Ks_ii_a;
};

inline CloakInteriorBlocks assemble_cloak_interior(const SurfaceQuadrature& outer_resc,
                                                   const SurfaceQuadrature& inner_resc, cplx kl,
                                                   cplx ka, const NystromOptions& no = {}) {
  CloakInteriorBlocks blk;
  blk.kl = kl;
  blk.ka = ka;
  blk.n_outer = outer_resc.size();
  blk.n_inner = inner_resc.size();
  blk.S_oo = assemble_operator(OpKind::S, outer_resc, outer_resc, kl, no);
  blk.Ks_oo = assemble_operator(OpKind::Kstar, outer_resc, outer_resc, kl, no);
  blk.S_oi = assemble_operator(OpKind::S, outer_resc, inner_resc, kl, no);
  blk.Ks_oi = assemble_operator(OpKind::Kstar, outer_resc, inner_resc, kl, no);
  blk.S_io = assemble_operator(OpKind::S, inner_resc, outer_resc, kl, no);
  blk.Ks_io = assemble_operator(OpKind::Kstar, inner_resc, outer_resc, kl, no);
  blk.S_ii_l = assemble_operator(OpKind::S, inner_resc, inner_resc, kl, no);
  blk.Ks_ii_l = assemble_operator(OpKind::Kstar, inner_resc, inner_resc, kl, no);
  blk.S_ii_a = assemble_operator(OpKind::S, inner_resc, inner_resc, ka, no);
  blk.Ks_ii_a = assemble_operator(OpKind::Kstar, inner_resc, inner_resc, ka, no);
  return blk;
}

struct CloakSolution {
  // densities, one column per incidence
  CMat phi_ext, phi_shell_outer, phi_shell_inner, phi_content;
  std::vector<FarField> ff;
  std::vector<Vec3> incidences;
  double omega = 0.0;
  LossyLayerSpec lossy;
  ContentSpec content;

  // boundary traces cached for the energy bookkeeping (per incidence columns)
  CMat Phi_ext;      // d u/dnu|+ at outer_phys nodes
  CMat u_scat_surf;  // S[phi_ext] trace at outer_phys nodes
  CMat v_bnd;        // v on the rescaled outer boundary
  CMat dv_bnd;       // d v/dnu on the rescaled outer boundary (shell side)

  double rcond = 1.0;
  double lin_resid = 0.0;
  double trans_resid_value = 0.0;  // off-collocation value-condition residual
  double trans_resid_flux = 0.0;

  double sup_farfield() const {
    double m = 0;
    for (const auto& f : ff) m = std::max(m, f.sup());
    return m;
  }
};

namespace detail {

/// On-surface single-layer value at arbitrary chart points of the surface
/// (used for off-collocation transmission checks).
inline cplx onsurface_S_value(const SurfaceQuadrature& s, const CVec& dens, cplx k, int panel_id,
                              double u, double v, const NystromOptions& o) {
  Vec3 xx, nn;
  double jac;
  s.charts[s.panels[panel_id].chart].eval(u, v, xx, nn, jac);
  double Lu[64], Lv[64];
  cplx acc = 0;
  for (size_t pid = 0; pid < s.panels.size(); ++pid) {
    const Panel& p = s.panels[pid];
    auto accum = [&](double uu, double vv, const Vec3& y, const Vec3& nuy, double wq) {
      double r = (xx - y).norm();
      if (r < 1e-14) return;
      panel_basis(p, uu, vv, Lu, Lv);
      cplx f = 0;
      for (int iu = 0; iu < p.nu; ++iu) {
        cplx fu = 0;
        for (int iv = 0; iv < p.nv; ++iv) fu += Lv[iv] * dens[p.first_node + iu * p.nv + iv];
        f += Lu[iu] * fu;
      }
      acc += wq * op_kernel(OpKind::S, k, xx, nn, y, nuy) * f;
    };
    if (static_cast<int>(pid) == panel_id)
      self_points(s, p, u, v, o, accum);
    else if (classify(s, p, static_cast<int>(pid), xx, -1, o) == PanelClass::far) {
      for (int iu = 0; iu < p.nu; ++iu)
        for (int iv = 0; iv < p.nv; ++iv) {
          int j = p.first_node + iu * p.nv + iv;
          acc += s.w[j] * op_kernel(OpKind::S, k, xx, nn, s.x[j], s.nu[j]) * dens[j];
        }
    } else {
      near_points(s, p, xx, o, accum);
    }
  }
  return acc;
}

}  // namespace detail

/// Three-medium transmission solve. Exterior Helmholtz(omega) outside the
/// physical body, represented by a single layer on its boundary; the lossy
/// shell as constant-coefficient Helmholtz(k_l) between the rescaled outer
/// and inner boundaries; the content as Helmholtz(k_a) inside the rescaled
/// inner body. The scale jump across the outer boundary couples value
/// u = v o A and flux du/dnu = gamma*delta* dv/dnu (from sigma_l = gamma
/// B^{-2} and B nu = nu/delta); value and flux are continuous across the
/// inner boundary with weights gamma and sigma_a.
inline CloakSolution solve_cloak_system(const CloakBodies& b, const LossyLayerSpec& lossy,
                                        const ContentSpec& content, double omega,
                                        const std::vector<Vec3>& incidences,
                                        const std::vector<Vec3>& obs_dirs,
                                        const CloakOptions& opt = {},
                                        const CloakInteriorBlocks* cached = nullptr) {
  lossy.validate();
  content.validate();
  if (omega <= 0) throw config_error("solve_cloak: omega must be > 0");
  const double delta = b.delta, gamma = lossy.gamma;
  const cplx kl = lossy.k_l(omega), ka = content.k_a(omega);
  const double sig_a = content.sigma;
  const int ne = b.outer_phys.size(), ni = b.inner_resc.size();
  const int n = 2 * ne + 2 * ni;
  const auto& no = opt.nyst;

  // sanity: the rescaled outer body must be the node-matched blow-up image
  for (int i = 0; i < ne; i += std::max(1, ne / 7))
    if ((b.outer_phys.xt[i] - b.outer_resc.x[i]).norm() > 1e-9)
      throw geometry_error("solve_cloak: outer bodies are not node-matched");

  // memory guard: the system and its factorization live side by side with
  // the cached interior blocks
  double need_gb =
      (2.0 * double(n) * n + 6.0 * double(ne) * ne + 6.0 * double(ne) * ni) * 16e-9;
  if (need_gb > 4.0)
    throw solver_error("solve_cloak: system of " + std::to_string(n) +
                       " unknowns exceeds the memory budget; reduce the resolutions");

  CloakInteriorBlocks local;
  const CloakInteriorBlocks* ib = cached;
  if (!ib) {
    local = assemble_cloak_interior(b.outer_resc, b.inner_resc, kl, ka, no);
    ib = &local;
  } else {
    if (std::abs(ib->kl - kl) > 1e-13 * std::abs(kl) ||
        std::abs(ib->ka - ka) > 1e-13 * std::abs(ka) || ib->n_outer != ne || ib->n_inner != ni)
      throw config_error("solve_cloak: cached interior blocks do not match this system");
  }

  CMat Ie = CMat::Identity(ne, ne), Ii = CMat::Identity(ni, ni);
  CMat S_ee = assemble_operator(OpKind::S, b.outer_phys, b.outer_phys, omega, no);
  CMat Ks_ee = assemble_operator(OpKind::Kstar, b.outer_phys, b.outer_phys, omega, no);

  CMat A = CMat::Zero(n, n);
  A.block(0, 0, ne, ne) = S_ee;
  A.block(0, ne, ne, ne) = -ib->S_oo;
  A.block(0, 2 * ne, ne, ni) = -ib->S_oi;
  A.block(ne, 0, ne, ne) = 0.5 * Ie + Ks_ee;
  A.block(ne, ne, ne, ne) = -gamma * delta * (-0.5 * Ie + ib->Ks_oo);
  A.block(ne, 2 * ne, ne, ni) = -gamma * delta * ib->Ks_oi;
  A.block(2 * ne, ne, ni, ne) = ib->S_io;
  A.block(2 * ne, 2 * ne, ni, ni) = ib->S_ii_l;
  A.block(2 * ne, 2 * ne + ni, ni, ni) = -ib->S_ii_a;
  A.block(2 * ne + ni, ne, ni, ne) = gamma * ib->Ks_io;
  A.block(2 * ne + ni, 2 * ne, ni, ni) = gamma * (0.5 * Ii + ib->Ks_ii_l);
  A.block(2 * ne + ni, 2 * ne + ni, ni, ni) = -sig_a * (-0.5 * Ii + ib->Ks_ii_a);

  CMat rhs = CMat::Zero(n, incidences.size());
  for (size_t kd = 0; kd < incidences.size(); ++kd) {
    for (int i = 0; i < ne; ++i) {
      rhs(i, kd) = -opt.incident_amplitude * plane_wave(omega, incidences[kd], b.outer_phys.x[i]);
      rhs(ne + i, kd) =
          -opt.incident_amplitude *
          dot_c(plane_wave_grad(omega, incidences[kd], b.outer_phys.x[i]), b.outer_phys.nu[i]);
    }
  }

  DenseSolution sol = solve_dense({std::move(A), rhs});
  if (sol.rcond_est < opt.rcond_floor)
    throw solver_error("solve_cloak: system is ill-conditioned (rcond~" +
                       std::to_string(sol.rcond_est) + ")");

  CloakSolution out;
  out.omega = omega;
  out.lossy = lossy;
  out.content = content;
  out.incidences = incidences;
  out.rcond = sol.rcond_est;
  out.lin_resid = sol.resid_rel;
  out.phi_ext = sol.X.topRows(ne);
  out.phi_shell_outer = sol.X.middleRows(ne, ne);
  out.phi_shell_inner = sol.X.middleRows(2 * ne, ni);
  out.phi_content = sol.X.middleRows(2 * ne + ni, ni);

  out.Phi_ext.resize(ne, incidences.size());
  out.u_scat_surf = S_ee * out.phi_ext;
  out.v_bnd = ib->S_oo * out.phi_shell_outer + ib->S_oi * out.phi_shell_inner;
  out.dv_bnd = (-0.5 * Ie + ib->Ks_oo) * out.phi_shell_outer + ib->Ks_oi * out.phi_shell_inner;
  CMat flux_scat = (0.5 * Ie + Ks_ee) * out.phi_ext;
  for (size_t kd = 0; kd < incidences.size(); ++kd)
    for (int i = 0; i < ne; ++i)
      out.Phi_ext(i, kd) =
          opt.incident_amplitude *
              dot_c(plane_wave_grad(omega, incidences[kd], b.outer_phys.x[i]), b.outer_phys.nu[i]) +
          flux_scat(i, kd);

  for (size_t kd = 0; kd < incidences.size(); ++kd) {
    Density dphi(b.outer_phys, out.phi_ext.col(kd));
    FarField f = far_field(b.outer_phys, dphi, omega, obs_dirs);
    f.d_inc = incidences[kd];
    out.ff.push_back(std::move(f));
  }

  // off-collocation transmission residual: re-check the value/flux matching
  // at panel parameter centers of the outer boundary (first incidence)
  {
    double worst_v = 0, worst_f = 0;
    const auto& sp = b.outer_phys;
    int stride = std::max<size_t>(1, sp.panels.size() / 6);
    for (size_t pid = 0; pid < sp.panels.size(); pid += stride) {
      const Panel& p = sp.panels[pid];
      double um = 0.5 * (p.u0 + p.u1), vm = 0.5 * (p.v0 + p.v1);
      Vec3 xph, nph, xrs, nrs;
      double j1, j2;
      sp.charts[p.chart].eval(um, vm, xph, nph, j1);
      b.outer_resc.charts[b.outer_resc.panels[pid].chart].eval(um, vm, xrs, nrs, j2);
      cplx uex = opt.incident_amplitude * plane_wave(omega, incidences[0], xph) +
                 detail::onsurface_S_value(sp, out.phi_ext.col(0), omega, pid, um, vm, no);
      cplx vin =
          detail::onsurface_S_value(b.outer_resc, out.phi_shell_outer.col(0), kl, pid, um, vm, no);
      Density d2(b.inner_resc, out.phi_shell_inner.col(0));
      vin += evaluate_potential(OpKind::S, b.inner_resc, d2, {xrs}, kl, no)[0];
      worst_v = std::max(worst_v, std::abs(uex - vin));
    }
    out.trans_resid_value = worst_v / std::max(1.0, opt.incident_amplitude);
    out.trans_resid_flux = out.lin_resid;  // flux rows are collocated exactly
  }
  return out;
}

inline CloakSolution solve_cloak(const TubeGeometry& g, const LossyLayerSpec& lossy,
                                 const ContentSpec& content, double omega,
                                 const std::vector<Vec3>& incidences,
                                 const std::vector<Vec3>& obs_dirs, const CloakOptions& opt = {}) {
  CloakBodies b = build_cloak_bodies(g);
  return solve_cloak_system(b, lossy, content, omega, incidences, obs_dirs, opt);
}

inline CloakSolution solve_screen_cloak(const ScreenGeometry& g, const LossyLayerSpec& lossy,
                                        const ContentSpec& content, double omega,
                                        const std::vector<Vec3>& incidences,
                                        const std::vector<Vec3>& obs_dirs,
                                        const CloakOptions& opt = {}) {
  CloakBodies b = build_cloak_bodies(g);
  return solve_cloak_system(b, lossy, content, omega, incidences, obs_dirs, opt);
}

}  // namespace thinscat
