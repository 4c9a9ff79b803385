#pragma once

#include <vector>

#include "thinscat/density.hpp"
#include "thinscat/directions.hpp"
#include "thinscat/kernels.hpp"
#include "thinscat/special.hpp"
#include "thinscat/surface.hpp"

namespace thinscat {

struct NystromOptions {
  double near_factor = 5.0;  // adaptive path when dist < near_factor * panel size
  double near_ratio = 0.5;   // accept a subcell once size <= near_ratio * dist
  int q_near = 4;            // GL order per accepted subcell
  int max_depth = 34;
  int q_polar_ang = 10;  // polar rule on the singular (self) panel
  int q_polar_rad = 10;
};

namespace detail {

inline const QuadratureRule& cached_gl(int q) {
  static std::vector<QuadratureRule> cache(64);
  if (q < 1 || q >= 64) throw quadrature_error("cached_gl: order out of range");
  if (cache[q].n() == 0) cache[q] = gauss_legendre(q);
  return cache[q];
}

/// Barycentric Lagrange basis on the panel's Gauss nodes.
inline void bary_basis(const RVec& xn, const RVec& wb, double u, double* L) {
  const int n = static_cast<int>(xn.size());
  for (int i = 0; i < n; ++i)
    if (std::abs(u - xn[i]) < 1e-14) {
      for (int j = 0; j < n; ++j) L[j] = (j == i) ? 1.0 : 0.0;
      return;
    }
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    L[i] = wb[i] / (u - xn[i]);
    s += L[i];
  }
  for (int i = 0; i < n; ++i) L[i] /= s;
}

/// Trigonometric cardinal basis on n equispaced nodes over one period.
inline void trig_basis(const RVec& vn, double v0, double v1, double v, double* L) {
  const int n = static_cast<int>(vn.size());
  const double P = v1 - v0;
  for (int j = 0; j < n; ++j) {
    double m = 2.0 * pi * (v - vn[j]) / P;
    m = std::remainder(m, 2.0 * pi);
    if (std::abs(m) < 1e-13) {
      L[j] = 1.0;
    } else if (n % 2 == 0) {
      L[j] = std::sin(0.5 * n * m) / std::tan(0.5 * m) / n;
    } else {
      L[j] = std::sin(0.5 * n * m) / std::sin(0.5 * m) / n;
    }
  }
}

inline void panel_basis(const Panel& p, double u, double v, double* Lu, double* Lv) {
  bary_basis(p.un, p.ubw, u, Lu);
  if (p.v_periodic)
    trig_basis(p.vn, p.v0, p.v1, v, Lv);
  else
    bary_basis(p.vn, p.vbw, v, Lv);
}

/// Plain tensor Gauss rule on a parameter subrectangle.
template <class PointCB>
inline void tensor_points(const SurfaceQuadrature& S, const Panel& p, double a0, double a1,
                          double b0, double b1, int q, PointCB&& cb) {
  const QuadratureRule& gl = cached_gl(q);
  const Chart& ch = S.charts[p.chart];
  for (int i = 0; i < q; ++i) {
    double u = 0.5 * (a0 + a1) + 0.5 * (a1 - a0) * gl.x[i];
    double wu = 0.5 * (a1 - a0) * gl.w[i];
    for (int j = 0; j < q; ++j) {
      double v = 0.5 * (b0 + b1) + 0.5 * (b1 - b0) * gl.x[j];
      double wv = 0.5 * (b1 - b0) * gl.w[j];
      Vec3 xx, nn;
      double jac;
      ch.eval(u, v, xx, nn, jac);
      cb(u, v, xx, nn, wu * wv * jac);
    }
  }
}

/// Graded dyadic subdivision toward the target; integrable singularities on
/// the subrectangle closure are resolved by the depth-capped grading.
template <class PointCB>
inline void near_points(const SurfaceQuadrature& S, const Panel& p, const Vec3& target,
                        const NystromOptions& o, PointCB&& cb) {
  struct Rect {
    double a0, a1, b0, b1;
    int depth;
  };
  std::vector<Rect> stack;
  if (p.v_periodic) {
    // quarter the full ring first: wrap-around corners coincide, which would
    // defeat the corner-based extent and distance estimates below
    double P = p.v1 - p.v0;
    for (int qtr = 0; qtr < 4; ++qtr)
      stack.push_back({p.u0, p.u1, p.v0 + P * qtr / 4, p.v0 + P * (qtr + 1) / 4, 1});
  } else {
    stack.push_back({p.u0, p.u1, p.v0, p.v1, 0});
  }
  const Chart& ch = S.charts[p.chart];
  while (!stack.empty()) {
    Rect r = stack.back();
    stack.pop_back();
    Vec3 c00, c01, c10, c11, cm, nn;
    double jac;
    ch.eval(r.a0, r.b0, c00, nn, jac);
    ch.eval(r.a0, r.b1, c01, nn, jac);
    ch.eval(r.a1, r.b0, c10, nn, jac);
    ch.eval(r.a1, r.b1, c11, nn, jac);
    ch.eval(0.5 * (r.a0 + r.a1), 0.5 * (r.b0 + r.b1), cm, nn, jac);
    double du = std::max((c10 - c00).norm(), (c11 - c01).norm());
    double dv = std::max((c01 - c00).norm(), (c11 - c10).norm());
    double size = std::max(du, dv);
    double dist = std::min({(target - c00).norm(), (target - c01).norm(), (target - c10).norm(),
                            (target - c11).norm(), (target - cm).norm()});
    dist = std::max(dist - 0.6 * size, 0.0);
    if (size <= o.near_ratio * dist || r.depth >= o.max_depth) {
      tensor_points(S, p, r.a0, r.a1, r.b0, r.b1, o.q_near, cb);
    } else if (du >= dv) {
      double am = 0.5 * (r.a0 + r.a1);
      stack.push_back({r.a0, am, r.b0, r.b1, r.depth + 1});
      stack.push_back({am, r.a1, r.b0, r.b1, r.depth + 1});
    } else {
      double bm = 0.5 * (r.b0 + r.b1);
      stack.push_back({r.a0, r.a1, r.b0, bm, r.depth + 1});
      stack.push_back({r.a0, r.a1, bm, r.b1, r.depth + 1});
    }
  }
}

/// Polar rule about the target's parameter point, in metric-scaled
/// coordinates so thin (anisotropic) charts stay well resolved. The polar
/// Jacobian cancels the 1/r kernel singularity.
template <class PointCB>
inline void self_points(const SurfaceQuadrature& S, const Panel& p, double ustar, double vstar,
                        const NystromOptions& o, PointCB&& cb) {
  const Chart& ch = S.charts[p.chart];
  Vec3 x0, xu, xv, nn;
  double jac;
  double hu = 1e-5 * (p.u1 - p.u0), hv = 1e-5 * (p.v1 - p.v0);
  ch.eval(ustar, vstar, x0, nn, jac);
  ch.eval(ustar + hu, vstar, xu, nn, jac);
  ch.eval(ustar, vstar + hv, xv, nn, jac);
  double mu = (xu - x0).norm() / hu;
  double mv = (xv - x0).norm() / hv;
  if (mu <= 0 || mv <= 0) throw quadrature_error("self_points: degenerate chart metric");

  double sL = (p.u0 - ustar) * mu, sR = (p.u1 - ustar) * mu;
  double tB, tT;
  if (p.v_periodic) {
    double P = p.v1 - p.v0;
    tB = -0.5 * P * mv;
    tT = 0.5 * P * mv;
  } else {
    tB = (p.v0 - vstar) * mv;
    tT = (p.v1 - vstar) * mv;
  }

  const QuadratureRule& ga = cached_gl(o.q_polar_ang);
  const QuadratureRule& gr = cached_gl(o.q_polar_rad);
  // four triangular sectors: right, top, left, bottom
  double th0 = std::atan2(tB, sR), th1 = std::atan2(tT, sR), th2 = std::atan2(tT, sL);
  double th3 = std::atan2(tB, sL) + 2.0 * pi, th4 = th0 + 2.0 * pi;
  const double bounds[5] = {th0, th1, th2, th3, th4};
  for (int tri = 0; tri < 4; ++tri) {
    double a = bounds[tri], b = bounds[tri + 1];
    if (b - a < 1e-14) continue;
    auto Rof = [&](double alpha) {
      switch (tri) {
        case 0: return sR / std::cos(alpha);
        case 1: return tT / std::sin(alpha);
        case 2: return sL / std::cos(alpha);
        default: return tB / std::sin(alpha);
      }
    };
    // grade the angular segments so R(alpha) ~ sec varies by a bounded
    // factor per segment; the sector corners are steep when the target
    // sits near a panel edge
    std::vector<std::pair<double, double>> segs{{a, b}}, ready;
    while (!segs.empty()) {
      auto [x, y] = segs.back();
      segs.pop_back();
      double R0 = Rof(x), R1 = Rof(y), Rm = Rof(0.5 * (x + y));
      double rmax = std::max({R0, R1, Rm}), rmin = std::min({R0, R1, Rm});
      if (y - x < 1e-4 || rmax <= 1.9 * rmin) {
        ready.emplace_back(x, y);
      } else {
        segs.emplace_back(x, 0.5 * (x + y));
        segs.emplace_back(0.5 * (x + y), y);
      }
    }
    for (auto [a0, b0] : ready) {
      for (int ia = 0; ia < ga.n(); ++ia) {
        double alpha = 0.5 * (a0 + b0) + 0.5 * (b0 - a0) * ga.x[ia];
        double wa = 0.5 * (b0 - a0) * ga.w[ia];
        double ca = std::cos(alpha), sa = std::sin(alpha);
        double R = Rof(alpha);
        // geometric radial segments; the chart metric may vary along the ray
        // (e.g. toward a cap pole) even though the kernel singularity is gone
        const double rsplit[3][2] = {{0.0, 0.25}, {0.25, 0.5}, {0.5, 1.0}};
        for (const auto& seg : rsplit) {
          double r0 = R * seg[0], r1 = R * seg[1];
          for (int ir = 0; ir < gr.n(); ++ir) {
            double rho = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * gr.x[ir];
            double wr = 0.5 * (r1 - r0) * gr.w[ir];
            double u = ustar + rho * ca / mu;
            double v = vstar + rho * sa / mv;
            Vec3 xx, nq;
            double jq;
            ch.eval(u, v, xx, nq, jq);
            cb(u, v, xx, nq, wa * wr * rho * jq / (mu * mv));
          }
        }
      }
    }
  }
}

enum class PanelClass { self, near, far };

inline PanelClass classify(const SurfaceQuadrature& src, const Panel& p, int panel_id,
                           const Vec3& target, int target_self_panel, const NystromOptions& o) {
  if (panel_id == target_self_panel) return PanelClass::self;
  double d = (target - p.center).norm() - p.radius;
  return d < o.near_factor * p.size ? PanelClass::near : PanelClass::far;
}

inline void reject_on_surface_target(const SurfaceQuadrature& src, const Vec3& x) {
  for (const Panel& p : src.panels) {
    if ((x - p.center).norm() > p.radius + 1e-9) continue;
    for (int iu = 0; iu < p.nu; ++iu)
      for (int iv = 0; iv < p.nv; ++iv)
        if ((x - src.x[p.first_node + iu * p.nv + iv]).norm() < 1e-10)
          throw std::domain_error(
              "evaluate_potential: target on the surface; use the trace path");
  }
}

}  // namespace detail

/// Dense Nystrom matrix of a boundary operator: (A phi)_i approximates the
/// operator applied to the density interpolant at target node i. On-surface
/// assembly (target == source) routes the diagonal panel through the polar
/// rule and close panels through graded adaptive quadrature. The kind D is
/// assembled with its principal-value trace kernel, which coincides with K.
inline CMat assemble_operator(OpKind kind, const SurfaceQuadrature& target,
                              const SurfaceQuadrature& source, cplx k,
                              const NystromOptions& o = {}) {
  const bool same = (&target == &source);
  const int nt = target.size(), ns = source.size();
  CMat A(nt, ns);
  A.setZero();
  double Lu[64], Lv[64];
  for (int i = 0; i < nt; ++i) {
    const Vec3& xi = target.x[i];
    const Vec3& ni = target.nu[i];
    int self_panel = same ? target.node_panel[i] : -1;
    for (size_t pid = 0; pid < source.panels.size(); ++pid) {
      const Panel& p = source.panels[pid];
      auto cls = detail::classify(source, p, static_cast<int>(pid), xi, self_panel, o);
      if (cls == detail::PanelClass::far) {
        for (int iu = 0; iu < p.nu; ++iu)
          for (int iv = 0; iv < p.nv; ++iv) {
            int j = p.first_node + iu * p.nv + iv;
            A(i, j) += source.w[j] * detail::op_kernel(kind, k, xi, ni, source.x[j], source.nu[j]);
          }
      } else {
        auto cb = [&](double u, double v, const Vec3& y, const Vec3& nuy, double wq) {
          double r = (xi - y).norm();
          if (r < 1e-14) return;  // removable point mass of a weakly singular kernel
          cplx kv = wq * detail::op_kernel(kind, k, xi, ni, y, nuy);
          detail::panel_basis(p, u, v, Lu, Lv);
          for (int iu = 0; iu < p.nu; ++iu) {
            cplx klu = kv * Lu[iu];
            for (int iv = 0; iv < p.nv; ++iv) A(i, p.first_node + iu * p.nv + iv) += klu * Lv[iv];
          }
        };
        if (cls == detail::PanelClass::self)
          detail::self_points(source, p, target.node_u[i], target.node_v[i], o, cb);
        else
          detail::near_points(source, p, xi, o, cb);
      }
    }
  }
  return A;
}

/// Off-surface potential values (kinds S and D) at arbitrary targets.
/// Targets closer to the surface than ~machine scale are rejected; traces
/// belong to the on-surface assembly path.
inline CVec evaluate_potential(OpKind kind, const SurfaceQuadrature& source, const Density& dens,
                               const std::vector<Vec3>& targets, cplx k,
                               const NystromOptions& o = {}) {
  if (kind != OpKind::S && kind != OpKind::D)
    throw config_error("evaluate_potential: kind must be S or D");
  if (dens.surf != &source) throw config_error("evaluate_potential: density/surface mismatch");
  CVec out(targets.size());
  out.setZero();
  double Lu[64], Lv[64];
  for (size_t ti = 0; ti < targets.size(); ++ti) {
    const Vec3& xi = targets[ti];
    detail::reject_on_surface_target(source, xi);
    cplx acc = 0.0;
    for (size_t pid = 0; pid < source.panels.size(); ++pid) {
      const Panel& p = source.panels[pid];
      auto cls = detail::classify(source, p, static_cast<int>(pid), xi, -1, o);
      if (cls == detail::PanelClass::far) {
        for (int iu = 0; iu < p.nu; ++iu)
          for (int iv = 0; iv < p.nv; ++iv) {
            int j = p.first_node + iu * p.nv + iv;
            acc += source.w[j] *
                   detail::op_kernel(kind, k, xi, Vec3::Zero(), source.x[j], source.nu[j]) *
                   dens.values[j];
          }
      } else {
        detail::near_points(source, p, xi, o,
                            [&](double u, double v, const Vec3& y, const Vec3& nuy, double wq) {
                              double r = (xi - y).norm();
                              if (r < 1e-13)
                                throw std::domain_error(
                                    "evaluate_potential: target on the surface; use the trace path");
                              detail::panel_basis(p, u, v, Lu, Lv);
                              cplx f = 0.0;
                              for (int iu = 0; iu < p.nu; ++iu) {
                                cplx fu = 0.0;
                                for (int iv = 0; iv < p.nv; ++iv)
                                  fu += Lv[iv] * dens.values[p.first_node + iu * p.nv + iv];
                                f += Lu[iu] * fu;
                              }
                              acc += wq * detail::op_kernel(kind, k, xi, Vec3::Zero(), y, nuy) * f;
                            });
      }
    }
    out[ti] = acc;
  }
  return out;
}

/// Dense evaluation matrix of the S potential at fixed off-surface targets;
/// one assembly serves many densities.
inline CMat potential_matrix(OpKind kind, const SurfaceQuadrature& source,
                             const std::vector<Vec3>& targets, cplx k,
                             const NystromOptions& o = {}) {
  if (kind != OpKind::S && kind != OpKind::D)
    throw config_error("potential_matrix: kind must be S or D");
  CMat A(targets.size(), source.size());
  A.setZero();
  double Lu[64], Lv[64];
  for (size_t ti = 0; ti < targets.size(); ++ti) {
    const Vec3& xi = targets[ti];
    for (size_t pid = 0; pid < source.panels.size(); ++pid) {
      const Panel& p = source.panels[pid];
      auto cls = detail::classify(source, p, static_cast<int>(pid), xi, -1, o);
      if (cls == detail::PanelClass::far) {
        for (int iu = 0; iu < p.nu; ++iu)
          for (int iv = 0; iv < p.nv; ++iv) {
            int j = p.first_node + iu * p.nv + iv;
            A(ti, j) +=
                source.w[j] * detail::op_kernel(kind, k, xi, Vec3::Zero(), source.x[j], source.nu[j]);
          }
      } else {
        detail::near_points(source, p, xi, o,
                            [&](double u, double v, const Vec3& y, const Vec3& nuy, double wq) {
                              cplx kv = wq * detail::op_kernel(kind, k, xi, Vec3::Zero(), y, nuy);
                              detail::panel_basis(p, u, v, Lu, Lv);
                              for (int iu = 0; iu < p.nu; ++iu) {
                                cplx klu = kv * Lu[iu];
                                for (int iv = 0; iv < p.nv; ++iv)
                                  A(ti, p.first_node + iu * p.nv + iv) += klu * Lv[iv];
                              }
                            });
      }
    }
  }
  return A;
}

/// Gradient of the S or D potential at off-surface targets.
inline std::vector<CVec3> evaluate_potential_grad(OpKind kind, const SurfaceQuadrature& source,
                                                  const Density& dens,
                                                  const std::vector<Vec3>& targets, cplx k,
                                                  const NystromOptions& o = {}) {
  if (kind != OpKind::S && kind != OpKind::D)
    throw config_error("evaluate_potential_grad: kind must be S or D");
  std::vector<CVec3> out(targets.size(), CVec3::Zero());
  double Lu[64], Lv[64];
  auto gker = [kind, k](const Vec3& x, const Vec3& y, const Vec3& nuy) -> CVec3 {
    return kind == OpKind::S ? detail::grad_kernel(k, x, y) : detail::grad_dlp_kernel(k, x, y, nuy);
  };
  for (size_t ti = 0; ti < targets.size(); ++ti) {
    const Vec3& xi = targets[ti];
    detail::reject_on_surface_target(source, xi);
    CVec3 acc = CVec3::Zero();
    for (size_t pid = 0; pid < source.panels.size(); ++pid) {
      const Panel& p = source.panels[pid];
      auto cls = detail::classify(source, p, static_cast<int>(pid), xi, -1, o);
      if (cls == detail::PanelClass::far) {
        for (int iu = 0; iu < p.nu; ++iu)
          for (int iv = 0; iv < p.nv; ++iv) {
            int j = p.first_node + iu * p.nv + iv;
            acc += (source.w[j] * dens.values[j]) * gker(xi, source.x[j], source.nu[j]);
          }
      } else {
        detail::near_points(source, p, xi, o,
                            [&](double u, double v, const Vec3& y, const Vec3& nuy, double wq) {
                              detail::panel_basis(p, u, v, Lu, Lv);
                              cplx f = 0.0;
                              for (int iu = 0; iu < p.nu; ++iu) {
                                cplx fu = 0.0;
                                for (int iv = 0; iv < p.nv; ++iv)
                                  fu += Lv[iv] * dens.values[p.first_node + iu * p.nv + iv];
                                f += Lu[iu] * fu;
                              }
                              acc += (wq * f) * gker(xi, y, nuy);
                            });
      }
    }
    out[ti] = acc;
  }
  return out;
}

/// Far-field coefficient of e^{i omega |x|}/|x| of the single-layer field:
/// u_inf(xhat) = -(1/4pi) sum_j e^{-i omega xhat.x_j} phi_j w_j.
inline FarField far_field(const SurfaceQuadrature& source, const Density& dens, double omega,
                          const std::vector<Vec3>& dirs) {
  if (dens.surf != &source) throw config_error("far_field: density/surface mismatch");
  if (omega <= 0) throw config_error("far_field: omega must be > 0");
  FarField f;
  f.dirs = dirs;
  f.u.resize(dirs.size());
  for (size_t kdir = 0; kdir < dirs.size(); ++kdir) {
    cplx acc = 0.0;
    for (int j = 0; j < source.size(); ++j)
      acc += std::exp(-iu * omega * dirs[kdir].dot(source.x[j])) * dens.values[j] * source.w[j];
    f.u[kdir] = -acc / (4.0 * pi);
  }
  return f;
}

/// Far field with the phase evaluated through the degree-1 spherical-harmonic
/// addition sum (the small-source screen kernel); agrees with far_field to
/// O((omega diam)^2) on small sources.
inline FarField far_field_first_order(const SurfaceQuadrature& source, const Density& dens,
                                      double omega, const std::vector<Vec3>& dirs) {
  if (dens.surf != &source) throw config_error("far_field_first_order: density/surface mismatch");
  FarField f;
  f.dirs = dirs;
  f.u.resize(dirs.size());
  for (size_t kdir = 0; kdir < dirs.size(); ++kdir) {
    cplx acc = 0.0;
    for (int j = 0; j < source.size(); ++j) {
      double ry = source.x[j].norm();
      cplx phase = 0.0;
      if (ry > 1e-14) phase = y1_addition(dirs[kdir], source.x[j] / ry) * ry;
      acc += std::exp(-iu * omega * phase) * dens.values[j] * source.w[j];
    }
    f.u[kdir] = -acc / (4.0 * pi);
  }
  return f;
}

}  // namespace thinscat
