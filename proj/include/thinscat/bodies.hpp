#pragma once

#include <memory>

#include "thinscat/curve.hpp"
#include "thinscat/surface.hpp"

namespace thinscat {

// ---------------------------------------------------------------------------
// body parameter blocks

struct TubeGeometry {
  GeneratingCurve curve;
  double delta = 0.1;
  int n_t = 20;        // Gauss-Legendre panels along the curve
  int q_t = 4;         // nodes per t-panel
  int n_theta = 12;    // periodic-trapezoid nodes around
  int cap_panels = 2;  // GL panels in the cap polar angle
  int q_cap = 4;
  int seam_grading = 3;  // dyadic panel grading toward the facade/cap seams
};

struct ScreenGeometry {
  double side = 1.0;    // Gamma_0 is the centered square of this side in {x3=0}
  double delta = 0.05;  // half-thickness
  int n_face = 6;       // GL panels per direction on each flat face
  int q_face = 4;
  int n_edge = 6;       // panels along each side half-cylinder
  int n_beta = 2;       // panels across the half-cylinder angle
  int q_side = 4;
  int n_corner = 2;     // panels per direction on each quarter-sphere
  int q_corner = 4;
};

struct SphereGeometry {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  int n_phi = 8;  // GL panels in the polar angle
  int q_phi = 4;
  int n_theta = 24;
};

// ---------------------------------------------------------------------------
// projection onto the generating set and the blow-up map

inline Vec3 project_to_generator(const TubeGeometry& g, const Vec3& y) {
  const auto& c = g.curve;
  double t;
  if (g.curve.straight()) {
    Vec3 T = c.frame(0).T;
    t = (y - c.p0()).dot(T);
  } else {
    t = c.project(y);
  }
  if (t <= 0.0) return c.p0();
  if (t >= c.length()) return c.q0();
  return c.position(t);
}

inline Vec3 project_to_generator(const ScreenGeometry& g, const Vec3& y) {
  double h = g.side / 2;
  auto clamp = [h](double v) { return std::min(h, std::max(-h, v)); };
  return Vec3(clamp(y.x()), clamp(y.y()), 0.0);
}

/// Blow-up A(y) = z_y + (y - z_y)/delta mapping the closure of D_delta onto
/// the unit-scale body, together with its (symmetric) Jacobian.
inline std::pair<Vec3, Mat3> blowup(const TubeGeometry& g, const Vec3& y) {
  const auto& c = g.curve;
  double t = g.curve.straight() ? (y - c.p0()).dot(c.frame(0).T) : c.project(y);
  Vec3 z;
  Mat3 B;
  if (t <= 0.0 || t >= c.length()) {
    z = (t <= 0.0) ? c.p0() : c.q0();
    B = Mat3::Identity() / g.delta;
  } else {
    z = c.position(t);
    Vec3 T = c.frame(t).T;
    B = Mat3::Identity() / g.delta - (1.0 / g.delta - 1.0) * (T * T.transpose());
  }
  if ((y - z).norm() > g.delta * (1.0 + 1e-9))
    throw std::domain_error("blowup: point outside the body closure");
  return {z + (y - z) / g.delta, B};
}

inline std::pair<Vec3, Mat3> blowup(const ScreenGeometry& g, const Vec3& y) {
  double h = g.side / 2;
  Vec3 z = project_to_generator(g, y);
  if ((y - z).norm() > g.delta * (1.0 + 1e-9))
    throw std::domain_error("blowup: point outside the body closure");
  bool cx = std::abs(y.x()) >= h, cy = std::abs(y.y()) >= h;
  Mat3 B;
  if (cx && cy) {
    B = Mat3::Identity() / g.delta;
  } else if (!cx && !cy) {
    B = Mat3::Identity();
    B(2, 2) = 1.0 / g.delta;
  } else {
    Vec3 e = cx ? Vec3(0, 1, 0) : Vec3(1, 0, 0);  // unclamped in-plane direction
    B = Mat3::Identity() / g.delta + (1.0 - 1.0 / g.delta) * (e * e.transpose());
  }
  return {z + (y - z) / g.delta, B};
}

/// Inverse of the blow-up (the rescaled body shares the generating set).
template <class Geom>
inline Vec3 blowdown(const Geom& g, const Vec3& ytilde) {
  Vec3 z = project_to_generator(g, ytilde);
  return z + g.delta * (ytilde - z);
}

// ---------------------------------------------------------------------------
// surface builders

namespace detail {

inline RVec bary_weights(const RVec& xn) {
  int n = static_cast<int>(xn.size());
  RVec w(n);
  for (int i = 0; i < n; ++i) {
    double p = 1.0;
    for (int j = 0; j < n; ++j)
      if (j != i) p *= (xn[i] - xn[j]);
    w[i] = 1.0 / p;
  }
  return w;
}

struct PanelAxis {  // one GL panel on [a,b]
  double a, b;
  RVec xn, wn;
};

inline std::vector<PanelAxis> panels_from_breaks(const std::vector<double>& br, int q) {
  std::vector<PanelAxis> out;
  QuadratureRule base = gauss_legendre(q);
  for (size_t p = 0; p + 1 < br.size(); ++p) {
    QuadratureRule m = map_rule(base, br[p], br[p + 1]);
    out.push_back(PanelAxis{br[p], br[p + 1], m.x, m.w});
  }
  return out;
}

/// Uniform breakpoints with optional dyadic grading of the first/last panel
/// toward an endpoint; used to resolve densities that lose smoothness at
/// patch seams.
inline std::vector<double> graded_breaks(double a, double b, int n_panels, int grade_a,
                                         int grade_b) {
  std::vector<double> br;
  double h = (b - a) / n_panels;
  if (grade_a > 0)
    for (int l = grade_a; l >= 1; --l) br.push_back(a + h / std::pow(2.0, l));
  for (int p = 1; p < n_panels; ++p) br.push_back(a + p * h);
  if (grade_b > 0)
    for (int l = 1; l <= grade_b; ++l) br.push_back(b - h / std::pow(2.0, l));
  br.insert(br.begin(), a);
  br.push_back(b);
  return br;
}

inline std::vector<PanelAxis> gl_panels(double a, double b, int n_panels, int q) {
  return panels_from_breaks(graded_breaks(a, b, n_panels, 0, 0), q);
}

/// Adds one tensor panel (u-panel x v-rule) on chart `chart` of `s`,
/// evaluating node data through the chart and the supplied per-node filler.
template <class Filler>
inline void add_panel(SurfaceQuadrature& s, int chart, const PanelAxis& up, const RVec& vn,
                      const RVec& vw, double v0, double v1, bool v_periodic, Filler&& fill) {
  Panel p;
  p.chart = chart;
  p.u0 = up.a;
  p.u1 = up.b;
  p.v0 = v0;
  p.v1 = v1;
  p.nu = static_cast<int>(up.xn.size());
  p.nv = static_cast<int>(vn.size());
  p.first_node = s.size();
  p.v_periodic = v_periodic;
  p.un = up.xn;
  p.vn = vn;
  p.ubw = bary_weights(up.xn);
  if (!v_periodic) p.vbw = bary_weights(vn);
  int pid = static_cast<int>(s.panels.size());
  for (int iu = 0; iu < p.nu; ++iu)
    for (int iv = 0; iv < p.nv; ++iv) {
      Vec3 xx, nn;
      double jac;
      s.charts[chart].eval(up.xn[iu], vn[iv], xx, nn, jac);
      s.x.push_back(xx);
      s.nu.push_back(nn);
      s.w.push_back(up.wn[iu] * vw[iv] * jac);
      s.node_panel.push_back(pid);
      s.node_u.push_back(up.xn[iu]);
      s.node_v.push_back(vn[iv]);
      fill(xx, up.xn[iu], vn[iv]);
    }
  s.panels.push_back(std::move(p));
}

}  // namespace detail

/// Boundary quadrature of the tube D_delta around the generating curve with
/// hemispherical caps. Facade nodes form an exact n_t*q_t x n_theta product
/// grid; the rescaled twin x~ = A(x) and the Jacobian B are attached per node.
inline SurfaceQuadrature build_tube_surface(const TubeGeometry& g) {
  if (g.delta <= 0) throw geometry_error("build_tube_surface: delta must be > 0");
  if (g.delta > g.curve.r0())
    throw geometry_error("build_tube_surface: delta exceeds the non-self-intersection radius");
  if (g.n_theta < 8) throw config_error("build_tube_surface: n_theta >= 8 required");
  if (g.n_t < 1 || g.q_t < 2 || g.cap_panels < 1 || g.q_cap < 2)
    throw config_error("build_tube_surface: degenerate resolution");

  auto curve = std::make_shared<GeneratingCurve>(g.curve);
  const double delta = g.delta;
  const double L = curve->length();

  SurfaceQuadrature s;
  s.body = BodyKind::tube;
  s.delta = delta;

  // chart 0: facade (u=t, v=theta)
  s.charts.push_back(Chart{[curve, delta](double t, double th, Vec3& xx, Vec3& nn, double& jac) {
    CurveFrame f = curve->frame(t);
    Vec3 nhat = std::cos(th) * f.N1 + std::sin(th) * f.N2;
    xx = curve->position(t) + delta * nhat;
    nn = nhat;
    jac = delta * (1.0 - delta * curve->dtangent(t).dot(nhat));
  }});
  // charts 1,2: caps around P0 (pole -T(0)) and Q0 (pole +T(L)), (u=phi, v=theta)
  for (int cap = 0; cap < 2; ++cap) {
    double tend = cap == 0 ? 0.0 : L;
    double sgn = cap == 0 ? -1.0 : 1.0;
    Vec3 pe = cap == 0 ? curve->p0() : curve->q0();
    s.charts.push_back(
        Chart{[curve, delta, tend, sgn, pe](double phi, double th, Vec3& xx, Vec3& nn, double& jac) {
          CurveFrame f = curve->frame(tend);
          Vec3 nhat = std::cos(th) * f.N1 + std::sin(th) * f.N2;
          Vec3 u = std::sin(phi) * nhat + sgn * std::cos(phi) * f.T;
          xx = pe + delta * u;
          nn = u;
          jac = delta * delta * std::sin(phi);
        }});
  }

  QuadratureRule thr = periodic_trapezoid(g.n_theta);
  auto tp = detail::panels_from_breaks(
      detail::graded_breaks(0.0, L, g.n_t, g.seam_grading, g.seam_grading), g.q_t);
  for (const auto& up : tp)
    detail::add_panel(s, 0, up, thr.x, thr.w, 0.0, 2.0 * pi, true,
                      [&](const Vec3& xx, double t, double) {
                        Vec3 zz = curve->position(t);
                        Vec3 T = curve->frame(t).T;
                        s.tag.push_back(PatchTag::facade);
                        s.z.push_back(zz);
                        s.xt.push_back(zz + (xx - zz) / delta);
                        s.B.push_back(Mat3::Identity() / delta -
                                      (1.0 / delta - 1.0) * (T * T.transpose()));
                      });
  for (int cap = 0; cap < 2; ++cap) {
    auto pp = detail::panels_from_breaks(
        detail::graded_breaks(0.0, pi / 2, g.cap_panels, 0, g.seam_grading), g.q_cap);
    Vec3 pe = cap == 0 ? curve->p0() : curve->q0();
    for (const auto& up : pp)
      detail::add_panel(s, 1 + cap, up, thr.x, thr.w, 0.0, 2.0 * pi, true,
                        [&](const Vec3& xx, double, double) {
                          s.tag.push_back(cap == 0 ? PatchTag::capA : PatchTag::capB);
                          s.z.push_back(pe);
                          s.xt.push_back(pe + (xx - pe) / delta);
                          s.B.push_back(Mat3::Identity() / delta);
                        });
  }
  s.finalize();
  return s;
}

/// Boundary quadrature of the screen-like slab: flat faces S0, side
/// half-cylinders S1, corner quarter-spheres S2.
inline SurfaceQuadrature build_screen_surface(const ScreenGeometry& g) {
  // The rounded slab is embedded for any delta > 0; the thin regime
  // delta < side/2 is a solver-level requirement, not a geometric one
  // (the rescaled reference body has delta = 1).
  if (g.delta <= 0 || g.side <= 0)
    throw geometry_error("build_screen_surface: need side > 0 and delta > 0");
  if (g.n_face < 1 || g.q_face < 2 || g.n_edge < 1 || g.n_beta < 1 || g.q_side < 2 ||
      g.n_corner < 1 || g.q_corner < 2)
    throw config_error("build_screen_surface: degenerate resolution");

  const double h = g.side / 2, delta = g.delta;
  SurfaceQuadrature s;
  s.body = BodyKind::screen;
  s.delta = delta;

  auto fill = [&](PatchTag t) {
    return [&s, &g, t](const Vec3& xx, double, double) {
      s.tag.push_back(t);
      auto [xt, B] = blowup(g, xx);
      s.z.push_back(project_to_generator(g, xx));
      s.xt.push_back(xt);
      s.B.push_back(B);
    };
  };

  // faces (charts 0,1)
  for (int f = 0; f < 2; ++f) {
    double sg = f == 0 ? 1.0 : -1.0;
    s.charts.push_back(Chart{[sg, delta](double u, double v, Vec3& xx, Vec3& nn, double& jac) {
      xx = Vec3(u, v, sg * delta);
      nn = Vec3(0, 0, sg);
      jac = 1.0;
    }});
    auto up = detail::gl_panels(-h, h, g.n_face, g.q_face);
    auto vp = detail::gl_panels(-h, h, g.n_face, g.q_face);
    for (const auto& pu : up)
      for (const auto& pv : vp)
        detail::add_panel(s, f, pu, pv.xn, pv.wn, pv.a, pv.b, false, fill(PatchTag::s0));
  }

  // four side half-cylinders (charts 2..5); u runs along the edge
  struct Edge {
    Vec3 e;     // edge direction
    Vec3 out;   // outward in-plane normal
    Vec3 base;  // edge line base point
  };
  const Edge edges[4] = {{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, h, 0)},
                         {Vec3(1, 0, 0), Vec3(0, -1, 0), Vec3(0, -h, 0)},
                         {Vec3(0, 1, 0), Vec3(1, 0, 0), Vec3(h, 0, 0)},
                         {Vec3(0, 1, 0), Vec3(-1, 0, 0), Vec3(-h, 0, 0)}};
  for (const auto& ed : edges) {
    Vec3 e = ed.e, out = ed.out, base = ed.base;
    s.charts.push_back(
        Chart{[e, out, base, delta](double u, double beta, Vec3& xx, Vec3& nn, double& jac) {
          Vec3 dir = std::cos(beta) * out + std::sin(beta) * Vec3(0, 0, 1);
          xx = base + u * e + delta * dir;
          nn = dir;
          jac = delta;
        }});
    int chart = static_cast<int>(s.charts.size()) - 1;
    auto up = detail::gl_panels(-h, h, g.n_edge, g.q_side);
    auto bp = detail::gl_panels(-pi / 2, pi / 2, g.n_beta, g.q_side);
    for (const auto& pu : up)
      for (const auto& pb : bp)
        detail::add_panel(s, chart, pu, pb.xn, pb.wn, pb.a, pb.b, false, fill(PatchTag::s1));
  }

  // four corner quarter-spheres (charts 6..9); u=phi sweeps between the two
  // outward edge normals, v=psi is the elevation
  for (int sx = -1; sx <= 1; sx += 2)
    for (int sy = -1; sy <= 1; sy += 2) {
      Vec3 c(sx * h, sy * h, 0.0);
      Vec3 u1(sx, 0, 0), u2(0, sy, 0);
      s.charts.push_back(
          Chart{[c, u1, u2, delta](double phi, double psi, Vec3& xx, Vec3& nn, double& jac) {
            Vec3 dir = std::cos(psi) * (std::cos(phi) * u1 + std::sin(phi) * u2) +
                       std::sin(psi) * Vec3(0, 0, 1);
            xx = c + delta * dir;
            nn = dir;
            jac = delta * delta * std::cos(psi);
          }});
      int chart = static_cast<int>(s.charts.size()) - 1;
      auto pp = detail::gl_panels(0.0, pi / 2, g.n_corner, g.q_corner);
      auto sp = detail::gl_panels(-pi / 2, pi / 2, g.n_corner, g.q_corner);
      for (const auto& pu : pp)
        for (const auto& pv : sp)
          detail::add_panel(s, chart, pu, pv.xn, pv.wn, pv.a, pv.b, false, fill(PatchTag::s2));
    }

  s.finalize();
  return s;
}

inline SurfaceQuadrature build_sphere_surface(const SphereGeometry& g) {
  if (g.radius <= 0) throw geometry_error("build_sphere_surface: radius must be > 0");
  if (g.n_theta < 8 || g.n_phi < 1 || g.q_phi < 2)
    throw config_error("build_sphere_surface: degenerate resolution");
  SurfaceQuadrature s;
  s.body = BodyKind::sphere;
  s.delta = g.radius;
  Vec3 c = g.center;
  double a = g.radius;
  s.charts.push_back(Chart{[c, a](double phi, double th, Vec3& xx, Vec3& nn, double& jac) {
    Vec3 dir(std::sin(phi) * std::cos(th), std::sin(phi) * std::sin(th), std::cos(phi));
    xx = c + a * dir;
    nn = dir;
    jac = a * a * std::sin(phi);
  }});
  QuadratureRule thr = periodic_trapezoid(g.n_theta);
  auto pp = detail::gl_panels(0.0, pi, g.n_phi, g.q_phi);
  for (const auto& up : pp)
    detail::add_panel(s, 0, up, thr.x, thr.w, 0.0, 2.0 * pi, true,
                      [&](const Vec3& xx, double, double) {
                        s.tag.push_back(PatchTag::sphere);
                        s.z.push_back(c);
                        s.xt.push_back(xx);
                        s.B.push_back(Mat3::Identity());
                      });
  s.finalize();
  return s;
}

}  // namespace thinscat
