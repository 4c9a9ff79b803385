#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "thinscat/common.hpp"

namespace thinscat {

struct CurveFrame {
  Vec3 T, N1, N2;  // unit tangent and an orthonormal basis of the normal plane
};

/// Simple non-closed arc-length-parametrized generator curve with a
/// rotation-minimizing frame. Frenet frames degenerate on straight pieces,
/// so the frame is transported from the configured reference normal at t=0;
/// the built-in segment/arc curves carry closed-form frames.
class GeneratingCurve {
 public:
  static GeneratingCurve segment(const Vec3& p0, const Vec3& q0, Vec3 ref_normal = Vec3(1, 0, 0)) {
    GeneratingCurve c;
    Vec3 t = q0 - p0;
    c.len_ = t.norm();
    if (c.len_ <= 0) throw geometry_error("segment: endpoints coincide");
    t /= c.len_;
    ref_normal -= ref_normal.dot(t) * t;
    if (ref_normal.norm() < 1e-12) ref_normal = t.unitOrthogonal();
    Vec3 n1 = ref_normal.normalized();
    Vec3 n2 = t.cross(n1);
    c.pos_ = [p0, t](double s) { return Vec3(p0 + s * t); };
    c.frame_ = [t, n1, n2](double) { return CurveFrame{t, n1, n2}; };
    c.dtan_ = [](double) { return Vec3::Zero(); };
    c.r0_ = 1e30;
    c.straight_ = true;
    return c;
  }

  /// Circular arc of radius R in the plane spanned by (ex, ey) about center;
  /// arc length runs over angle [ang0, ang0 + len/R]. N1 points toward the
  /// center (in-plane), which is the rotation-minimizing transport for a
  /// planar curve seeded in-plane.
  static GeneratingCurve arc(const Vec3& center, double R, const Vec3& ex_, const Vec3& ey_,
                             double ang0, double ang1) {
    if (R <= 0 || ang1 <= ang0) throw geometry_error("arc: bad parameters");
    GeneratingCurve c;
    Vec3 ex = ex_.normalized();
    Vec3 ey = (ey_ - ey_.dot(ex) * ex).normalized();
    c.len_ = R * (ang1 - ang0);
    c.pos_ = [=](double s) {
      double a = ang0 + s / R;
      return Vec3(center + R * (std::cos(a) * ex + std::sin(a) * ey));
    };
    c.frame_ = [=](double s) {
      double a = ang0 + s / R;
      Vec3 T = -std::sin(a) * ex + std::cos(a) * ey;
      Vec3 N1 = -(std::cos(a) * ex + std::sin(a) * ey);  // toward center
      return CurveFrame{T, N1, T.cross(N1)};
    };
    c.dtan_ = [=](double s) {
      double a = ang0 + s / R;
      return Vec3((-std::cos(a) * ex - std::sin(a) * ey) / R);
    };
    c.r0_ = (ang1 - ang0 < pi) ? R : R * std::sqrt(2.0 * (1.0 + std::cos((ang1 - ang0) / 2)));
    c.r0_ = std::min(c.r0_, R);
    return c;
  }

  /// Generic curve from a position map on [0,L]; frame by double-reflection
  /// rotation-minimizing transport on a fine grid.
  static GeneratingCurve from_position_map(std::function<Vec3(double)> pos, double L,
                                           Vec3 ref_normal = Vec3(1, 0, 0), int n_grid = 2048) {
    if (L <= 0) throw geometry_error("from_position_map: L must be > 0");
    GeneratingCurve c;
    c.len_ = L;
    c.pos_ = pos;
    double h = L / n_grid;
    auto tangent = [pos, L](double s) {
      double hh = std::max(1e-7, L * 1e-7);
      double a = std::max(0.0, s - hh), b = std::min(L, s + hh);
      return Vec3(((pos(b) - pos(a)) / (b - a)).normalized());
    };
    // Double-reflection transport of the seed normal along the sample grid.
    std::vector<CurveFrame> fr(n_grid + 1);
    Vec3 t0 = tangent(0.0);
    Vec3 n = ref_normal - ref_normal.dot(t0) * t0;
    if (n.norm() < 1e-12) n = t0.unitOrthogonal();
    fr[0] = CurveFrame{t0, n.normalized(), t0.cross(n.normalized())};
    for (int i = 1; i <= n_grid; ++i) {
      double s0 = (i - 1) * h, s1 = i * h;
      Vec3 x0 = pos(s0), x1 = pos(s1);
      Vec3 T0 = fr[i - 1].T, T1 = tangent(s1);
      Vec3 v1 = x1 - x0;
      double c1 = v1.squaredNorm();
      Vec3 rL = fr[i - 1].N1 - (2.0 / c1) * v1.dot(fr[i - 1].N1) * v1;
      Vec3 tL = T0 - (2.0 / c1) * v1.dot(T0) * v1;
      Vec3 v2 = T1 - tL;
      double c2 = v2.squaredNorm();
      Vec3 N1 = c2 > 1e-28 ? Vec3(rL - (2.0 / c2) * v2.dot(rL) * v2) : rL;
      N1 = (N1 - N1.dot(T1) * T1).normalized();
      fr[i] = CurveFrame{T1, N1, T1.cross(N1)};
    }
    auto grid = std::make_shared<std::vector<CurveFrame>>(std::move(fr));
    c.frame_ = [grid, h, L, tangent, n_grid](double s) {
      int i = std::min(n_grid, std::max(0, static_cast<int>(std::lround(s / h))));
      // one local double-reflection step from the nearest grid sample
      CurveFrame f = (*grid)[i];
      Vec3 T1 = tangent(s);
      Vec3 N1 = (f.N1 - f.N1.dot(T1) * T1).normalized();
      return CurveFrame{T1, N1, T1.cross(N1)};
    };
    c.dtan_ = [tangent, L](double s) {
      double hh = std::max(1e-5, L * 1e-5);
      double a = std::max(0.0, s - hh), b = std::min(L, s + hh);
      return Vec3((tangent(b) - tangent(a)) / (b - a));
    };
    c.estimate_r0(512);
    return c;
  }

  double length() const { return len_; }
  Vec3 p0() const { return pos_(0.0); }
  Vec3 q0() const { return pos_(len_); }
  bool straight() const { return straight_; }
  double r0() const { return r0_; }

  Vec3 position(double t) const {
    check(t);
    return pos_(t);
  }
  CurveFrame frame(double t) const {
    check(t);
    return frame_(t);
  }
  Vec3 dtangent(double t) const {  // curvature vector T'(t)
    check(t);
    return dtan_(t);
  }

  /// Nearest-point parameter on the curve (dense sampling + local refinement).
  double project(const Vec3& y, int n_coarse = 256) const {
    double best = 0.0, bd = (pos_(0.0) - y).squaredNorm();
    for (int i = 1; i <= n_coarse; ++i) {
      double t = len_ * i / n_coarse;
      double d = (pos_(t) - y).squaredNorm();
      if (d < bd) {
        bd = d;
        best = t;
      }
    }
    double lo = std::max(0.0, best - len_ / n_coarse);
    double hi = std::min(len_, best + len_ / n_coarse);
    for (int it = 0; it < 60; ++it) {  // golden-section refinement
      double m1 = lo + 0.382 * (hi - lo), m2 = lo + 0.618 * (hi - lo);
      if ((pos_(m1) - y).squaredNorm() < (pos_(m2) - y).squaredNorm())
        hi = m2;
      else
        lo = m1;
    }
    return 0.5 * (lo + hi);
  }

 private:
  void check(double t) const {
    if (t < -1e-12 || t > len_ + 1e-12)
      throw std::domain_error("GeneratingCurve: parameter outside [0,L]");
  }

  // Conservative non-self-intersection radius: curvature bound combined with
  // half the minimal distance between samples that are far apart in arc length.
  void estimate_r0(int n) {
    double kmax = 0.0;
    std::vector<Vec3> xs(n + 1);
    for (int i = 0; i <= n; ++i) {
      double t = len_ * i / n;
      xs[i] = pos_(t);
      kmax = std::max(kmax, dtan_(t).norm());
    }
    double r = kmax > 1e-12 ? 1.0 / kmax : 1e30;
    double sep = kmax > 1e-12 ? std::min(len_, pi / kmax) : len_;
    for (int i = 0; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        if ((j - i) * len_ / n >= sep) r = std::min(r, (xs[i] - xs[j]).norm() / 2.0);
    r0_ = r;
  }

  std::function<Vec3(double)> pos_;
  std::function<CurveFrame(double)> frame_;
  std::function<Vec3(double)> dtan_;
  double len_ = 0.0;
  double r0_ = 0.0;
  bool straight_ = false;
};

inline std::pair<Vec3, CurveFrame> curve_eval(const GeneratingCurve& c, double t) {
  return {c.position(t), c.frame(t)};
}

}  // namespace thinscat
