#pragma once

#include <vector>

#include "thinscat/curve.hpp"
#include "thinscat/density.hpp"
#include "thinscat/directions.hpp"
#include "thinscat/linalg.hpp"
#include "thinscat/quadrature.hpp"
#include "thinscat/special.hpp"

namespace thinscat {

// ---------------------------------------------------------------------------
// curve and flat-panel quadratures for the reduced (asymptotic) operators

/// Arc-length quadrature of the generating curve with frames and theta-ring
/// sampling for ring-resolved densities.
struct CurveQuadrature {
  GeneratingCurve curve;
  RVec t, wt;                   // arc-length nodes and weights
  std::vector<Vec3> z;          // curve points
  std::vector<CurveFrame> fr;   // frames at the nodes
  std::vector<Vec3> dT;         // curvature vectors
  int n_theta = 12;

  int n() const { return static_cast<int>(t.size()); }
  double length() const { return curve.length(); }
};

inline CurveQuadrature make_curve_quadrature(const GeneratingCurve& c, int n_panels, int q,
                                             int n_theta) {
  CurveQuadrature cq;
  cq.curve = c;
  QuadratureRule r = panel_rule(0.0, c.length(), n_panels, q);
  cq.t = r.x;
  cq.wt = r.w;
  cq.n_theta = n_theta;
  for (int i = 0; i < r.n(); ++i) {
    cq.z.push_back(c.position(r.x[i]));
    cq.fr.push_back(c.frame(r.x[i]));
    cq.dT.push_back(c.dtangent(r.x[i]));
  }
  return cq;
}

/// Tensor Gauss-Legendre rule on the flat generating square (side x side,
/// centered in the {x3=0} plane).
struct PanelQuadrature {
  std::vector<Vec3> z;
  RVec w;
  double side = 1.0;
  int n() const { return static_cast<int>(z.size()); }
};

inline PanelQuadrature make_panel_quadrature(double side, int n_panels, int q) {
  PanelQuadrature pq;
  pq.side = side;
  QuadratureRule r = panel_rule(-side / 2, side / 2, n_panels, q);
  pq.w.resize(r.n() * r.n());
  for (int i = 0; i < r.n(); ++i)
    for (int j = 0; j < r.n(); ++j) {
      pq.z.emplace_back(r.x[i], r.x[j], 0.0);
      pq.w[i * r.n() + j] = r.w[i] * r.w[j];
    }
  return pq;
}

// ---------------------------------------------------------------------------
// thin sound-hard tube: leading-order far field

struct CapInfo {
  // integral of the outward normal over each rescaled cap; for the default
  // hemispherical caps this is -pi T(0) and +pi T(L)
  double normal_moment = pi;
};

/// Leading (delta^2) far-field coefficient of the scattered wave of a thin
/// sound-hard tube: facade dipole term, facade Laplacian term and the cap
/// term, reduced to curve quadratures with analytic theta rings.
inline cplx thin_soundhard_farfield(const CurveQuadrature& cq, const CapInfo& cap, double delta,
                                    double omega, const Vec3& d, const Vec3& xhat) {
  if (std::abs(d.norm() - 1.0) > 1e-12 || std::abs(xhat.norm() - 1.0) > 1e-12)
    throw config_error("thin_soundhard_farfield: directions must be unit vectors");
  QuadratureRule th = periodic_trapezoid(cq.n_theta);
  cplx facade = 0.0;
  for (int i = 0; i < cq.n(); ++i) {
    const Vec3& z = cq.z[i];
    cplx uiz = plane_wave(omega, d, z);
    cplx phase = std::exp(-iu * omega * xhat.dot(z)) * uiz;
    const Vec3 T = cq.fr[i].T;
    Vec3 xperp = xhat - xhat.dot(T) * T;  // normal-plane projections
    Vec3 dperp = d - d.dot(T) * T;
    cplx ring1 = 0.0, ring2 = 0.0;
    for (int j = 0; j < th.n(); ++j) {
      Vec3 nhat = std::cos(th.x[j]) * cq.fr[i].N1 + std::sin(th.x[j]) * cq.fr[i].N2;
      double metric = 1.0 - cq.dT[i].dot(nhat);  // unit-tube ring measure
      ring1 += th.w[j] * metric * (xperp.dot(nhat)) * (iu * omega * dperp.dot(nhat));
      ring2 += th.w[j] * metric;
    }
    // 2 delta^2 * grad_l G . (y-z) nu . grad u^i   with ff[grad_l G . m] =
    // (i omega /4pi) e^{-i omega xhat.z} <P_N xhat, m>
    facade += cq.wt[i] * phase * (2.0 * (iu * omega / (4.0 * pi)) * ring1);
    // - delta^2 * G * Delta_l u^i  with Delta_l u^i = -omega^2 |P_N d|^2 u^i
    facade += cq.wt[i] * phase * (-(omega * omega) * dperp.squaredNorm() / (4.0 * pi)) * ring2;
  }
  // cap term: - delta^2 G * nu . grad u^i summed over the two rescaled caps,
  // using int_cap nu dsigma = -pi T(0) / +pi T(L)
  const GeneratingCurve& c = cq.curve;
  Vec3 T0 = c.frame(0.0).T, TL = c.frame(c.length()).T;
  cplx capterm =
      (iu * omega / (4.0 * pi)) *
      (std::exp(-iu * omega * xhat.dot(c.p0())) * plane_wave(omega, d, c.p0()) *
           (-cap.normal_moment) * T0.dot(d) +
       std::exp(-iu * omega * xhat.dot(c.q0())) * plane_wave(omega, d, c.q0()) *
           (cap.normal_moment) * TL.dot(d));
  return delta * delta * (facade + capterm);
}

inline FarField thin_soundhard_farfield_grid(const CurveQuadrature& cq, const CapInfo& cap,
                                             double delta, double omega, const Vec3& d,
                                             const std::vector<Vec3>& dirs) {
  FarField f;
  f.dirs = dirs;
  f.d_inc = d;
  f.u.resize(dirs.size());
  for (size_t k = 0; k < dirs.size(); ++k)
    f.u[k] = thin_soundhard_farfield(cq, cap, delta, omega, d, dirs[k]);
  return f;
}

// ---------------------------------------------------------------------------
// reduced curve operators on theta-ring-resolved densities

/// Discrete reduced facade operators acting on densities sampled on the
/// (t_i, theta_k) product grid (t-major ordering). Both only see the ring
/// means; the principal-value diagonal excludes a symmetric arc-length
/// window of width 2h (optionally Richardson-extrapolated h -> 0). The
/// straight-segment K-part vanishes identically (chords orthogonal to the
/// facade normals).
struct ReducedCurveOperators {
  CMat Kstar;  // (n_t*n_theta) x (n_t*n_theta)
  CMat S;
  double pv_h = 0.0;
};

inline ReducedCurveOperators reduced_curve_operators(const CurveQuadrature& cq, double omega,
                                                     double pv_h = 0.0, bool extrapolate = true) {
  if (omega < 0) throw config_error("reduced_curve_operators: omega must be >= 0");
  const int nt = cq.n(), nth = cq.n_theta, n = nt * nth;
  double hmin = cq.length() / nt;
  for (int i = 0; i + 1 < nt; ++i) hmin = std::min(hmin, cq.t[i + 1] - cq.t[i]);
  if (hmin < 1e-14) throw quadrature_error("reduced_curve_operators: coincident curve nodes");
  double h = pv_h > 0 ? pv_h : 3.0 * cq.length() / nt;
  const double dtheta = 2.0 * pi / nth;

  auto build = [&](double hcut, CMat& Ks, CMat& S) {
    Ks = CMat::Zero(n, n);
    S = CMat::Zero(n, n);
    for (int i = 0; i < nt; ++i) {
      for (int k = 0; k < nth; ++k) {
        int row = i * nth + k;
        Vec3 nu_x = std::cos(2 * pi * k / nth) * cq.fr[i].N1 +
                    std::sin(2 * pi * k / nth) * cq.fr[i].N2;
        for (int j = 0; j < nt; ++j) {
          if (std::abs(cq.t[j] - cq.t[i]) <= hcut) continue;  // pv window
          Vec3 dz = cq.z[i] - cq.z[j];
          double r = dz.norm();
          cplx e = std::exp(iu * omega * r);
          cplx kker = (dz.dot(nu_x) / (r * r * r) - iu * omega * dz.dot(nu_x) / (r * r)) * e /
                      (4.0 * pi);
          cplx sker = -e / (4.0 * pi * r);
          for (int m = 0; m < nth; ++m) {  // ring sum of the source density
            Ks(row, j * nth + m) += cq.wt[j] * dtheta * kker;
            S(row, j * nth + m) += cq.wt[j] * dtheta * sker;
          }
        }
      }
    }
  };

  ReducedCurveOperators out;
  out.pv_h = h;
  build(h, out.Kstar, out.S);
  if (extrapolate) {
    CMat K2, S2;
    build(2.0 * h, K2, S2);
    // first-order Richardson in the window width
    out.Kstar = 2.0 * out.Kstar - K2;
    out.S = 2.0 * out.S - S2;
  }
  return out;
}

// ---------------------------------------------------------------------------
// flat-screen operator K and its far field

/// Flat-panel transfer operator on the generating square,
///   K = (I/4 - K*)^{-1} K* (I/4 + K*)^{-1},
/// where K* carries the rescaled cross-face kernel at the unit face
/// separation (offset 2 between the mirrored faces after blow-up):
///   K*[f](z) = (1/4pi) int (1 - i w rho) e^{i w rho} / rho^3 f(y) dA,
///   rho = sqrt(|z-y|^2 + 4).
/// The literal flat-trace normal-derivative kernel vanishes identically on
/// the plane; the face-offset form is the one the composition I/4 +- K*
/// belongs to (its plane-limit mass is exactly 1/4).
struct ScreenKOperator {
  CMat Kstar;
  CMat K;
};

inline ScreenKOperator screen_K_operator(const PanelQuadrature& pq, double omega) {
  if (omega <= 0) throw config_error("screen_K_operator: omega must be > 0");
  const int n = pq.n();
  ScreenKOperator out;
  out.Kstar.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double r2 = (pq.z[i] - pq.z[j]).squaredNorm();
      double rho = std::sqrt(r2 + 4.0);
      out.Kstar(i, j) =
          pq.w[j] * (1.0 - iu * omega * rho) * std::exp(iu * omega * rho) / (4.0 * pi * rho * rho * rho);
    }
  CMat I4 = 0.25 * CMat::Identity(n, n);
  Eigen::PartialPivLU<CMat> lum(I4 - out.Kstar);
  Eigen::PartialPivLU<CMat> lup(I4 + out.Kstar);
  double dm = 1e300, dp = 1e300;
  for (int i = 0; i < n; ++i) {
    dm = std::min(dm, std::abs(lum.matrixLU()(i, i)));
    dp = std::min(dp, std::abs(lup.matrixLU()(i, i)));
  }
  if (dm < 1e-13 || dp < 1e-13)
    throw solver_error("screen_K_operator: I/4 +- K* is numerically singular");
  out.K = lum.solve(out.Kstar * lup.solve(CMat::Identity(n, n)));
  return out;
}

/// Normal-derivative data of the incident wave on the generating square.
inline CVec screen_neumann_data(const PanelQuadrature& pq, double omega, const Vec3& d) {
  CVec f(pq.n());
  const Vec3 n(0, 0, 1);
  for (int i = 0; i < pq.n(); ++i)
    f[i] = iu * omega * n.dot(d) * plane_wave(omega, d, pq.z[i]);
  return f;
}

/// Leading far field of the sound-hard screen through the transfer operator:
/// v_inf(xhat,d) = -(1/2pi) int exp(-i w <xhat,z-hat> |z| ...) K[n.grad u^i](z) dA,
/// with the phase evaluated through the degree-1 spherical-harmonic
/// addition sum.
inline FarField screen_farfield(const PanelQuadrature& pq, double omega, const Vec3& d,
                                const std::vector<Vec3>& dirs) {
  if (std::abs(d.norm() - 1.0) > 1e-12)
    throw config_error("screen_farfield: d must be a unit vector");
  ScreenKOperator op = screen_K_operator(pq, omega);
  CVec kth = op.K * screen_neumann_data(pq, omega, d);
  FarField f;
  f.dirs = dirs;
  f.d_inc = d;
  f.u.resize(dirs.size());
  for (size_t k = 0; k < dirs.size(); ++k) {
    cplx acc = 0.0;
    for (int j = 0; j < pq.n(); ++j) {
      double rz = pq.z[j].norm();
      cplx phase = 0.0;
      if (rz > 1e-14) phase = y1_addition(dirs[k], pq.z[j] / rz) * rz;
      acc += pq.w[j] * std::exp(-iu * omega * phase) * kth[j];
    }
    f.u[k] = -acc / (2.0 * pi);
  }
  return f;
}

}  // namespace thinscat
