#pragma once

#include <cmath>
#include <vector>

#include "thinscat/common.hpp"

namespace thinscat {

/// Orthonormal degree-1 spherical harmonic, complex convention with
/// Condon-Shortley phase: Y_1^0 = sqrt(3/4pi) cos(theta),
/// Y_1^{+-1} = -+ sqrt(3/8pi) sin(theta) e^{+-i phi}.
inline cplx sph_harm_Y1(int m, const Vec3& xhat) {
  if (std::abs(xhat.norm() - 1.0) > 1e-8)
    throw std::domain_error("sph_harm_Y1: direction must be a unit vector");
  const double c0 = std::sqrt(3.0 / (4.0 * pi));
  const double c1 = std::sqrt(3.0 / (8.0 * pi));
  switch (m) {
    case 0:
      return cplx(c0 * xhat.z(), 0.0);
    case 1:
      return -c1 * cplx(xhat.x(), xhat.y());
    case -1:
      return c1 * cplx(xhat.x(), -xhat.y());
    default:
      throw std::domain_error("sph_harm_Y1: m must be in {-1,0,1}");
  }
}

/// (4pi/3) sum_m Y_1^m(a) conj(Y_1^m(b)); equals a.b for unit vectors.
inline cplx y1_addition(const Vec3& a, const Vec3& b) {
  cplx s = 0.0;
  for (int m = -1; m <= 1; ++m) s += sph_harm_Y1(m, a) * std::conj(sph_harm_Y1(m, b));
  return (4.0 * pi / 3.0) * s;
}

/// Legendre polynomials P_0..P_n at x.
inline std::vector<double> legendre_all(int n, double x) {
  std::vector<double> p(n + 1);
  p[0] = 1.0;
  if (n >= 1) p[1] = x;
  for (int k = 2; k <= n; ++k) p[k] = ((2.0 * k - 1.0) * x * p[k - 1] - (k - 1.0) * p[k - 2]) / k;
  return p;
}

/// Spherical Bessel j_0..j_n and y_0..y_n at real x>0. j by downward
/// (Miller) recurrence, y upward; both stable in this direction.
inline void sph_bessel_jy(int n, double x, std::vector<double>& j, std::vector<double>& y) {
  j.assign(n + 1, 0.0);
  y.assign(n + 1, 0.0);
  if (x <= 0.0) throw std::domain_error("sph_bessel_jy: x must be > 0");
  y[0] = -std::cos(x) / x;
  if (n >= 1) y[1] = -std::cos(x) / (x * x) - std::sin(x) / x;
  for (int k = 2; k <= n; ++k) y[k] = (2.0 * k - 1.0) / x * y[k - 1] - y[k - 2];

  int m = n + 16 + static_cast<int>(x);
  double fp = 0.0, fc = 1e-30;
  std::vector<double> tmp(n + 1, 0.0);
  for (int k = m; k >= 0; --k) {
    double fm = (2.0 * k + 3.0) / x * fc - fp;
    fp = fc;
    fc = fm;
    if (k <= n) tmp[k] = fm;
    if (std::abs(fc) > 1e250) {  // rescale to avoid overflow
      fp /= 1e250;
      fc /= 1e250;
      for (auto& v : tmp) v /= 1e250;
    }
  }
  double scale = (std::sin(x) / x) / tmp[0];
  for (int k = 0; k <= n; ++k) j[k] = tmp[k] * scale;
}

/// d/dx j_n(x) given the value table; same identity holds for y_n and h_n.
inline double sph_bessel_deriv(const std::vector<double>& f, int n, double x) {
  if (n == 0) return -f[1];
  return f[n - 1] - (n + 1.0) / x * f[n];
}

}  // namespace thinscat
