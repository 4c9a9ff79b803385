#pragma once

#include <vector>

#include "thinscat/common.hpp"
#include "thinscat/density.hpp"
#include "thinscat/special.hpp"

namespace thinscat {

/// Far field of the exterior Neumann (sound-hard) sphere problem by the
/// spherical wave-function series; the independent oracle for the
/// boundary-integral path. Depends on xhat.d only.
///
///   u_inf(xhat,d) = -(i/omega) sum_n (2n+1) c_n P_n(xhat.d),
///   c_n = -j_n'(omega a) / h_n^(1)'(omega a).
struct MieResult {
  FarField ff;
  double tail = 0.0;    // magnitude of the last retained term
  bool truncated = false;  // tail above the 1e-12 target
};

inline MieResult mie_sound_hard_sphere(double a, double omega, const Vec3& d,
                                       const std::vector<Vec3>& dirs, int N) {
  if (a <= 0 || omega <= 0) throw config_error("mie_sound_hard_sphere: need a, omega > 0");
  double x = omega * a;
  if (N < x + 10) throw config_error("mie_sound_hard_sphere: truncation N must be >= omega*a + 10");
  std::vector<double> j, y;
  sph_bessel_jy(N + 1, x, j, y);
  std::vector<cplx> c(N + 1);
  for (int n = 0; n <= N; ++n) {
    double jp = sph_bessel_deriv(j, n, x);
    cplx hp = cplx(jp, sph_bessel_deriv(y, n, x));
    c[n] = -jp / hp;
  }
  MieResult r;
  r.tail = (2.0 * N + 1.0) * std::abs(c[N]) / omega;
  r.truncated = r.tail > 1e-12;
  r.ff.dirs = dirs;
  r.ff.d_inc = d;
  r.ff.u.resize(dirs.size());
  for (size_t k = 0; k < dirs.size(); ++k) {
    double ct = std::clamp(dirs[k].dot(d), -1.0, 1.0);
    std::vector<double> P = legendre_all(N, ct);
    cplx s = 0.0;
    for (int n = 0; n <= N; ++n) s += (2.0 * n + 1.0) * c[n] * P[n];
    r.ff.u[k] = -iu / omega * s;
  }
  return r;
}

}  // namespace thinscat
