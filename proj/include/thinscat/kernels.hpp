#pragma once

#include "thinscat/common.hpp"

namespace thinscat {

/// Helmholtz fundamental solution G_k(x-y) = -exp(ik|x-y|)/(4pi|x-y|).
/// The sign is fixed by this convention throughout; with it the exterior
/// Neumann trace of the single layer is (+I/2 + K*).
inline cplx kernel_eval(cplx k, const Vec3& x, const Vec3& y) {
  double r = (x - y).norm();
  if (r == 0.0) throw std::domain_error("kernel_eval: coincident points");
  return -std::exp(iu * k * r) / (4.0 * pi * r);
}

enum class OpKind { S, K, Kstar, D };

namespace detail {

// grad_x G_k(x-y) = (x-y) (1 - ikr) e^{ikr} / (4 pi r^3)
inline CVec3 grad_kernel(cplx k, const Vec3& x, const Vec3& y) {
  Vec3 dxy = x - y;
  double r = dxy.norm();
  cplx f = (1.0 - iu * k * r) * std::exp(iu * k * r) / (4.0 * pi * r * r * r);
  return f * dxy;
}

inline cplx op_kernel(OpKind kind, cplx k, const Vec3& x, const Vec3& nu_x, const Vec3& y,
                      const Vec3& nu_y) {
  Vec3 dxy = x - y;
  double r = dxy.norm();
  cplx e = std::exp(iu * k * r);
  switch (kind) {
    case OpKind::S:
      return -e / (4.0 * pi * r);
    case OpKind::Kstar:
      return nu_x.dot(dxy) * (1.0 - iu * k * r) * e / (4.0 * pi * r * r * r);
    case OpKind::K:
    case OpKind::D:
      return -nu_y.dot(dxy) * (1.0 - iu * k * r) * e / (4.0 * pi * r * r * r);
  }
  return 0.0;
}

// grad_x of the D kernel (for gradients of double-layer potentials):
// d/dx [ dG/dnu_y (x-y) ] = -F(r) nu_y - (x-y) <x-y,nu_y> F'(r)/r,
// F(r) = (1-ikr) e^{ikr} / (4 pi r^3).
inline CVec3 grad_dlp_kernel(cplx k, const Vec3& x, const Vec3& y, const Vec3& nu_y) {
  Vec3 dxy = x - y;
  double r = dxy.norm();
  cplx e = std::exp(iu * k * r);
  cplx F = (1.0 - iu * k * r) * e / (4.0 * pi * r * r * r);
  cplx dFr = e * (-3.0 + 3.0 * iu * k * r + k * k * r * r) / (4.0 * pi * r * r * r * r * r);
  return -(F * nu_y + (dxy.dot(nu_y) * dFr) * dxy);
}

}  // namespace detail
}  // namespace thinscat
