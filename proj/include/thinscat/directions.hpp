#pragma once

#include <vector>

#include "thinscat/common.hpp"
#include "thinscat/quadrature.hpp"

namespace thinscat {

/// Unit directions from a Gauss-Legendre (in cos theta) x uniform (azimuth)
/// product rule; weights sum to 4pi exactly.
struct DirectionGrid {
  std::vector<Vec3> dir;
  RVec w;
  int size() const { return static_cast<int>(dir.size()); }
};

inline DirectionGrid make_direction_grid(int n_polar, int n_azimuth) {
  if (n_polar < 1 || n_azimuth < 1) throw config_error("direction grid needs n >= 1");
  DirectionGrid g;
  QuadratureRule gl = gauss_legendre(n_polar);  // nodes in cos(theta) on [-1,1]
  g.dir.reserve(n_polar * n_azimuth);
  g.w.resize(n_polar * n_azimuth);
  int idx = 0;
  for (int i = 0; i < n_polar; ++i) {
    double ct = gl.x[i];
    double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int k = 0; k < n_azimuth; ++k) {
      double phi = 2.0 * pi * k / n_azimuth;
      g.dir.emplace_back(st * std::cos(phi), st * std::sin(phi), ct);
      g.w[idx++] = gl.w[i] * (2.0 * pi / n_azimuth);
    }
  }
  return g;
}

/// Incident direction with a prescribed normal component: d.n = eps exactly,
/// built by rotating a grazing direction out of the plane n.perp.
inline Vec3 direction_with_normal_component(const Vec3& n, double eps, double azimuth) {
  if (std::abs(eps) > 1.0) throw config_error("direction_with_normal_component: |eps|>1");
  Vec3 nn = n.normalized();
  Vec3 a = std::abs(nn.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
  Vec3 t1 = (a - a.dot(nn) * nn).normalized();
  Vec3 t2 = nn.cross(t1);
  double s = std::sqrt(1.0 - eps * eps);
  return s * (std::cos(azimuth) * t1 + std::sin(azimuth) * t2) + eps * nn;
}

}  // namespace thinscat
