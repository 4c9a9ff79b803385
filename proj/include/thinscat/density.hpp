#pragma once

#include <vector>

#include "thinscat/common.hpp"
#include "thinscat/surface.hpp"

namespace thinscat {

/// Complex coefficient vector on a named surface (the layer-potential
/// unknown or trace data).
struct Density {
  const SurfaceQuadrature* surf = nullptr;
  CVec values;

  Density() = default;
  Density(const SurfaceQuadrature& s, CVec v) : surf(&s), values(std::move(v)) {
    if (values.size() != s.size())
      throw config_error("Density: length must equal the surface node count");
  }

  /// Discrete surface L2 norm.
  double l2() const {
    double a = 0;
    for (int i = 0; i < surf->size(); ++i) a += std::norm(values[i]) * surf->w[i];
    return std::sqrt(a);
  }
};

/// Far-field samples u_inf(xhat, d): the coefficient of e^{i omega |x|}/|x|.
struct FarField {
  std::vector<Vec3> dirs;
  Vec3 d_inc = Vec3::Zero();
  CVec u;

  double sup() const {
    double m = 0;
    for (Eigen::Index i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i]));
    return m;
  }
};

}  // namespace thinscat
