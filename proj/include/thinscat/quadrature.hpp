#pragma once

#include <cmath>
#include <vector>

#include "thinscat/common.hpp"

namespace thinscat {

struct QuadratureRule {
  RVec x;  // nodes
  RVec w;  // weights
  int n() const { return static_cast<int>(x.size()); }
};

enum class QuadKind { gauss_legendre, periodic_trapezoid };

/// Gauss-Legendre rule on [-1,1], Newton iteration on P_n.
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw quadrature_error("gauss_legendre: n must be >= 1");
  QuadratureRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Initial guess (Chebyshev-like), then Newton on P_n.
    double t = std::cos(pi * (i + 0.75) / (n + 0.5));
    double p0, p1, dp;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    p0 = 1.0;
    p1 = t;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (t * p1 - p0) / (t * t - 1.0);
    r.x[i] = -t;
    r.x[n - 1 - i] = t;
    double wi = 2.0 / ((1.0 - t * t) * dp * dp);
    r.w[i] = wi;
    r.w[n - 1 - i] = wi;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

/// Trapezoid rule on [0, 2pi) with nodes 2*pi*k/n; spectrally accurate for
/// smooth periodic integrands.
inline QuadratureRule periodic_trapezoid(int n) {
  if (n < 1) throw quadrature_error("periodic_trapezoid: n must be >= 1");
  QuadratureRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int k = 0; k < n; ++k) {
    r.x[k] = 2.0 * pi * k / n;
    r.w[k] = 2.0 * pi / n;
  }
  return r;
}

inline QuadratureRule quadrature_rule(QuadKind kind, int n) {
  return kind == QuadKind::gauss_legendre ? gauss_legendre(n) : periodic_trapezoid(n);
}

/// Affine image of a rule on [a,b].
inline QuadratureRule map_rule(const QuadratureRule& r, double a, double b) {
  QuadratureRule m = r;
  m.x = (0.5 * (b - a)) * r.x.array() + 0.5 * (a + b);
  m.w = (0.5 * (b - a)) * r.w;
  return m;
}

/// n_panels Gauss-Legendre panels of order q tiling [a,b].
inline QuadratureRule panel_rule(double a, double b, int n_panels, int q) {
  QuadratureRule base = gauss_legendre(q);
  QuadratureRule out;
  out.x.resize(n_panels * q);
  out.w.resize(n_panels * q);
  double h = (b - a) / n_panels;
  for (int p = 0; p < n_panels; ++p) {
    QuadratureRule m = map_rule(base, a + p * h, a + (p + 1) * h);
    out.x.segment(p * q, q) = m.x;
    out.w.segment(p * q, q) = m.w;
  }
  return out;
}

}  // namespace thinscat
