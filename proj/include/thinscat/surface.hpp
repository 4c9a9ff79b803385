#pragma once

#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "thinscat/common.hpp"
#include "thinscat/quadrature.hpp"

namespace thinscat {

enum class PatchTag { facade, capA, capB, s0, s1, s2, sphere };

inline const char* to_string(PatchTag t) {
  switch (t) {
    case PatchTag::facade: return "facade";
    case PatchTag::capA: return "capA";
    case PatchTag::capB: return "capB";
    case PatchTag::s0: return "S0";
    case PatchTag::s1: return "S1";
    case PatchTag::s2: return "S2";
    case PatchTag::sphere: return "sphere";
  }
  return "?";
}

inline PatchTag patch_tag_from(const std::string& s) {
  if (s == "facade") return PatchTag::facade;
  if (s == "capA") return PatchTag::capA;
  if (s == "capB") return PatchTag::capB;
  if (s == "S0") return PatchTag::s0;
  if (s == "S1") return PatchTag::s1;
  if (s == "S2") return PatchTag::s2;
  if (s == "sphere") return PatchTag::sphere;
  throw config_error("unknown patch tag: " + s);
}

enum class BodyKind { tube, screen, sphere };

/// Smooth parametric piece of a body boundary. eval fills position, unit
/// outward normal and the area element |x_u cross x_v| at (u,v).
struct Chart {
  std::function<void(double, double, Vec3&, Vec3&, double&)> eval;
};

/// Tensor-product quadrature panel on one chart. Nodes are stored
/// u-major: node(iu,iv) = first_node + iu*nv + iv. A v-periodic panel spans
/// one full period with trapezoid nodes (trigonometric interpolation);
/// otherwise both directions carry Gauss-Legendre nodes (barycentric
/// Lagrange interpolation).
struct Panel {
  int chart = 0;
  double u0 = 0, u1 = 0, v0 = 0, v1 = 0;
  int nu = 0, nv = 0;
  int first_node = 0;
  bool v_periodic = false;
  RVec un, vn;       // parameter nodes
  RVec ubw, vbw;     // barycentric weights (vbw unused when periodic)
  Vec3 center = Vec3::Zero();
  double radius = 0;  // bounding sphere of the panel nodes
  double size = 0;    // max physical extent estimate
};

/// Discrete surface: per-node data required by the layer-potential
/// machinery plus the panel/chart structure for singular and near-singular
/// quadrature. Immutable after construction.
class SurfaceQuadrature {
 public:
  std::vector<Vec3> x, nu, z, xt;
  std::vector<double> w;
  std::vector<PatchTag> tag;
  std::vector<Mat3> B;
  std::vector<int> node_panel;
  std::vector<double> node_u, node_v;
  std::vector<Chart> charts;
  std::vector<Panel> panels;

  BodyKind body = BodyKind::sphere;
  double delta = 1.0;     // physical scale parameter of the body
  std::string body_id;    // e.g. "outer" / "inner" / "rescaled"

  int size() const { return static_cast<int>(x.size()); }

  double area() const {
    double a = 0;
    for (double wi : w) a += wi;
    return a;
  }

  double patch_area(PatchTag t) const {
    double a = 0;
    for (int i = 0; i < size(); ++i)
      if (tag[i] == t) a += w[i];
    return a;
  }

  /// Bounding data used by the near-field classifier.
  void finalize() {
    for (auto& p : panels) {
      Vec3 c = Vec3::Zero();
      for (int iu = 0; iu < p.nu; ++iu)
        for (int iv = 0; iv < p.nv; ++iv) c += x[p.first_node + iu * p.nv + iv];
      c /= double(p.nu * p.nv);
      double r = 0;
      for (int iu = 0; iu < p.nu; ++iu)
        for (int iv = 0; iv < p.nv; ++iv)
          r = std::max(r, (x[p.first_node + iu * p.nv + iv] - c).norm());
      p.center = c;
      // Node hulls under-estimate the panel extent; pad by the node spacing.
      p.radius = r * 1.35 + 1e-14;
      p.size = 2.0 * p.radius;
    }
  }

  /// Whitespace-separated node table, one node per line:
  /// x y z nx ny nz w patch_tag zx zy zz. Doubles are written with 17
  /// significant digits so a read-back reproduces them bit-identically.
  void dump(std::ostream& os) const {
    char buf[512];
    for (int i = 0; i < size(); ++i) {
      std::snprintf(buf, sizeof buf,
                    "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %s %.17g %.17g %.17g\n",
                    x[i].x(), x[i].y(), x[i].z(), nu[i].x(), nu[i].y(), nu[i].z(), w[i],
                    to_string(tag[i]), z[i].x(), z[i].y(), z[i].z());
      os << buf;
    }
  }

  /// Reads a node table produced by dump(). Panels/charts are not part of
  /// the interchange format; the result supports node-level queries only.
  static SurfaceQuadrature load(std::istream& is) {
    SurfaceQuadrature s;
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      Vec3 xx, nn, zz;
      double wi;
      std::string tg;
      ls >> xx.x() >> xx.y() >> xx.z() >> nn.x() >> nn.y() >> nn.z() >> wi >> tg >> zz.x() >>
          zz.y() >> zz.z();
      if (!ls) throw config_error("surface table: malformed line: " + line);
      s.x.push_back(xx);
      s.nu.push_back(nn);
      s.w.push_back(wi);
      s.tag.push_back(patch_tag_from(tg));
      s.z.push_back(zz);
      s.xt.push_back(xx);
      s.B.push_back(Mat3::Identity());
      s.node_panel.push_back(-1);
      s.node_u.push_back(0);
      s.node_v.push_back(0);
    }
    return s;
  }
};

}  // namespace thinscat
