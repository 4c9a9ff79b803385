#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace thinscat {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx iu{0.0, 1.0};

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct geometry_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct quadrature_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Thrown when the exterior operator degenerates near an interior eigenvalue;
// callers should retry in combined-field mode.
struct resonance_error : solver_error {
  using solver_error::solver_error;
};

// Plane wave exp(i*omega*x.d) and its gradient.
inline cplx plane_wave(double omega, const Vec3& d, const Vec3& x) {
  return std::exp(iu * omega * d.dot(x));
}
inline CVec3 plane_wave_grad(double omega, const Vec3& d, const Vec3& x) {
  return (iu * omega * plane_wave(omega, d, x)) * d;
}

// Bilinear (unconjugated) dot of a complex and a real 3-vector. Eigen's
// .dot() conjugates its first argument, which is not wanted for normal
// derivatives of complex fields.
inline cplx dot_c(const CVec3& a, const Vec3& b) {
  return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

}  // namespace thinscat
