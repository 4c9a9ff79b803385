#pragma once

#include <cmath>
#include <limits>

#include "thinscat/common.hpp"

namespace thinscat {

/// Dense complex linear system with one or more right-hand sides.
struct DenseSystem {
  CMat A;
  CMat rhs;
};

struct DenseSolution {
  CMat X;
  double resid_rel = 0.0;  // max over rhs columns of ||Ax-b|| / ||b||
  double rcond_est = 1.0;  // Hager 1-norm reciprocal condition estimate
};

namespace detail {

/// Hager's estimator for ||A^{-1}||_1 on a factorized matrix.
inline double inv_norm1_estimate(const Eigen::PartialPivLU<CMat>& lu, Eigen::Index n) {
  CVec x = CVec::Constant(n, cplx(1.0 / double(n), 0.0));
  double est = 0.0;
  for (int it = 0; it < 6; ++it) {
    CVec y = lu.solve(x);
    double n1 = y.cwiseAbs().sum();
    est = std::max(est, n1);
    CVec xi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double a = std::abs(y[i]);
      xi[i] = a > 0 ? y[i] / a : cplx(1, 0);
    }
    CVec z = lu.adjoint().solve(xi);
    Eigen::Index jmax;
    z.cwiseAbs().maxCoeff(&jmax);
    if (z.cwiseAbs().maxCoeff() <= std::real(z.dot(x)) + 1e-14) break;
    x.setZero();
    x[jmax] = 1.0;
  }
  return est;
}

}  // namespace detail

/// LU with partial pivoting plus one step of iterative refinement.
/// Throws solver_error when the factorization is singular to working precision.
inline DenseSolution solve_dense(const DenseSystem& sys, bool refine = true) {
  const Eigen::Index n = sys.A.rows();
  if (n != sys.A.cols()) throw solver_error("solve_dense: matrix must be square");
  if (!sys.A.allFinite() || !sys.rhs.allFinite())
    throw solver_error("solve_dense: non-finite entries");

  Eigen::PartialPivLU<CMat> lu(sys.A);
  const CMat& U = lu.matrixLU();
  double dmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) dmin = std::min(dmin, std::abs(U(i, i)));
  if (dmin == 0.0) throw solver_error("solve_dense: matrix singular to working precision");

  DenseSolution sol;
  double anorm1 = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) anorm1 = std::max(anorm1, sys.A.col(j).cwiseAbs().sum());
  double invn1 = detail::inv_norm1_estimate(lu, n);
  sol.rcond_est = (anorm1 > 0 && invn1 > 0) ? 1.0 / (anorm1 * invn1) : 0.0;
  if (sol.rcond_est < 1e-16)
    throw solver_error("solve_dense: matrix singular to working precision (rcond~" +
                       std::to_string(sol.rcond_est) + ")");

  sol.X = lu.solve(sys.rhs);
  if (refine) {
    CMat r = sys.rhs - sys.A * sol.X;
    sol.X += lu.solve(r);
  }
  double worst = 0.0;
  for (Eigen::Index c = 0; c < sys.rhs.cols(); ++c) {
    double bn = sys.rhs.col(c).norm();
    double rn = (sys.A * sol.X.col(c) - sys.rhs.col(c)).norm();
    worst = std::max(worst, bn > 0 ? rn / bn : rn);
  }
  sol.resid_rel = worst;
  return sol;
}

/// Restarted GMRES(m) on a dense matrix; fallback path for large systems.
inline CVec gmres(const CMat& A, const CVec& b, int restart = 80, int max_iter = 2000,
                  double tol = 1e-10) {
  const Eigen::Index n = A.rows();
  CVec x = CVec::Zero(n);
  double bnorm = b.norm();
  if (bnorm == 0.0) return x;
  int iter = 0;
  while (iter < max_iter) {
    CVec r = b - A * x;
    double beta = r.norm();
    if (beta / bnorm < tol) return x;
    CMat V(n, restart + 1);
    CMat H = CMat::Zero(restart + 1, restart);
    V.col(0) = r / beta;
    CVec g = CVec::Zero(restart + 1);
    g(0) = beta;
    std::vector<cplx> cs(restart), sn(restart);
    int k = 0;
    for (; k < restart && iter < max_iter; ++k, ++iter) {
      CVec wv = A * V.col(k);
      for (int j = 0; j <= k; ++j) {
        H(j, k) = V.col(j).dot(wv);  // Eigen dot conjugates the first argument
        wv -= H(j, k) * V.col(j);
      }
      H(k + 1, k) = wv.norm();
      if (std::abs(H(k + 1, k)) > 1e-300) V.col(k + 1) = wv / H(k + 1, k);
      for (int j = 0; j < k; ++j) {  // apply stored Givens rotations
        cplx t = cs[j] * H(j, k) + sn[j] * H(j + 1, k);
        H(j + 1, k) = -std::conj(sn[j]) * H(j, k) + cs[j] * H(j + 1, k);
        H(j, k) = t;
      }
      double denom = std::sqrt(std::norm(H(k, k)) + std::norm(H(k + 1, k)));
      cs[k] = std::abs(H(k, k)) / denom;
      sn[k] = (std::abs(H(k, k)) > 0 ? H(k, k) / std::abs(H(k, k)) : 1.0) *
              std::conj(H(k + 1, k)) / denom;
      H(k, k) = cs[k] * H(k, k) + sn[k] * H(k + 1, k);
      H(k + 1, k) = 0.0;
      g(k + 1) = -std::conj(sn[k]) * g(k);
      g(k) = cs[k] * g(k);
      if (std::abs(g(k + 1)) / bnorm < tol) {
        ++k;
        break;
      }
    }
    CVec yk = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    x += V.leftCols(k) * yk;
    if ((b - A * x).norm() / bnorm < tol) return x;
  }
  return x;
}

/// Text dump for debugging: row-major "re im" pairs.
inline void dump_matrix(std::ostream& os, const CMat& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j) os << ' ';
      os << A(i, j).real() << ' ' << A(i, j).imag();
    }
    os << '\n';
  }
}

}  // namespace thinscat
