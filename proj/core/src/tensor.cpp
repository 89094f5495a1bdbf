#include "atomfield/tensor.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace atomfield {

namespace {

Eigen::Matrix3d to_eigen(const Mat3& t) {
  Eigen::Matrix3d e;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e(i, j) = t.m[i][j];
  return e;
}

Mat3 from_eigen(const Eigen::Matrix3d& e) {
  Mat3 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t.m[i][j] = e(i, j);
  return t;
}

}  // namespace

Mat3 green_lagrange(const Mat3& F) {
  Mat3 C = transpose(F) * F;
  Mat3 E = 0.5 * (C - Mat3::identity());
  // C is symmetric by construction up to round-off; make it exact.
  return symmetric_part(E);
}

Mat3 stretch_from_strain(const Mat3& E) {
  double scale = std::max(1.0, max_abs(E));
  if (frobenius(E - transpose(E)) > 1e-12 * scale)
    throw std::invalid_argument("stretch_from_strain: strain tensor must be symmetric");

  Mat3 C = Mat3::identity() + 2.0 * symmetric_part(E);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(to_eigen(C));
  if (es.info() != Eigen::Success)
    throw std::invalid_argument("stretch_from_strain: eigendecomposition failed");
  Eigen::Vector3d ev = es.eigenvalues();
  if (ev.minCoeff() <= 0.0)
    throw std::invalid_argument("stretch_from_strain: I + 2E is not positive definite");

  Eigen::Vector3d root = ev.array().sqrt();
  Eigen::Matrix3d F =
      es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
  return from_eigen(F);
}

double von_mises(const Mat3& s_in) {
  Mat3 s = symmetric_part(s_in);
  double p = (s.m[0][0] + s.m[1][1] + s.m[2][2]) / 3.0;
  double d00 = s.m[0][0] - p, d11 = s.m[1][1] - p, d22 = s.m[2][2] - p;
  double j2 = 0.5 * (d00 * d00 + d11 * d11 + d22 * d22) +
              s.m[0][1] * s.m[0][1] + s.m[0][2] * s.m[0][2] + s.m[1][2] * s.m[1][2];
  return std::sqrt(3.0 * std::max(0.0, j2));
}

std::array<double, 3> eigvals_sym(const Mat3& t) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(to_eigen(symmetric_part(t)),
                                                    Eigen::EigenvaluesOnly);
  Eigen::Vector3d ev = es.eigenvalues();
  return {ev[0], ev[1], ev[2]};
}

SpdSolve solve_spd(const Mat9& M, const Voigt9& b) {
  using M9 = Eigen::Matrix<double, 9, 9>;
  using V9 = Eigen::Matrix<double, 9, 1>;

  M9 A;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) A(i, j) = M.m[i][j];
  V9 rhs;
  for (int i = 0; i < 9; ++i) rhs[i] = b[i];

  SpdSolve out;
  Eigen::LLT<M9> llt(A);
  if (llt.info() == Eigen::Success) {
    V9 x = llt.solve(rhs);
    double resid = (A * x - rhs).norm();
    if (std::isfinite(resid) && resid <= 1e-10 * std::max(1.0, rhs.norm())) {
      out.ok = true;
      for (int i = 0; i < 9; ++i) out.x[i] = x[i];
      return out;
    }
  }

  // Failure path: report the eigenvalue-ratio condition diagnostic.
  Eigen::SelfAdjointEigenSolver<M9> es(A, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  out.condition = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace atomfield
