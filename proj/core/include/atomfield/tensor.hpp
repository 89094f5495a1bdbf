#pragma once

#include <array>

#include "atomfield/geom.hpp"

// Kinematic conversions and the small dense solves shared by the recovery
// and reference modules.

namespace atomfield {

/// Green-Lagrange strain E = 1/2 (F^T F - I).
Mat3 green_lagrange(const Mat3& F);

/// Rotation-free symmetric stretch F = (I + 2E)^(1/2) via spectral
/// decomposition. Used to turn a prescribed strain into the boundary
/// deformation gradient. Throws std::invalid_argument if E is not symmetric
/// or I + 2E is not positive definite.
Mat3 stretch_from_strain(const Mat3& E);

/// Von Mises invariant sqrt(3 J2) of the symmetrized tensor.
double von_mises(const Mat3& s);

/// Eigenvalues of a symmetric 3x3 tensor, ascending.
std::array<double, 3> eigvals_sym(const Mat3& t);

/// 9x9 symmetric matrix in row-major storage for the stress normal equations.
struct Mat9 {
  double m[9][9] = {};
  double& operator()(int r, int c) { return m[r][c]; }
  double operator()(int r, int c) const { return m[r][c]; }
};

struct SpdSolve {
  bool ok = false;          // factorization succeeded and residual check passed
  double condition = 0.0;   // eigenvalue-ratio diagnostic, filled on failure
  Voigt9 x{};
};

/// Solve M x = b for symmetric positive definite M by direct factorization.
/// On failure (indefinite or numerically singular M) ok=false and `condition`
/// carries the eigenvalue-ratio diagnostic of M.
SpdSolve solve_spd(const Mat9& M, const Voigt9& b);

}  // namespace atomfield
