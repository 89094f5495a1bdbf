#pragma once

// Shared test support: independent numerical oracles (dense pseudo-inverse
// least squares, all-pairs neighbor scan), deterministic random generators,
// and scratch-directory plumbing. The oracles deliberately avoid the library
// code paths they check: everything here goes through Eigen's dense
// decompositions or plain O(n^2) loops.

#include <Eigen/Dense>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "atomfield/geom.hpp"
#include "atomfield/lattice.hpp"
#include "atomfield/potential.hpp"
#include "atomfield/recovery.hpp"
#include "atomfield/tensor.hpp"

#ifndef ATOMFIELD_TEST_WORKDIR
#define ATOMFIELD_TEST_WORKDIR "./scratch"
#endif

namespace testsupport {

using atomfield::AtomSystem;
using atomfield::Bond;
using atomfield::Mat3;
using atomfield::Vec3;

// ---------------------------------------------------------------------------
// Filesystem

/// Fresh per-test scratch directory (removed and recreated on every call).
inline std::filesystem::path scratch_dir(const std::string& name) {
  std::filesystem::path dir = std::filesystem::path(ATOMFIELD_TEST_WORKDIR) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

// ---------------------------------------------------------------------------
// Dense pseudo-inverse oracles

/// Minimum-norm least-squares solution through a complete orthogonal
/// decomposition — independent of the library's normal-equations route.
inline Eigen::VectorXd pinv_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  return A.completeOrthogonalDecomposition().solve(b);
}

inline Eigen::MatrixXd to_eigen(const std::vector<double>& rowmajor, int rows, int cols) {
  Eigen::MatrixXd M(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) M(r, c) = rowmajor[static_cast<size_t>(r) * cols + c];
  return M;
}

/// LS deformation gradient at atom i via the pseudo-inverse of the stacked
/// system assembled by the library (the assembly itself is validated by
/// layout tests against hand-built matrices).
inline Mat3 oracle_recover_F(const AtomSystem& sys, int i) {
  std::vector<double> D, b;
  atomfield::assemble_D(sys, i, D, b);
  int rows = static_cast<int>(b.size());
  Eigen::VectorXd x =
      pinv_solve(to_eigen(D, rows, 9), Eigen::Map<const Eigen::VectorXd>(b.data(), rows));
  atomfield::Voigt9 v{};
  for (int k = 0; k < 9; ++k) v[static_cast<size_t>(k)] = x(k);
  return atomfield::unflatten(v);
}

/// Penalized LS stress at atom i via the pseudo-inverse of the row-stacked
/// (d; sqrt(lambda) A) system with rhs (b; 0) — algebraically the same
/// minimizer as the normal equations (d^T d + lambda A^T A) x = d^T b.
inline Mat3 oracle_recover_sigma(const AtomSystem& sys, const atomfield::PairPotential& p,
                                 int i, double lambda_factor) {
  std::vector<double> d, b;
  atomfield::assemble_stress_system(sys, p, i, d, b);
  int rows = static_cast<int>(b.size());
  Eigen::MatrixXd dm = to_eigen(d, rows, 9);
  double lambda = lambda_factor * (dm.transpose() * dm).trace();
  Eigen::MatrixXd stacked(rows + 3, 9);
  stacked.topRows(rows) = dm;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 9; ++c)
      stacked(rows + r, c) = std::sqrt(lambda) * atomfield::kAntisymmetryConstraint[r][c];
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows + 3);
  rhs.head(rows) = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
  Eigen::VectorXd x = pinv_solve(stacked, rhs);
  atomfield::Voigt9 v{};
  for (int k = 0; k < 9; ++k) v[static_cast<size_t>(k)] = x(k);
  return atomfield::unflatten(v);
}

// ---------------------------------------------------------------------------
// Brute-force neighbor oracle

/// O(n^2) all-pairs scan mirroring all_pairs_within's contract (<= r_cut,
/// both directions listed, ascending index order).
inline std::vector<std::vector<int>> brute_force_pairs(const std::vector<Vec3>& pts,
                                                       double r_cut) {
  std::vector<std::vector<int>> out(pts.size());
  double r2 = r_cut * r_cut;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = 0; j < pts.size(); ++j)
      if (i != j && norm2(pts[j] - pts[i]) <= r2) out[i].push_back(static_cast<int>(j));
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic random generators

inline double uniform(std::mt19937& rng, double lo, double hi) {
  return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline Vec3 random_vec(std::mt19937& rng, double amp) {
  return {uniform(rng, -amp, amp), uniform(rng, -amp, amp), uniform(rng, -amp, amp)};
}

/// Random deformation gradient near identity with det in [0.9, 1.1].
inline Mat3 random_gradient(std::mt19937& rng, double amp = 0.05) {
  for (;;) {
    Mat3 F = Mat3::identity();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) F(r, c) += uniform(rng, -amp, amp);
    double d = det(F);
    if (d >= 0.9 && d <= 1.1) return F;
  }
}

/// Random symmetric tensor with entries in [-amp, amp].
inline Mat3 random_symmetric(std::mt19937& rng, double amp) {
  Mat3 s;
  for (int r = 0; r < 3; ++r)
    for (int c = r; c < 3; ++c) s(r, c) = s(c, r) = uniform(rng, -amp, amp);
  return s;
}

/// Rotation matrix from a random axis and angle (Rodrigues).
inline Mat3 random_rotation(std::mt19937& rng) {
  Vec3 axis = random_vec(rng, 1.0);
  while (norm(axis) < 1e-3) axis = random_vec(rng, 1.0);
  axis *= 1.0 / norm(axis);
  double th = uniform(rng, 0.0, 6.28318530717958648);
  double c = std::cos(th), s = std::sin(th);
  Mat3 K;  // cross-product matrix
  K(0, 1) = -axis.z; K(0, 2) = axis.y;
  K(1, 0) = axis.z;  K(1, 2) = -axis.x;
  K(2, 0) = -axis.y; K(2, 1) = axis.x;
  return Mat3::identity() + s * K + (1.0 - c) * (K * K);
}

/// Minimal hand-built system: one central atom (index 0) with the given
/// reference bonds, deformed by F plus per-neighbor noise. Neighbor atoms get
/// their reciprocal single-bond lists so system-level calls stay consistent.
inline AtomSystem make_neighborhood(const std::vector<Vec3>& bonds, const Mat3& F,
                                    std::mt19937* rng = nullptr, double noise = 0.0) {
  AtomSystem sys;
  int n = static_cast<int>(bonds.size());
  sys.X.assign(static_cast<size_t>(n) + 1, Vec3{});
  sys.x.assign(static_cast<size_t>(n) + 1, Vec3{});
  sys.fixed.assign(static_cast<size_t>(n) + 1, 0);
  sys.neighbors.assign(static_cast<size_t>(n) + 1, {});
  for (int j = 0; j < n; ++j) {
    const Vec3& R = bonds[static_cast<size_t>(j)];
    sys.X[static_cast<size_t>(j) + 1] = R;
    Vec3 r = F * R;
    if (rng && noise > 0.0) r += random_vec(*rng, noise);
    sys.x[static_cast<size_t>(j) + 1] = r;
    sys.neighbors[0].push_back(Bond{j + 1, R, norm(R)});
    sys.neighbors[static_cast<size_t>(j) + 1].push_back(Bond{0, -R, norm(R)});
  }
  sys.box_lo = {-4, -4, -4};
  sys.box_hi = {4, 4, 4};
  return sys;
}

/// Random well-conditioned neighborhood: n bonds with lengths in
/// [2.2, 2.9], redrawn until the bond Gram matrix is comfortably full rank.
inline AtomSystem random_neighborhood(std::mt19937& rng, int n_bonds, const Mat3& F,
                                      double noise) {
  for (;;) {
    std::vector<Vec3> bonds;
    for (int j = 0; j < n_bonds; ++j) {
      Vec3 dir = random_vec(rng, 1.0);
      while (norm(dir) < 1e-2) dir = random_vec(rng, 1.0);
      bonds.push_back(dir * (uniform(rng, 2.2, 2.9) / norm(dir)));
    }
    Mat3 gram;
    for (const Vec3& R : bonds) gram += outer(R, R);
    auto ev = atomfield::eigvals_sym(gram);
    if (ev[0] > 0.05 * ev[2]) return make_neighborhood(bonds, F, &rng, noise);
  }
}

// ---------------------------------------------------------------------------
// Small comparison helpers

inline double max_abs_diff(const Mat3& a, const Mat3& b) { return max_abs(a - b); }

inline double rel_diff(const Mat3& a, const Mat3& b) {
  double scale = std::max(1.0, std::max(max_abs(a), max_abs(b)));
  return max_abs(a - b) / scale;
}

}  // namespace testsupport
