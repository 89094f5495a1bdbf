#pragma once

#include <array>
#include <vector>

#include "atomfield/geom.hpp"
#include "atomfield/lattice.hpp"
#include "atomfield/potential.hpp"

// The two independent stress references: the boundary constraint-force
// estimate and the quasicontinuum (QC) uniform-lattice stress.

namespace atomfield {

struct BoundaryStressReport {
  Mat3 sigma;    // row i from faces +-i, averaged
  Mat3 spread;   // |plus-face estimate - minus-face estimate| per component
};

/// Reference stress from constraint-force sums over the boundary faces
/// (row i = face-i force sum / reference area; opposite faces averaged).
/// `constraint` is the full-length per-atom vector from constraint_forces().
BoundaryStressReport boundary_stress(const AtomSystem& sys,
                                     const std::vector<Vec3>& constraint);

/// Normalizing volume for the QC stress. `atomic` (default) is the FCC
/// per-atom volume a^3/4, which reproduces the published uniform-loading
/// stress table; `half_cutoff_sphere` is the sphere at half the cutoff
/// radius, (4/3) pi (r_cut/2)^3, as the formula is printed. The choice is
/// recorded in run metadata.
enum class QcVolume { atomic, half_cutoff_sphere };

/// Push-forward convention from 1st Piola-Kirchhoff to Cauchy. For the
/// symmetric stretches used here the two agree to round-off; PFt is the
/// standard one and the default.
enum class QcPushForward { PFt, PF };

struct QCReferenceLattice {
  std::array<Vec3, 12> R{};  // nearest-neighbor shell, closed under inversion
  double a = 4.0;
  double r_cut = 3.0;
  QcVolume volume_mode = QcVolume::atomic;

  static QCReferenceLattice fcc(double a = 4.0, double r_cut = 3.0,
                                QcVolume mode = QcVolume::atomic);
  double volume() const;
};

/// 1st Piola-Kirchhoff stress of the infinite lattice under uniform F:
/// P = (1/2V) sum_j Phi'(|F R_j|) / |F R_j| (F R_j) (x) R_j.
/// Throws std::invalid_argument if det F <= 0.
Mat3 qc_pk1(const Mat3& F, const PairPotential& p, const QCReferenceLattice& ref);

struct QcCauchyResult {
  Mat3 sigma;          // symmetrized push-forward
  double asymmetry;    // relative antisymmetry magnitude before symmetrizing
};

/// Cauchy stress from P: J^-1 P F^T (or J^-1 P F). The result is
/// symmetrized and the discarded asymmetry reported.
QcCauchyResult qc_cauchy(const Mat3& P, const Mat3& F,
                         QcPushForward mode = QcPushForward::PFt);

}  // namespace atomfield
