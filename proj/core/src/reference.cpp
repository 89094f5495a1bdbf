#include "atomfield/reference.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace atomfield {

BoundaryStressReport boundary_stress(const AtomSystem& sys,
                                     const std::vector<Vec3>& constraint) {
  if (constraint.size() != sys.X.size())
    throw std::invalid_argument(
        "boundary_stress: constraint vector length must match atom count");
  BoundaryFaces faces = boundary_faces(sys);

  // Traction estimate per face: sum of constraint forces / reference area.
  // Face order is +x, -x, +y, -y, +z, -z; outward normal of face -i is -e_i,
  // so the minus-face sum is negated to estimate the same stress row.
  Vec3 row_plus[3], row_minus[3];
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 sp{}, sm{};
    for (int id : faces.atoms[2 * axis]) sp += constraint[id];
    for (int id : faces.atoms[2 * axis + 1]) sm += constraint[id];
    row_plus[axis] = (1.0 / faces.area[2 * axis]) * sp;
    row_minus[axis] = (-1.0 / faces.area[2 * axis + 1]) * sm;
  }

  BoundaryStressReport rep;
  for (int axis = 0; axis < 3; ++axis)
    for (int c = 0; c < 3; ++c) {
      double p = row_plus[axis][c], m = row_minus[axis][c];
      rep.sigma(axis, c) = 0.5 * (p + m);
      rep.spread(axis, c) = std::abs(p - m);
    }
  return rep;
}

QCReferenceLattice QCReferenceLattice::fcc(double a, double r_cut, QcVolume mode) {
  if (a <= 0.0 || r_cut <= 0.0)
    throw std::invalid_argument("QCReferenceLattice: a and r_cut must be positive");
  QCReferenceLattice ref;
  ref.a = a;
  ref.r_cut = r_cut;
  ref.volume_mode = mode;
  // Nearest-neighbor shell: all permutations of (+-a/2, +-a/2, 0).
  double h = 0.5 * a;
  int k = 0;
  for (int s0 : {1, -1})
    for (int s1 : {1, -1}) {
      ref.R[k++] = {s0 * h, s1 * h, 0.0};
      ref.R[k++] = {s0 * h, 0.0, s1 * h};
      ref.R[k++] = {0.0, s0 * h, s1 * h};
    }
  return ref;
}

double QCReferenceLattice::volume() const {
  switch (volume_mode) {
    case QcVolume::atomic:
      return a * a * a / 4.0;
    case QcVolume::half_cutoff_sphere: {
      double rh = 0.5 * r_cut;
      return 4.0 / 3.0 * std::numbers::pi * rh * rh * rh;
    }
  }
  throw std::logic_error("QCReferenceLattice::volume: unknown mode");
}

Mat3 qc_pk1(const Mat3& F, const PairPotential& p, const QCReferenceLattice& ref) {
  if (det(F) <= 0.0)
    throw std::invalid_argument("qc_pk1: det(F) must be positive");
  Mat3 P{};
  for (const Vec3& R : ref.R) {
    Vec3 fr = F * R;
    double len = norm(fr);
    double scale = p.dphi(len) / len;
    P += scale * outer(fr, R);
  }
  P *= 1.0 / (2.0 * ref.volume());
  return P;
}

QcCauchyResult qc_cauchy(const Mat3& P, const Mat3& F, QcPushForward mode) {
  double J = det(F);
  if (J <= 0.0)
    throw std::invalid_argument("qc_cauchy: det(F) must be positive");
  Mat3 raw = (mode == QcPushForward::PFt) ? P * transpose(F) : P * F;
  raw *= 1.0 / J;
  QcCauchyResult out;
  out.asymmetry = antisymmetry(raw);
  out.sigma = symmetric_part(raw);
  return out;
}

}  // namespace atomfield
