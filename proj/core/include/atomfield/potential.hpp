#pragma once

#include <vector>

#include "atomfield/geom.hpp"
#include "atomfield/lattice.hpp"

// Lennard-Jones pair potential Phi(r) = B/r^12 - A/r^6 and system-level
// force/energy assembly over reference neighbor lists.

namespace atomfield {

struct PairPotential {
  // Default B is exactly 256*A, which puts the equilibrium distance at
  // a/sqrt(2) for a = 4 exactly: the ideal lattice then carries zero force
  // and zero stress to the last bit.
  double A = 1.0239e8;
  double B = 2.621184e10;

  /// Phi(r). Throws std::invalid_argument for r <= 0.
  double phi(double r) const;

  /// dPhi/dr = -12B/r^13 + 6A/r^7. Throws std::invalid_argument for r <= 0.
  double dphi(double r) const;

  /// Pair-force scale in squared-distance form: g(u) = 6A/u^4 - 12B/u^7 with
  /// u = |r|^2, so that force = g(u) * r_vec and dphi(r) = g(r^2) * r.
  /// Evaluates to exactly zero at the ideal-lattice bond (u integral, B=256A).
  double pair_scale(double u) const { return 6.0 * A / ipow4(u) - 12.0 * B / ipow7(u); }

  /// Equilibrium distance (2B/A)^(1/6).
  double equilibrium_distance() const;

 private:
  static double ipow4(double u) { double u2 = u * u; return u2 * u2; }
  static double ipow7(double u) { double u2 = u * u; return u2 * u2 * u2 * u; }
};

/// Force on atom i through bond r_vec = x_j - x_i: (Phi'/|r|) r_vec.
/// Positive Phi' means attraction (force pulls i toward j). Throws on a
/// zero-length vector.
Vec3 pair_force(const PairPotential& p, const Vec3& r_vec);

/// Net force on every atom, evaluated with current positions over the
/// reference neighbor lists. Deterministic for any thread count (per-atom
/// writes only). Throws std::runtime_error on a zero-length bond.
std::vector<Vec3> assemble_forces(const AtomSystem& sys, const PairPotential& p,
                                  int threads = 1);

/// Total energy 1/2 sum_i sum_j phi(|x_j - x_i|): each bond counted once.
/// Deterministic for any thread count (fixed-order chunk reduction).
double total_energy(const AtomSystem& sys, const PairPotential& p, int threads = 1);

}  // namespace atomfield
