#pragma once

#include <stdexcept>
#include <vector>

#include "atomfield/geom.hpp"
#include "atomfield/lattice.hpp"
#include "atomfield/potential.hpp"

// Displacement boundary conditions and static relaxation of the free atoms.

namespace atomfield {

struct RelaxParams {
  double force_tolerance = 1e-8;  // max |force component| on free atoms
  int max_iterations = 50000;
  int threads = 1;
};

struct RelaxTracePoint {
  int iteration = 0;
  double energy = 0.0;
  double max_residual = 0.0;
};

struct RelaxResult {
  bool converged = false;
  int iterations = 0;
  double energy = 0.0;
  double max_residual = 0.0;
  std::vector<RelaxTracePoint> trace;  // one row per iteration plus the final state
};

/// Thrown when relaxation exhausts max_iterations or the energy becomes
/// non-finite; carries the partial result so callers can still persist the
/// convergence trace.
class RelaxError : public std::runtime_error {
 public:
  RelaxError(const std::string& what, RelaxResult partial)
      : std::runtime_error(what), result(std::move(partial)) {}
  RelaxResult result;
};

/// Move fixed atoms to x = F X (u_bc = (F - I) X_bc); free atoms untouched.
/// Throws std::invalid_argument if det F <= 0.
void apply_uniform_bc(AtomSystem& sys, const Mat3& F);

/// Nonlinear conjugate gradient (Polak-Ribiere with restarts) with a
/// backtracking line search on the free-atom coordinates. Fixed atoms are
/// eliminated from the variables, never penalized. Deterministic for any
/// thread count. Throws RelaxError on iteration exhaustion or non-finite
/// energy.
RelaxResult relax(AtomSystem& sys, const PairPotential& p, const RelaxParams& params);

/// External force needed to hold each fixed atom in place:
/// -(net interatomic force). Zero entries for free atoms.
std::vector<Vec3> constraint_forces(const AtomSystem& sys, const PairPotential& p,
                                    int threads = 1);

}  // namespace atomfield
