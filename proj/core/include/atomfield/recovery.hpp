#pragma once

#include <cstdint>
#include <vector>

#include "atomfield/geom.hpp"
#include "atomfield/lattice.hpp"
#include "atomfield/potential.hpp"

// Per-atom least-squares recovery of the deformation gradient, strain, and
// stress fields, plus the neighbor-averaging correction.

namespace atomfield {

enum class RecoveryStatus : std::uint8_t {
  ok = 0,
  rank_deficient = 1,   // fewer than 3 linearly independent bonds
  ill_conditioned = 2,  // neighborhood Gram condition above the limit
};

struct RecoveryConfig {
  // Symmetry-penalty weight: lambda = lambda_factor * trace(d^T d).
  // Calibrated so the antisymmetry residual stays <= 1e-6 on all scenarios
  // (the residual scales as 1/lambda_factor; 1e6 leaves two orders of margin).
  double lambda_factor = 1e6;
  // Neighborhood-geometry condition limit (eigenvalue ratio of the 3x3 bond
  // Gram): beyond it the atom is flagged and excluded from statistics.
  double cond_limit = 1e8;
  // Eq.-37 smoothing applications; the reference procedure applies it once.
  int averaging_passes = 1;
};

/// Per-atom recovered fields. Arrays are indexed by atom; entries with
/// status != ok hold zeros and are excluded from statistics.
struct FieldSnapshot {
  std::vector<Mat3> F;
  std::vector<Mat3> E;
  std::vector<Mat3> sigma_raw;
  std::vector<Mat3> sigma_avg;
  std::vector<RecoveryStatus> F_status;
  std::vector<RecoveryStatus> sigma_status;
  std::vector<double> F_condition;      // Gram eigenvalue ratio diagnostics
  std::vector<double> sigma_condition;
  std::vector<int> n_p;
  std::vector<std::uint8_t> interior;
};

/// Empirical characteristic area A_c = 4 pi (|R|/2)^2 / N_p converting a bond
/// force into a traction.
double characteristic_area(double R_len, int n_p);

/// Least-squares deformation gradient at atom i: minimizer of
/// sum_j |F R_j - r_j|^2. Exact when the neighborhood moved affinely.
Mat3 recover_F_atom(const AtomSystem& sys, int i, RecoveryStatus* status = nullptr,
                    double* condition = nullptr);

/// Penalized least-squares Cauchy stress at atom i (normal equations of the
/// stacked traction system with the antisymmetry penalty).
Mat3 recover_sigma_atom(const AtomSystem& sys, const PairPotential& p, int i,
                        const RecoveryConfig& cfg, RecoveryStatus* status = nullptr,
                        double* condition = nullptr);

/// Stacked LS system for the deformation gradient at atom i: D is 3*N_p x 9
/// (row-major), b stacks the deformed bond vectors. D * flatten(F) = b holds
/// exactly for affine motion. Exposed for oracle comparison in tests.
void assemble_D(const AtomSystem& sys, int i, std::vector<double>& D,
                std::vector<double>& b);

/// Stacked traction system for the stress at atom i: d is 3*N_p x 9
/// (row-major), b stacks (Phi'_j / A_c_j) r_j. Exposed for oracle comparison.
void assemble_stress_system(const AtomSystem& sys, const PairPotential& p, int i,
                            std::vector<double>& d, std::vector<double>& b);

/// Row-major 3x9 antisymmetry constraint (rows: 12-21, 13-31, 23-32 in the
/// 9-slot Voigt order).
extern const double kAntisymmetryConstraint[3][9];

/// Recover F, E (Green-Lagrange of F), and raw sigma for every atom.
/// sigma_avg is left empty until average_sigma runs.
FieldSnapshot recover_fields(const AtomSystem& sys, const PairPotential& p,
                             const RecoveryConfig& cfg);

/// Neighbor-weighted smoothing sigma_bar_i = 1/2 sigma_i + (1/2 N_p) sum_j
/// sigma_j, applied cfg.averaging_passes times (Jacobi sweeps). Neighbors
/// without a valid raw stress are dropped and the weights renormalized.
void average_sigma(FieldSnapshot& field, const AtomSystem& sys, const RecoveryConfig& cfg);

/// Per-component mean/std (population) over interior atoms with ok status.
struct ComponentStats {
  Voigt6 mean{};
  Voigt6 stdev{};
  int count = 0;
};

ComponentStats interior_stats(const std::vector<Mat3>& field,
                              const std::vector<RecoveryStatus>& status,
                              const std::vector<std::uint8_t>& interior);

}  // namespace atomfield
