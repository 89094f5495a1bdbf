#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "atomfield/geom.hpp"

// FCC lattice construction, reference-configuration neighbor lists, and
// boundary bookkeeping.

namespace atomfield {

struct LatticeConfig {
  int nx = 8, ny = 8, nz = 8;   // conventional cells per axis
  double a = 4.0;               // lattice constant
  double r_cut = 3.0;           // interaction cutoff; nearest-neighbor-only regime
};

/// One reference-configuration bond. R = X_j - X_i is kept alongside the
/// index because recovery consumes reference vectors for every pair.
struct Bond {
  int j = -1;
  Vec3 R;
  double R_len = 0.0;
};

struct AtomSystem {
  std::vector<Vec3> X;                      // reference positions
  std::vector<Vec3> x;                      // current positions
  std::vector<std::uint8_t> fixed;          // boundary-constrained atoms
  std::vector<std::vector<Bond>> neighbors; // symmetric reference pairing
  Vec3 box_lo, box_hi;                      // reference bounding box
  double a = 4.0;
  double r_cut = 3.0;

  int size() const { return static_cast<int>(X.size()); }
  int coordination(int i) const { return static_cast<int>(neighbors[i].size()); }
};

/// Coordination of a defect-free interior FCC atom at the paper's a/r_cut.
inline constexpr int kFullCoordination = 12;

/// Build the FCC block: corner + face-center sites of nx x ny x nz
/// conventional cells, duplicates removed, ordered lexicographically by
/// position. x is initialized to X. Throws std::invalid_argument on invalid
/// config (non-positive sizes, r_cut outside the nearest-neighbor regime).
AtomSystem build_fcc(const LatticeConfig& cfg);

/// Fill neighbor lists from reference positions: all unordered pairs with
/// |X_j - X_i| <= r_cut, listed both ways. Spatial binning; output identical
/// to an all-pairs scan.
void build_neighbors(AtomSystem& sys);

/// Mark atoms lying on any of the six outermost lattice planes as fixed.
void classify_boundary(AtomSystem& sys);

/// Atoms with full coordination; statistics run over this mask ("surface
/// atoms are excluded from the final results").
std::vector<std::uint8_t> interior_mask(const AtomSystem& sys);

/// The six boundary faces in order +x,-x,+y,-y,+z,-z with member atoms and
/// reference areas. Edge and corner atoms appear on every face they lie on.
struct BoundaryFaces {
  std::array<std::vector<int>, 6> atoms;
  std::array<double, 6> area{};
};

/// Face membership and reference-bounding-box areas (deformation-induced
/// area change ignored). Throws on a degenerate box.
BoundaryFaces boundary_faces(const AtomSystem& sys);

/// Delete atoms by index (sorted/unique not required), reindex, and rebuild
/// neighbor lists from the remaining reference positions. Fixed flags of
/// surviving atoms are preserved; the reference bounding box is kept so
/// boundary faces still refer to the original hull.
void remove_atoms(AtomSystem& sys, std::vector<int> ids);

/// Brute-force all-pairs neighbor search; oracle for build_neighbors.
std::vector<std::vector<int>> all_pairs_within(const std::vector<Vec3>& pts, double r_cut);

}  // namespace atomfield
