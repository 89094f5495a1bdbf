#pragma once

#include <string>
#include <vector>

#include "atomfield/geom.hpp"
#include "atomfield/lattice.hpp"
#include "atomfield/recovery.hpp"
#include "atomfield/statics.hpp"

// Deterministic writers: CSV tables, a legacy-ASCII VTK point file, and the
// summary JSON. All floats print with 9 significant digits; no timestamps.

namespace atomfield {

/// %.9g formatting used by every writer.
std::string format_g9(double v);

/// id, X1..X3, fixed, coordination.
void write_lattice_csv(const std::string& path, const AtomSystem& sys);

/// Per-atom field table: id, reference and current positions, N_p, interior
/// flag, F (9), E (6), sigma_raw (6), sigma_avg (6), von Mises raw/avg, and a
/// status column (0 ok, 1 rank-deficient, 2 ill-conditioned).
void write_field_csv(const std::string& path, const AtomSystem& sys,
                     const FieldSnapshot& field);

/// iteration, energy, max_residual rows. Incremental-loading stages are
/// concatenated by the caller with pre-shifted iteration numbers.
void write_convergence_csv(const std::string& path,
                           const std::vector<RelaxTracePoint>& trace);

struct CurvePoint {
  double e33 = 0.0;
  double sigma33_recovered = 0.0;
  double sigma33_ref = 0.0;
  double sigma33_qc = 0.0;
};

/// E33, sigma33_recovered, sigma33_ref, sigma33_qc.
void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& curve);

/// Legacy ASCII VTK point cloud: POINT_DATA with SCALARS vm (averaged-field
/// von Mises) and TENSORS sigma (averaged stress).
void write_vtk(const std::string& path, const AtomSystem& sys,
               const FieldSnapshot& field);

/// Write text to path atomically enough for our purposes (temp + rename).
void write_text_file(const std::string& path, const std::string& text);

}  // namespace atomfield
