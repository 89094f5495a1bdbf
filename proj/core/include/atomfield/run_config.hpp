#pragma once

#include <optional>
#include <string>

#include "atomfield/geom.hpp"
#include "atomfield/lattice.hpp"
#include "atomfield/potential.hpp"
#include "atomfield/recovery.hpp"
#include "atomfield/reference.hpp"
#include "atomfield/statics.hpp"

// Declarative run configuration: JSON in, validated struct out. Unknown keys
// are rejected with a nearest-key suggestion; every range violation names the
// offending key. Defaults reproduce the published uniform-loading experiment.

namespace atomfield {

enum class ScenarioKind { uniform, tensile, crack, dislocation, indentation };

std::string to_string(ScenarioKind k);

struct SweepSpec {
  double e33_min = -0.1;
  double e33_max = 0.1;
  int steps = 20;  // intervals; the grid has steps+1 points and includes 0
};

struct CrackSpec {
  double span_fraction = 0.5;  // central x-extent of the removed (001) layer
  double pull_e33 = 0.04;
};

struct DislocationSpec {
  double nu = 0.3;  // Poisson ratio of the Volterra seed field
};

struct IndentationSpec {
  double footprint_fraction = 0.35;  // square footprint edge / top-face edge
  double depth_fraction = 0.5;       // indentation depth / lattice constant
  int increments = 5;
  bool vacancies = false;  // delete one atom layer beneath the footprint
};

struct OutputSpec {
  bool field_csv = true;
  bool vtk = true;
};

/// The published combined loading (strain components 11,22,33,12,13,23 =
/// 0.010, 0.010, 0.020, 0.010, -0.008, 0.010).
Mat3 default_uniform_strain();

struct RunConfig {
  ScenarioKind scenario = ScenarioKind::uniform;
  LatticeConfig lattice;         // per-scenario default size if not given
  bool lattice_given = false;
  PairPotential potential;
  RelaxParams relax;
  RecoveryConfig recovery;
  QcVolume qc_volume = QcVolume::atomic;
  QcPushForward qc_push_forward = QcPushForward::PFt;

  Mat3 strain = default_uniform_strain();  // uniform scenario loading
  SweepSpec sweep;
  CrackSpec crack;
  DislocationSpec dislocation;
  IndentationSpec indentation;
  OutputSpec output;
  int threads = 1;

  /// Parse + validate a JSON document. Throws std::invalid_argument with a
  /// key-specific diagnostic on malformed input, unknown keys, or
  /// out-of-range values.
  static RunConfig from_json_text(const std::string& text);

  /// Read the file and parse. Distinguishes missing-file from parse errors.
  static RunConfig from_file(const std::string& path);

  /// Resolved configuration (defaults filled) serialized back to JSON text;
  /// embedded in every summary for provenance.
  std::string resolved_json() const;
};

}  // namespace atomfield
