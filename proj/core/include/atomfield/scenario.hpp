#pragma once

#include <string>
#include <vector>

#include "atomfield/output.hpp"
#include "atomfield/recovery.hpp"
#include "atomfield/reference.hpp"
#include "atomfield/run_config.hpp"
#include "atomfield/statics.hpp"

// Experiment runners. Each writes its artifacts (lattice/field/convergence
// CSVs, summary JSON, optional VTK) into an output directory and returns the
// numbers the test gates consume.

namespace atomfield {

struct ScenarioReport {
  ScenarioKind scenario = ScenarioKind::uniform;
  std::string outdir;
  bool partial = false;  // a sweep aborted mid-way; partial artifacts saved

  // Final relaxation stage.
  RelaxResult relax;

  // Interior statistics of the recovered fields (Green-Lagrange strain in
  // Voigt-6 order; raw and averaged stress).
  ComponentStats strain_stats;
  ComponentStats raw_stats;
  ComponentStats avg_stats;

  // References and per-component errors of the interior means against the
  // boundary estimate.
  BoundaryStressReport boundary;
  Mat3 qc_sigma;
  double qc_asymmetry = 0.0;
  Voigt6 raw_err_pct{};
  Voigt6 avg_err_pct{};

  // Worst relative antisymmetry of the raw recovered stress over ok atoms.
  double max_antisymmetry = 0.0;

  // Tensile sweep.
  std::vector<CurvePoint> curve;

  // Defect scenarios: averaged-field von Mises extremum over free atoms.
  double vm_max = 0.0;
  int vm_argmax = -1;
  Vec3 vm_argmax_X;

  // Crack: largest von Mises among atoms lining the crack faces away from
  // the corners, and whether the global max sits on a crack-corner atom.
  double crack_face_vm_max = 0.0;
  bool crack_max_on_corner = false;

  // Dislocation: near-core mean sigma_zz above/below the glide plane,
  // ring-averaged |sigma_zz| at growing radii, and the closure of a Burgers
  // circuit taken in the seed displacement field (should equal |b|).
  double disl_szz_above = 0.0;
  double disl_szz_below = 0.0;
  std::vector<double> disl_ring_abs_szz;
  double burgers_circuit_error = 0.0;  // relative to |b|

  // Indentation (vacancy variant): distance from the von Mises argmax to the
  // nearest deleted atom site; -1 when no vacancies.
  double nearest_vacancy_dist = -1.0;
};

/// Run the configured scenario, writing artifacts under outdir (created if
/// needed). Throws on configuration or relaxation errors; the tensile sweep
/// saves partial artifacts and marks the summary partial before rethrowing.
ScenarioReport run_scenario(const RunConfig& cfg, const std::string& outdir);

/// Volterra isotropic edge-dislocation displacement at in-plane coordinates
/// (s, t) relative to the core, for Burgers magnitude b and Poisson ratio nu:
/// returns (u_s, u_t). Exposed for the circuit test.
void volterra_edge_displacement(double s, double t, double b, double nu,
                                double& u_s, double& u_t);

}  // namespace atomfield
