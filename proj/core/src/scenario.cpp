#include "atomfield/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "atomfield/tensor.hpp"

namespace atomfield {

void volterra_edge_displacement(double s, double t, double b, double nu,
                                double& u_s, double& u_t) {
  double r2 = s * s + t * t;
  if (r2 <= 0.0)
    throw std::invalid_argument(
        "volterra_edge_displacement: evaluation on the core line");
  double pre = b / (2.0 * std::numbers::pi);
  double om = 1.0 - nu;
  u_s = pre * (std::atan2(t, s) + s * t / (2.0 * om * r2));
  u_t = -pre * ((1.0 - 2.0 * nu) / (4.0 * om) * std::log(r2) +
                (s * s - t * t) / (4.0 * om * r2));
}

namespace {

namespace fs = std::filesystem;
using njson = nlohmann::ordered_json;

Mat3 uniaxial_stretch(double e33) {
  double c = 1.0 + 2.0 * e33;
  if (c <= 0.0)
    throw std::invalid_argument("uniaxial_stretch: 1 + 2 E33 must be positive");
  return Mat3::diag(1.0, 1.0, std::sqrt(c));
}

/// Drive the fixed atoms to x = F(E) X in load increments small enough for
/// the line search (single step when max |E_ij| <= 0.02, otherwise ~0.01
/// slices), warm-starting the free atoms with the affine increment. Returns
/// the final stage's result with the concatenated trace.
RelaxResult staged_relax(AtomSystem& sys, const PairPotential& p,
                         const RelaxParams& rp, const Mat3& E_target,
                         const Mat3& F_start) {
  double emax = max_abs(E_target);
  int stages = emax <= 0.02 ? 1 : static_cast<int>(std::ceil(emax / 0.01));

  RelaxResult combined;
  Mat3 F_prev = F_start;
  int iter_offset = 0;
  for (int k = 1; k <= stages; ++k) {
    double frac = static_cast<double>(k) / stages;
    Mat3 F_k = stretch_from_strain(frac * E_target);
    Mat3 dF = F_k - F_prev;
    for (int i = 0; i < sys.size(); ++i) {
      if (sys.fixed[i])
        sys.x[i] = F_k * sys.X[i];
      else
        sys.x[i] += dF * sys.X[i];
    }
    RelaxResult stage;
    try {
      stage = relax(sys, p, rp);
    } catch (RelaxError& err) {
      for (RelaxTracePoint t : err.result.trace) {
        t.iteration += iter_offset;
        combined.trace.push_back(t);
      }
      combined.converged = false;
      combined.iterations = iter_offset + err.result.iterations;
      combined.energy = err.result.energy;
      combined.max_residual = err.result.max_residual;
      throw RelaxError(err.what(), combined);
    }
    for (RelaxTracePoint t : stage.trace) {
      t.iteration += iter_offset;
      combined.trace.push_back(t);
    }
    iter_offset += stage.iterations;
    combined.converged = stage.converged;
    combined.iterations = iter_offset;
    combined.energy = stage.energy;
    combined.max_residual = stage.max_residual;
    F_prev = F_k;
  }
  return combined;
}

struct FieldBundle {
  FieldSnapshot field;
  ComponentStats strain, raw, avg;
  double max_antisym = 0.0;
};

FieldBundle recover_and_average(const AtomSystem& sys, const PairPotential& p,
                                const RecoveryConfig& rc) {
  FieldBundle fb;
  fb.field = recover_fields(sys, p, rc);
  average_sigma(fb.field, sys, rc);
  fb.strain = interior_stats(fb.field.E, fb.field.F_status, fb.field.interior);
  fb.raw = interior_stats(fb.field.sigma_raw, fb.field.sigma_status, fb.field.interior);
  fb.avg = interior_stats(fb.field.sigma_avg, fb.field.sigma_status, fb.field.interior);
  for (int i = 0; i < sys.size(); ++i)
    if (fb.field.sigma_status[i] == RecoveryStatus::ok)
      fb.max_antisym = std::max(fb.max_antisym, antisymmetry(fb.field.sigma_raw[i]));
  return fb;
}

Voigt6 pct_errors(const Voigt6& mean, const Mat3& ref) {
  Voigt6 refv = to_voigt6(ref);
  double scale = 0.0;
  for (double v : refv) scale = std::max(scale, std::abs(v));
  Voigt6 err{};
  for (int k = 0; k < 6; ++k)
    if (std::abs(refv[k]) > 1e-9 * scale && refv[k] != 0.0)
      err[k] = 100.0 * (mean[k] - refv[k]) / std::abs(refv[k]);
  return err;
}

njson voigt6_json(const Voigt6& v) {
  return njson::array({v[0], v[1], v[2], v[3], v[4], v[5]});
}

njson stats_json(const ComponentStats& s) {
  return njson{{"mean", voigt6_json(s.mean)},
               {"std", voigt6_json(s.stdev)},
               {"count", s.count}};
}

njson mat3_json(const Mat3& m) {
  njson rows = njson::array();
  for (int a = 0; a < 3; ++a) rows.push_back({m(a, 0), m(a, 1), m(a, 2)});
  return rows;
}

/// Averaged-field von Mises extremum over free atoms with a valid stress.
void fill_vm_extremum(const AtomSystem& sys, const FieldSnapshot& field,
                      ScenarioReport& rep) {
  rep.vm_max = 0.0;
  rep.vm_argmax = -1;
  for (int i = 0; i < sys.size(); ++i) {
    if (sys.fixed[i] || field.sigma_status[i] != RecoveryStatus::ok) continue;
    double vm = von_mises(field.sigma_avg[i]);
    if (rep.vm_argmax < 0 || vm > rep.vm_max) {
      rep.vm_max = vm;
      rep.vm_argmax = i;
      rep.vm_argmax_X = sys.X[i];
    }
  }
}

struct SummaryExtras {
  bool has_qc = false;
  Mat3 qc_pk1_tensor;
  njson qualitative;  // null unless a defect scenario fills it
};

void write_artifacts(const RunConfig& cfg, const AtomSystem& sys,
                     const FieldBundle& fb, const ScenarioReport& rep,
                     const SummaryExtras& extras) {
  fs::create_directories(rep.outdir);
  auto at = [&](const char* name) { return (fs::path(rep.outdir) / name).string(); };

  write_lattice_csv(at("lattice.csv"), sys);
  if (cfg.output.field_csv) write_field_csv(at("field.csv"), sys, fb.field);
  write_convergence_csv(at("convergence.csv"), rep.relax.trace);
  if (cfg.output.vtk) write_vtk(at("field.vtk"), sys, fb.field);
  if (!rep.curve.empty()) write_curve_csv(at("curve.csv"), rep.curve);

  njson j;
  j["schema_version"] = 1;
  j["config"] = njson::parse(cfg.resolved_json());
  j["scenario"] = to_string(cfg.scenario);
  j["partial"] = rep.partial;
  j["relax"] = {{"converged", rep.relax.converged},
                {"iterations", rep.relax.iterations},
                {"energy", rep.relax.energy},
                {"max_residual", rep.relax.max_residual}};
  j["fields"] = {{"strain", stats_json(rep.strain_stats)},
                 {"sigma_raw", stats_json(rep.raw_stats)},
                 {"sigma_avg", stats_json(rep.avg_stats)}};
  njson refs;
  refs["boundary"] = {{"sigma", voigt6_json(to_voigt6(rep.boundary.sigma))},
                      {"spread", voigt6_json(to_voigt6(rep.boundary.spread))}};
  if (extras.has_qc) {
    refs["qc"] = {{"pk1", mat3_json(extras.qc_pk1_tensor)},
                  {"cauchy", voigt6_json(to_voigt6(rep.qc_sigma))},
                  {"volume_mode",
                   cfg.qc_volume == QcVolume::atomic ? "atomic" : "half_cutoff_sphere"},
                  {"push_forward",
                   cfg.qc_push_forward == QcPushForward::PFt ? "PFt" : "PF"},
                  {"asymmetry", rep.qc_asymmetry}};
  }
  j["references"] = refs;
  j["errors_vs_reference"] = {{"raw_pct", voigt6_json(rep.raw_err_pct)},
                              {"avg_pct", voigt6_json(rep.avg_err_pct)}};
  j["max_antisymmetry"] = rep.max_antisymmetry;
  if (!rep.curve.empty()) {
    njson curve = njson::array();
    for (const CurvePoint& c : rep.curve)
      curve.push_back({{"E33", c.e33},
                       {"sigma33_recovered", c.sigma33_recovered},
                       {"sigma33_ref", c.sigma33_ref},
                       {"sigma33_qc", c.sigma33_qc}});
    j["curve"] = curve;
  }
  if (!extras.qualitative.is_null()) j["qualitative"] = extras.qualitative;
  write_text_file(at("summary.json"), j.dump(2) + "\n");
}

/// Shared tail of every run: recover fields, compute references and errors,
/// fill the report, write artifacts.
FieldBundle finish_run(const RunConfig& cfg, AtomSystem& sys, ScenarioReport& rep,
                       SummaryExtras extras = {}) {
  FieldBundle fb = recover_and_average(sys, cfg.potential, cfg.recovery);
  rep.strain_stats = fb.strain;
  rep.raw_stats = fb.raw;
  rep.avg_stats = fb.avg;
  rep.max_antisymmetry = fb.max_antisym;
  rep.boundary = boundary_stress(sys, constraint_forces(sys, cfg.potential, cfg.threads));
  rep.raw_err_pct = pct_errors(fb.raw.mean, rep.boundary.sigma);
  rep.avg_err_pct = pct_errors(fb.avg.mean, rep.boundary.sigma);
  write_artifacts(cfg, sys, fb, rep, extras);
  return fb;
}

SummaryExtras qc_extras(const RunConfig& cfg, const Mat3& F, ScenarioReport& rep) {
  SummaryExtras extras;
  QCReferenceLattice ref =
      QCReferenceLattice::fcc(cfg.lattice.a, cfg.lattice.r_cut, cfg.qc_volume);
  extras.has_qc = true;
  extras.qc_pk1_tensor = qc_pk1(F, cfg.potential, ref);
  QcCauchyResult qc = qc_cauchy(extras.qc_pk1_tensor, F, cfg.qc_push_forward);
  rep.qc_sigma = qc.sigma;
  rep.qc_asymmetry = qc.asymmetry;
  return extras;
}

// ---------------------------------------------------------------------------
// uniform

ScenarioReport run_uniform(const RunConfig& cfg, const std::string& outdir) {
  ScenarioReport rep;
  rep.scenario = cfg.scenario;
  rep.outdir = outdir;

  AtomSystem sys = build_fcc(cfg.lattice);
  classify_boundary(sys);
  rep.relax = staged_relax(sys, cfg.potential, cfg.relax, cfg.strain,
                           Mat3::identity());

  Mat3 F = stretch_from_strain(cfg.strain);
  SummaryExtras extras = qc_extras(cfg, F, rep);
  finish_run(cfg, sys, rep, extras);
  return rep;
}

// ---------------------------------------------------------------------------
// tensile sweep

ScenarioReport run_tensile(const RunConfig& cfg, const std::string& outdir) {
  ScenarioReport rep;
  rep.scenario = cfg.scenario;
  rep.outdir = outdir;

  AtomSystem sys = build_fcc(cfg.lattice);
  classify_boundary(sys);

  // Strain grid, ascending, with values snapped to exact zero where the
  // arithmetic only misses it by round-off.
  int npts = cfg.sweep.steps + 1;
  std::vector<double> grid(npts);
  double span = cfg.sweep.e33_max - cfg.sweep.e33_min;
  for (int k = 0; k < npts; ++k) {
    double e = cfg.sweep.e33_min + span * k / cfg.sweep.steps;
    grid[k] = std::abs(e) < 1e-12 * span ? 0.0 : e;
  }
  int i0 = 0;
  for (int k = 1; k < npts; ++k)
    if (std::abs(grid[k]) < std::abs(grid[i0])) i0 = k;

  std::vector<CurvePoint> points(npts);
  std::vector<bool> done(npts, false);
  QCReferenceLattice qc_ref =
      QCReferenceLattice::fcc(cfg.lattice.a, cfg.lattice.r_cut, cfg.qc_volume);

  RelaxResult combined;
  int iter_offset = 0;
  Mat3 last_F = Mat3::identity();

  auto run_point = [&](int k, const Mat3& F_prev) -> Mat3 {
    Mat3 F = uniaxial_stretch(grid[k]);
    Mat3 dF = F - F_prev;
    for (int i = 0; i < sys.size(); ++i) {
      if (sys.fixed[i])
        sys.x[i] = F * sys.X[i];
      else
        sys.x[i] += dF * sys.X[i];
    }
    RelaxResult stage = relax(sys, cfg.potential, cfg.relax);
    for (RelaxTracePoint t : stage.trace) {
      t.iteration += iter_offset;
      combined.trace.push_back(t);
    }
    iter_offset += stage.iterations;
    combined.converged = stage.converged;
    combined.iterations = iter_offset;
    combined.energy = stage.energy;
    combined.max_residual = stage.max_residual;

    FieldBundle fb = recover_and_average(sys, cfg.potential, cfg.recovery);
    BoundaryStressReport bnd =
        boundary_stress(sys, constraint_forces(sys, cfg.potential, cfg.threads));
    QcCauchyResult qc =
        qc_cauchy(qc_pk1(F, cfg.potential, qc_ref), F, cfg.qc_push_forward);
    points[k] = {grid[k], fb.avg.mean[2], bnd.sigma(2, 2), qc.sigma(2, 2)};
    done[k] = true;
    rep.max_antisymmetry = std::max(rep.max_antisymmetry, fb.max_antisym);
    last_F = F;
    return F;
  };

  auto save_partial_and_rethrow = [&](RelaxError& err) {
    rep.partial = true;
    rep.relax = combined;
    for (int k = 0; k < npts; ++k)
      if (done[k]) rep.curve.push_back(points[k]);
    SummaryExtras extras = qc_extras(cfg, last_F, rep);
    FieldBundle fb = recover_and_average(sys, cfg.potential, cfg.recovery);
    rep.strain_stats = fb.strain;
    rep.raw_stats = fb.raw;
    rep.avg_stats = fb.avg;
    rep.boundary =
        boundary_stress(sys, constraint_forces(sys, cfg.potential, cfg.threads));
    rep.raw_err_pct = pct_errors(fb.raw.mean, rep.boundary.sigma);
    rep.avg_err_pct = pct_errors(fb.avg.mean, rep.boundary.sigma);
    write_artifacts(cfg, sys, fb, rep, extras);
    throw RelaxError(err.what(), combined);
  };

  // March from the unloaded state outward in both directions so every stage
  // warm-starts from its neighbor.
  try {
    Mat3 F_prev = run_point(i0, Mat3::identity());
    for (int k = i0 + 1; k < npts; ++k) F_prev = run_point(k, F_prev);
  } catch (RelaxError& err) {
    save_partial_and_rethrow(err);
  }
  std::vector<Vec3> x_top = sys.x;  // final state of the ascending branch
  for (int i = 0; i < sys.size(); ++i) sys.x[i] = sys.X[i];
  try {
    Mat3 F_prev = Mat3::identity();
    for (int k = i0 - 1; k >= 0; --k) F_prev = run_point(k, F_prev);
  } catch (RelaxError& err) {
    save_partial_and_rethrow(err);
  }

  // Report fields describe the maximum-tension endpoint.
  sys.x = std::move(x_top);
  rep.relax = combined;
  for (int k = 0; k < npts; ++k) rep.curve.push_back(points[k]);
  SummaryExtras extras = qc_extras(cfg, uniaxial_stretch(grid[npts - 1]), rep);
  finish_run(cfg, sys, rep, extras);
  return rep;
}

// ---------------------------------------------------------------------------
// crack

ScenarioReport run_crack(const RunConfig& cfg, const std::string& outdir) {
  ScenarioReport rep;
  rep.scenario = cfg.scenario;
  rep.outdir = outdir;

  AtomSystem sys = build_fcc(cfg.lattice);
  double lx = sys.box_hi.x - sys.box_lo.x;
  double zc = 0.5 * (sys.box_lo.z + sys.box_hi.z);
  double span = cfg.crack.span_fraction * lx;
  double x_lo = sys.box_lo.x + 0.5 * (lx - span);
  double x_hi = x_lo + span;
  double tol = 1e-9 * sys.a;

  std::vector<int> doomed;
  double rm_x_lo = 0.0, rm_x_hi = 0.0;
  for (int i = 0; i < sys.size(); ++i) {
    const Vec3& X = sys.X[i];
    if (std::abs(X.z - zc) > tol) continue;
    if (X.x < x_lo - tol || X.x > x_hi + tol) continue;
    if (doomed.empty()) {
      rm_x_lo = rm_x_hi = X.x;
    } else {
      rm_x_lo = std::min(rm_x_lo, X.x);
      rm_x_hi = std::max(rm_x_hi, X.x);
    }
    doomed.push_back(i);
  }
  if (doomed.empty())
    throw std::invalid_argument("crack: the layer span contains no atoms");
  remove_atoms(sys, doomed);
  classify_boundary(sys);

  Mat3 E = Mat3::diag(0.0, 0.0, cfg.crack.pull_e33);
  rep.relax = staged_relax(sys, cfg.potential, cfg.relax, E, Mat3::identity());

  Mat3 F = stretch_from_strain(E);
  SummaryExtras extras = qc_extras(cfg, F, rep);

  // Qualitative gates: crack-corner rings (in-plane distance to the two
  // crack-front lines) versus the mid-face atoms immediately above/below.
  FieldBundle fb = recover_and_average(sys, cfg.potential, cfg.recovery);
  fill_vm_extremum(sys, fb.field, rep);
  double ring_r = 0.75 * sys.a;
  double face_dz = 0.5 * sys.a;
  auto front_dist = [&](const Vec3& X) {
    double d1 = std::hypot(X.x - rm_x_lo, X.z - zc);
    double d2 = std::hypot(X.x - rm_x_hi, X.z - zc);
    return std::min(d1, d2);
  };
  rep.crack_face_vm_max = 0.0;
  for (int i = 0; i < sys.size(); ++i) {
    if (sys.fixed[i] || fb.field.sigma_status[i] != RecoveryStatus::ok) continue;
    const Vec3& X = sys.X[i];
    bool on_face = std::abs(std::abs(X.z - zc) - face_dz) <= tol &&
                   X.x >= rm_x_lo - tol && X.x <= rm_x_hi + tol;
    if (on_face && front_dist(X) > ring_r)
      rep.crack_face_vm_max =
          std::max(rep.crack_face_vm_max, von_mises(fb.field.sigma_avg[i]));
  }
  rep.crack_max_on_corner =
      rep.vm_argmax >= 0 && front_dist(rep.vm_argmax_X) <= ring_r;

  extras.qualitative = njson{
      {"vm_max", rep.vm_max},
      {"vm_argmax", rep.vm_argmax},
      {"vm_argmax_X", {rep.vm_argmax_X.x, rep.vm_argmax_X.y, rep.vm_argmax_X.z}},
      {"crack_face_vm_max", rep.crack_face_vm_max},
      {"crack_max_on_corner", rep.crack_max_on_corner},
      {"front_lines_x", {rm_x_lo, rm_x_hi}},
      {"layer_z", zc}};

  rep.strain_stats = fb.strain;
  rep.raw_stats = fb.raw;
  rep.avg_stats = fb.avg;
  rep.max_antisymmetry = fb.max_antisym;
  rep.boundary = boundary_stress(sys, constraint_forces(sys, cfg.potential, cfg.threads));
  rep.raw_err_pct = pct_errors(fb.raw.mean, rep.boundary.sigma);
  rep.avg_err_pct = pct_errors(fb.avg.mean, rep.boundary.sigma);
  write_artifacts(cfg, sys, fb, rep, extras);
  return rep;
}

// ---------------------------------------------------------------------------
// dislocation

/// Deformed-configuration neighbor rebuild for the slipped crystal: pairs
/// within r_cut of each other *now*; bonds with no reference-configuration
/// counterpart get the nearest ideal nearest-neighbor vector as R.
void rebuild_bonds_from_current(AtomSystem& sys) {
  std::array<Vec3, 12> ideal{};
  {
    double h = 0.5 * sys.a;
    int k = 0;
    for (int s0 : {1, -1})
      for (int s1 : {1, -1}) {
        ideal[k++] = {s0 * h, s1 * h, 0.0};
        ideal[k++] = {s0 * h, 0.0, s1 * h};
        ideal[k++] = {0.0, s0 * h, s1 * h};
      }
  }
  std::vector<std::vector<int>> pairs = all_pairs_within(sys.x, sys.r_cut);
  for (int i = 0; i < sys.size(); ++i) {
    sys.neighbors[i].clear();
    for (int j : pairs[i]) {
      Vec3 dX = sys.X[j] - sys.X[i];
      Vec3 R;
      if (norm(dX) <= sys.r_cut) {
        R = dX;
      } else {
        Vec3 dx = sys.x[j] - sys.x[i];
        int best_k = 0;
        double best = norm2(dx - ideal[0]);
        for (int k = 1; k < 12; ++k) {
          double d = norm2(dx - ideal[k]);
          if (d < best) {
            best = d;
            best_k = k;
          }
        }
        R = ideal[best_k];
      }
      sys.neighbors[i].push_back({j, R, norm(R)});
    }
  }
}

ScenarioReport run_dislocation(const RunConfig& cfg, const std::string& outdir) {
  ScenarioReport rep;
  rep.scenario = cfg.scenario;
  rep.outdir = outdir;

  AtomSystem sys = build_fcc(cfg.lattice);
  classify_boundary(sys);

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Vec3 e1{inv_sqrt2, inv_sqrt2, 0.0};   // Burgers direction [110]/sqrt(2)
  Vec3 e3{0.0, 0.0, 1.0};               // glide-plane normal
  double b_mag = sys.a * inv_sqrt2;     // |1/2 [110] a|
  double nu = cfg.dislocation.nu;

  // Core line along [-110] through the block center, set between (001)
  // planes and nudged off the atom rows so no atom sits on the singularity.
  Vec3 center = 0.5 * (sys.box_lo + sys.box_hi);
  double zc = center.z - 0.25 * sys.a;
  Vec3 core{center.x + 0.125 * sys.a, center.y + 0.125 * sys.a, zc};

  for (int i = 0; i < sys.size(); ++i) {
    Vec3 rel = sys.X[i] - core;
    double s = dot(rel, e1);
    double t = sys.X[i].z - zc;
    double us = 0.0, ut = 0.0;
    volterra_edge_displacement(s, t, b_mag, nu, us, ut);
    sys.x[i] = sys.X[i] + us * e1 + ut * e3;
  }
  rebuild_bonds_from_current(sys);

  rep.relax = relax(sys, cfg.potential, cfg.relax);

  FieldBundle fb = recover_and_average(sys, cfg.potential, cfg.recovery);
  fill_vm_extremum(sys, fb.field, rep);

  // sigma_zz split across the glide plane near the core, and ring-averaged
  // |sigma_zz| decay away from it.
  double near_r = 2.0 * sys.a;
  double sum_above = 0.0, sum_below = 0.0;
  int n_above = 0, n_below = 0;
  std::vector<double> ring_sum(3, 0.0);
  std::vector<int> ring_n(3, 0);
  for (int i = 0; i < sys.size(); ++i) {
    if (sys.fixed[i] || fb.field.sigma_status[i] != RecoveryStatus::ok) continue;
    Vec3 rel = sys.X[i] - core;
    double s = dot(rel, e1);
    double t = sys.X[i].z - zc;
    double rho = std::hypot(s, t);
    double szz = fb.field.sigma_avg[i](2, 2);
    if (rho <= near_r) {
      if (t > 0.0) {
        sum_above += szz;
        ++n_above;
      } else {
        sum_below += szz;
        ++n_below;
      }
    }
    int ring = static_cast<int>(std::floor(rho / sys.a)) - 1;
    if (ring >= 0 && ring < 3) {
      ring_sum[ring] += std::abs(szz);
      ++ring_n[ring];
    }
  }
  rep.disl_szz_above = n_above > 0 ? sum_above / n_above : 0.0;
  rep.disl_szz_below = n_below > 0 ? sum_below / n_below : 0.0;
  rep.disl_ring_abs_szz.assign(3, 0.0);
  for (int k = 0; k < 3; ++k)
    rep.disl_ring_abs_szz[k] = ring_n[k] > 0 ? ring_sum[k] / ring_n[k] : 0.0;

  // Burgers circuit in the seed displacement field: sum the increments of
  // u_s around a dense loop, unwrapping the branch-cut jump. The circuit
  // closes with a deficit of exactly one Burgers vector.
  {
    const int m = 4096;
    double rho = 3.0 * sys.a;
    double closure = 0.0;
    double us_prev = 0.0, ut_prev = 0.0;
    volterra_edge_displacement(rho, 0.0, b_mag, nu, us_prev, ut_prev);
    for (int k = 1; k <= m; ++k) {
      double th = 2.0 * std::numbers::pi * k / m;
      double us = 0.0, ut = 0.0;
      volterra_edge_displacement(rho * std::cos(th), rho * std::sin(th), b_mag,
                                 nu, us, ut);
      double d = us - us_prev;
      if (d > 0.5 * b_mag) d -= b_mag;
      if (d < -0.5 * b_mag) d += b_mag;
      closure += d;
      us_prev = us;
    }
    rep.burgers_circuit_error = std::abs(std::abs(closure) - b_mag) / b_mag;
  }

  SummaryExtras extras;
  extras.qualitative = njson{
      {"vm_max", rep.vm_max},
      {"vm_argmax", rep.vm_argmax},
      {"vm_argmax_X", {rep.vm_argmax_X.x, rep.vm_argmax_X.y, rep.vm_argmax_X.z}},
      {"szz_above", rep.disl_szz_above},
      {"szz_below", rep.disl_szz_below},
      {"ring_abs_szz", rep.disl_ring_abs_szz},
      {"burgers_circuit_error", rep.burgers_circuit_error},
      {"burgers_magnitude", b_mag},
      {"core", {core.x, core.y, core.z}}};

  rep.strain_stats = fb.strain;
  rep.raw_stats = fb.raw;
  rep.avg_stats = fb.avg;
  rep.max_antisymmetry = fb.max_antisym;
  rep.boundary = boundary_stress(sys, constraint_forces(sys, cfg.potential, cfg.threads));
  rep.raw_err_pct = pct_errors(fb.raw.mean, rep.boundary.sigma);
  rep.avg_err_pct = pct_errors(fb.avg.mean, rep.boundary.sigma);
  write_artifacts(cfg, sys, fb, rep, extras);
  return rep;
}

// ---------------------------------------------------------------------------
// indentation

ScenarioReport run_indentation(const RunConfig& cfg, const std::string& outdir) {
  ScenarioReport rep;
  rep.scenario = cfg.scenario;
  rep.outdir = outdir;

  AtomSystem sys = build_fcc(cfg.lattice);
  double tol = 1e-9 * sys.a;
  double lx = sys.box_hi.x - sys.box_lo.x;
  double ly = sys.box_hi.y - sys.box_lo.y;
  double top = sys.box_hi.z;
  double cx = 0.5 * (sys.box_lo.x + sys.box_hi.x);
  double cy = 0.5 * (sys.box_lo.y + sys.box_hi.y);
  double w = cfg.indentation.footprint_fraction * std::min(lx, ly);

  auto in_footprint_xy = [&](const Vec3& X) {
    return std::abs(X.x - cx) <= 0.5 * w + tol &&
           std::abs(X.y - cy) <= 0.5 * w + tol;
  };

  std::vector<Vec3> vacancy_sites;
  if (cfg.indentation.vacancies) {
    std::vector<int> doomed;
    double layer_z = top - 0.5 * sys.a;
    for (int i = 0; i < sys.size(); ++i)
      if (std::abs(sys.X[i].z - layer_z) <= tol && in_footprint_xy(sys.X[i])) {
        doomed.push_back(i);
        vacancy_sites.push_back(sys.X[i]);
      }
    if (doomed.empty())
      throw std::invalid_argument(
          "indentation: no atoms in the vacancy layer beneath the footprint");
    remove_atoms(sys, doomed);
  }

  // Bottom face fixed, sides free, footprint atoms on the top face fixed and
  // driven downward in increments.
  std::vector<int> footprint;
  for (int i = 0; i < sys.size(); ++i) {
    if (std::abs(sys.X[i].z - sys.box_lo.z) <= tol) sys.fixed[i] = 1;
    if (std::abs(sys.X[i].z - top) <= tol && in_footprint_xy(sys.X[i])) {
      sys.fixed[i] = 1;
      footprint.push_back(i);
    }
  }
  if (footprint.empty())
    throw std::invalid_argument("indentation: the footprint contains no atoms");

  double depth = cfg.indentation.depth_fraction * sys.a;
  RelaxResult combined;
  int iter_offset = 0;
  for (int k = 1; k <= cfg.indentation.increments; ++k) {
    double dz = depth * k / cfg.indentation.increments;
    for (int i : footprint) sys.x[i] = sys.X[i] - Vec3{0.0, 0.0, dz};
    RelaxResult stage;
    try {
      stage = relax(sys, cfg.potential, cfg.relax);
    } catch (RelaxError& err) {
      for (RelaxTracePoint t : err.result.trace) {
        t.iteration += iter_offset;
        combined.trace.push_back(t);
      }
      combined.converged = false;
      combined.iterations = iter_offset + err.result.iterations;
      combined.energy = err.result.energy;
      combined.max_residual = err.result.max_residual;
      throw RelaxError(err.what(), combined);
    }
    for (RelaxTracePoint t : stage.trace) {
      t.iteration += iter_offset;
      combined.trace.push_back(t);
    }
    iter_offset += stage.iterations;
    combined.converged = stage.converged;
    combined.iterations = iter_offset;
    combined.energy = stage.energy;
    combined.max_residual = stage.max_residual;
  }
  rep.relax = combined;

  FieldBundle fb = recover_and_average(sys, cfg.potential, cfg.recovery);
  fill_vm_extremum(sys, fb.field, rep);
  if (!vacancy_sites.empty() && rep.vm_argmax >= 0) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& v : vacancy_sites)
      best = std::min(best, norm(rep.vm_argmax_X - v));
    rep.nearest_vacancy_dist = best;
  }

  SummaryExtras extras;
  extras.qualitative = njson{
      {"vm_max", rep.vm_max},
      {"vm_argmax", rep.vm_argmax},
      {"vm_argmax_X", {rep.vm_argmax_X.x, rep.vm_argmax_X.y, rep.vm_argmax_X.z}},
      {"footprint_half_width", 0.5 * w},
      {"footprint_center", {cx, cy, top}},
      {"vacancies", static_cast<int>(vacancy_sites.size())},
      {"nearest_vacancy_dist", rep.nearest_vacancy_dist}};

  rep.strain_stats = fb.strain;
  rep.raw_stats = fb.raw;
  rep.avg_stats = fb.avg;
  rep.max_antisymmetry = fb.max_antisym;
  rep.boundary = boundary_stress(sys, constraint_forces(sys, cfg.potential, cfg.threads));
  rep.raw_err_pct = pct_errors(fb.raw.mean, rep.boundary.sigma);
  rep.avg_err_pct = pct_errors(fb.avg.mean, rep.boundary.sigma);
  write_artifacts(cfg, sys, fb, rep, extras);
  return rep;
}

}  // namespace

ScenarioReport run_scenario(const RunConfig& cfg, const std::string& outdir) {
  switch (cfg.scenario) {
    case ScenarioKind::uniform: return run_uniform(cfg, outdir);
    case ScenarioKind::tensile: return run_tensile(cfg, outdir);
    case ScenarioKind::crack: return run_crack(cfg, outdir);
    case ScenarioKind::dislocation: return run_dislocation(cfg, outdir);
    case ScenarioKind::indentation: return run_indentation(cfg, outdir);
  }
  throw std::logic_error("run_scenario: unknown scenario kind");
}

}  // namespace atomfield
