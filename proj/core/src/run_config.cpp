#include "atomfield/run_config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace atomfield {

namespace {

using njson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

int levenshtein(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    prev.swap(cur);
  }
  return prev[b.size()];
}

std::string where(const std::string& path, const std::string& key) {
  return path.empty() ? "\"" + key + "\"" : "\"" + path + "." + key + "\"";
}

/// Reject keys outside `allowed`, suggesting the closest valid one.
void check_keys(const njson& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    const std::string& key = item.key();
    bool known = false;
    for (const char* k : allowed)
      if (key == k) {
        known = true;
        break;
      }
    if (known) continue;
    const char* best = nullptr;
    int best_d = 0;
    for (const char* k : allowed) {
      int d = levenshtein(key, k);
      if (!best || d < best_d) {
        best = k;
        best_d = d;
      }
    }
    fail("unknown key " + where(path, key) + " (did you mean \"" +
         std::string(best) + "\"?)");
  }
}

const njson* find(const njson& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

njson require_object(const njson& v, const std::string& name) {
  if (!v.is_object()) fail("\"" + name + "\" must be an object");
  return v;
}

double get_number(const njson& obj, const std::string& path, const char* key,
                  double fallback) {
  const njson* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) fail(where(path, key) + " must be a number");
  return v->get<double>();
}

int get_int(const njson& obj, const std::string& path, const char* key,
            int fallback) {
  const njson* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) fail(where(path, key) + " must be an integer");
  return v->get<int>();
}

bool get_bool(const njson& obj, const std::string& path, const char* key,
              bool fallback) {
  const njson* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(where(path, key) + " must be a boolean");
  return v->get<bool>();
}

void require_range(bool ok, const std::string& path, const char* key,
                   const std::string& constraint) {
  if (!ok) fail(where(path, key) + " " + constraint);
}

ScenarioKind parse_scenario(const std::string& s) {
  if (s == "uniform") return ScenarioKind::uniform;
  if (s == "tensile") return ScenarioKind::tensile;
  if (s == "crack") return ScenarioKind::crack;
  if (s == "dislocation") return ScenarioKind::dislocation;
  if (s == "indentation") return ScenarioKind::indentation;
  fail("\"scenario\" must be one of \"uniform\", \"tensile\", \"crack\", "
       "\"dislocation\", \"indentation\" (got \"" + s + "\")");
}

LatticeConfig scenario_default_lattice(ScenarioKind k) {
  LatticeConfig lc;
  switch (k) {
    case ScenarioKind::uniform:
    case ScenarioKind::tensile:
      lc.nx = lc.ny = lc.nz = 8;
      break;
    case ScenarioKind::crack:
      lc.nx = 12;
      lc.ny = 3;
      lc.nz = 12;
      break;
    case ScenarioKind::dislocation:
      lc.nx = lc.ny = lc.nz = 10;
      break;
    case ScenarioKind::indentation:
      lc.nx = 10;
      lc.ny = 10;
      lc.nz = 6;
      break;
  }
  return lc;
}

}  // namespace

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::uniform: return "uniform";
    case ScenarioKind::tensile: return "tensile";
    case ScenarioKind::crack: return "crack";
    case ScenarioKind::dislocation: return "dislocation";
    case ScenarioKind::indentation: return "indentation";
  }
  return "unknown";
}

Mat3 default_uniform_strain() {
  return from_voigt6({0.010, 0.010, 0.020, 0.010, -0.008, 0.010});
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  njson j;
  try {
    j = njson::parse(text);
  } catch (const njson::parse_error& e) {
    fail(std::string("JSON parse error: ") + e.what());
  }
  if (!j.is_object()) fail("top-level JSON value must be an object");

  check_keys(j, "", {"scenario", "lattice", "potential", "relax", "recovery",
                     "qc", "loading", "output", "threads"});

  RunConfig cfg;
  if (const njson* v = find(j, "scenario")) {
    if (!v->is_string()) fail("\"scenario\" must be a string");
    cfg.scenario = parse_scenario(v->get<std::string>());
  }
  cfg.lattice = scenario_default_lattice(cfg.scenario);

  if (const njson* v = find(j, "lattice")) {
    njson o = require_object(*v, "lattice");
    check_keys(o, "lattice", {"nx", "ny", "nz", "a"});
    cfg.lattice_given = true;
    cfg.lattice.nx = get_int(o, "lattice", "nx", cfg.lattice.nx);
    cfg.lattice.ny = get_int(o, "lattice", "ny", cfg.lattice.ny);
    cfg.lattice.nz = get_int(o, "lattice", "nz", cfg.lattice.nz);
    cfg.lattice.a = get_number(o, "lattice", "a", cfg.lattice.a);
    require_range(cfg.lattice.nx >= 1, "lattice", "nx", "must be at least 1");
    require_range(cfg.lattice.ny >= 1, "lattice", "ny", "must be at least 1");
    require_range(cfg.lattice.nz >= 1, "lattice", "nz", "must be at least 1");
    require_range(cfg.lattice.a > 0.0, "lattice", "a", "must be positive");
  }

  if (const njson* v = find(j, "potential")) {
    njson o = require_object(*v, "potential");
    check_keys(o, "potential", {"A", "B", "r_cut"});
    cfg.potential.A = get_number(o, "potential", "A", cfg.potential.A);
    cfg.potential.B = get_number(o, "potential", "B", cfg.potential.B);
    cfg.lattice.r_cut = get_number(o, "potential", "r_cut", cfg.lattice.r_cut);
    require_range(cfg.potential.A > 0.0, "potential", "A", "must be positive");
    require_range(cfg.potential.B > 0.0, "potential", "B", "must be positive");
    require_range(cfg.lattice.r_cut > 0.0, "potential", "r_cut",
                  "must be positive");
  }
  require_range(cfg.lattice.r_cut < cfg.lattice.a, "potential", "r_cut",
                "must be below the lattice constant a (nearest-neighbor regime)");
  require_range(cfg.lattice.r_cut >= cfg.lattice.a / std::sqrt(2.0), "potential",
                "r_cut", "must reach the nearest-neighbor distance a/sqrt(2)");

  if (const njson* v = find(j, "relax")) {
    njson o = require_object(*v, "relax");
    check_keys(o, "relax", {"force_tolerance", "max_iterations"});
    cfg.relax.force_tolerance =
        get_number(o, "relax", "force_tolerance", cfg.relax.force_tolerance);
    cfg.relax.max_iterations =
        get_int(o, "relax", "max_iterations", cfg.relax.max_iterations);
    require_range(cfg.relax.force_tolerance > 0.0, "relax", "force_tolerance",
                  "must be positive");
    require_range(cfg.relax.max_iterations >= 1, "relax", "max_iterations",
                  "must be at least 1");
  }

  if (const njson* v = find(j, "recovery")) {
    njson o = require_object(*v, "recovery");
    check_keys(o, "recovery", {"lambda_factor", "cond_limit", "averaging_passes"});
    cfg.recovery.lambda_factor =
        get_number(o, "recovery", "lambda_factor", cfg.recovery.lambda_factor);
    cfg.recovery.cond_limit =
        get_number(o, "recovery", "cond_limit", cfg.recovery.cond_limit);
    cfg.recovery.averaging_passes =
        get_int(o, "recovery", "averaging_passes", cfg.recovery.averaging_passes);
    require_range(cfg.recovery.lambda_factor > 0.0, "recovery", "lambda_factor",
                  "must be positive");
    require_range(cfg.recovery.cond_limit > 1.0, "recovery", "cond_limit",
                  "must exceed 1");
    require_range(cfg.recovery.averaging_passes >= 0, "recovery",
                  "averaging_passes", "must be non-negative");
  }

  if (const njson* v = find(j, "qc")) {
    njson o = require_object(*v, "qc");
    check_keys(o, "qc", {"volume", "push_forward"});
    if (const njson* m = find(o, "volume")) {
      if (!m->is_string()) fail("\"qc.volume\" must be a string");
      std::string s = m->get<std::string>();
      if (s == "atomic")
        cfg.qc_volume = QcVolume::atomic;
      else if (s == "half_cutoff_sphere")
        cfg.qc_volume = QcVolume::half_cutoff_sphere;
      else
        fail("\"qc.volume\" must be \"atomic\" or \"half_cutoff_sphere\" (got \"" +
             s + "\")");
    }
    if (const njson* m = find(o, "push_forward")) {
      if (!m->is_string()) fail("\"qc.push_forward\" must be a string");
      std::string s = m->get<std::string>();
      if (s == "PFt")
        cfg.qc_push_forward = QcPushForward::PFt;
      else if (s == "PF")
        cfg.qc_push_forward = QcPushForward::PF;
      else
        fail("\"qc.push_forward\" must be \"PFt\" or \"PF\" (got \"" + s + "\")");
    }
  }

  if (const njson* v = find(j, "loading")) {
    njson o = require_object(*v, "loading");
    check_keys(o, "loading", {"E", "sweep", "crack", "dislocation", "indentation"});
    if (const njson* m = find(o, "E")) {
      if (!m->is_array() || m->size() != 6)
        fail("\"loading.E\" must be an array of 6 numbers "
             "(components 11, 22, 33, 12, 13, 23)");
      Voigt6 e{};
      for (size_t k = 0; k < 6; ++k) {
        if (!(*m)[k].is_number()) fail("\"loading.E\" must contain only numbers");
        e[k] = (*m)[k].get<double>();
        require_range(std::abs(e[k]) <= 0.1 + 1e-12, "loading", "E",
                      "components must have magnitude at most 0.1 "
                      "(the validated loading range)");
      }
      cfg.strain = from_voigt6(e);
    }
    if (const njson* m = find(o, "sweep")) {
      njson s = require_object(*m, "loading.sweep");
      check_keys(s, "loading.sweep", {"min", "max", "steps"});
      cfg.sweep.e33_min = get_number(s, "loading.sweep", "min", cfg.sweep.e33_min);
      cfg.sweep.e33_max = get_number(s, "loading.sweep", "max", cfg.sweep.e33_max);
      cfg.sweep.steps = get_int(s, "loading.sweep", "steps", cfg.sweep.steps);
      require_range(cfg.sweep.e33_min < cfg.sweep.e33_max, "loading.sweep", "min",
                    "must be below loading.sweep.max");
      require_range(std::abs(cfg.sweep.e33_min) <= 0.1 + 1e-12 &&
                        std::abs(cfg.sweep.e33_max) <= 0.1 + 1e-12,
                    "loading.sweep", "max",
                    "bounds must have magnitude at most 0.1 "
                    "(the validated loading range)");
      require_range(cfg.sweep.steps >= 1, "loading.sweep", "steps",
                    "must be at least 1");
    }
    if (const njson* m = find(o, "crack")) {
      njson s = require_object(*m, "loading.crack");
      check_keys(s, "loading.crack", {"span_fraction", "pull_e33"});
      cfg.crack.span_fraction =
          get_number(s, "loading.crack", "span_fraction", cfg.crack.span_fraction);
      cfg.crack.pull_e33 =
          get_number(s, "loading.crack", "pull_e33", cfg.crack.pull_e33);
      require_range(cfg.crack.span_fraction > 0.0 && cfg.crack.span_fraction <= 1.0,
                    "loading.crack", "span_fraction", "must lie in (0, 1]");
      require_range(std::abs(cfg.crack.pull_e33) <= 0.1 + 1e-12, "loading.crack",
                    "pull_e33", "must have magnitude at most 0.1 "
                    "(the validated loading range)");
    }
    if (const njson* m = find(o, "dislocation")) {
      njson s = require_object(*m, "loading.dislocation");
      check_keys(s, "loading.dislocation", {"nu"});
      cfg.dislocation.nu =
          get_number(s, "loading.dislocation", "nu", cfg.dislocation.nu);
      require_range(cfg.dislocation.nu > -1.0 && cfg.dislocation.nu < 0.5,
                    "loading.dislocation", "nu", "must lie in (-1, 0.5)");
    }
    if (const njson* m = find(o, "indentation")) {
      njson s = require_object(*m, "loading.indentation");
      check_keys(s, "loading.indentation",
                 {"footprint_fraction", "depth_fraction", "increments", "vacancies"});
      cfg.indentation.footprint_fraction =
          get_number(s, "loading.indentation", "footprint_fraction",
                     cfg.indentation.footprint_fraction);
      cfg.indentation.depth_fraction =
          get_number(s, "loading.indentation", "depth_fraction",
                     cfg.indentation.depth_fraction);
      cfg.indentation.increments =
          get_int(s, "loading.indentation", "increments", cfg.indentation.increments);
      cfg.indentation.vacancies =
          get_bool(s, "loading.indentation", "vacancies", cfg.indentation.vacancies);
      require_range(cfg.indentation.footprint_fraction > 0.0 &&
                        cfg.indentation.footprint_fraction < 1.0,
                    "loading.indentation", "footprint_fraction",
                    "must lie in (0, 1)");
      require_range(cfg.indentation.depth_fraction >= 0.0 &&
                        cfg.indentation.depth_fraction <= 1.0,
                    "loading.indentation", "depth_fraction", "must lie in [0, 1]");
      require_range(cfg.indentation.increments >= 1, "loading.indentation",
                    "increments", "must be at least 1");
    }
  }

  if (const njson* v = find(j, "output")) {
    njson o = require_object(*v, "output");
    check_keys(o, "output", {"field_csv", "vtk"});
    cfg.output.field_csv = get_bool(o, "output", "field_csv", cfg.output.field_csv);
    cfg.output.vtk = get_bool(o, "output", "vtk", cfg.output.vtk);
  }

  cfg.threads = get_int(j, "", "threads", cfg.threads);
  require_range(cfg.threads >= 1 && cfg.threads <= 256, "", "threads",
                "must lie in [1, 256]");
  cfg.relax.threads = cfg.threads;
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open file \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string RunConfig::resolved_json() const {
  njson j;
  j["scenario"] = to_string(scenario);
  j["lattice"] = {{"nx", lattice.nx}, {"ny", lattice.ny}, {"nz", lattice.nz},
                  {"a", lattice.a}};
  j["potential"] = {{"A", potential.A}, {"B", potential.B},
                    {"r_cut", lattice.r_cut}};
  j["relax"] = {{"force_tolerance", relax.force_tolerance},
                {"max_iterations", relax.max_iterations}};
  j["recovery"] = {{"lambda_factor", recovery.lambda_factor},
                   {"cond_limit", recovery.cond_limit},
                   {"averaging_passes", recovery.averaging_passes}};
  j["qc"] = {{"volume", qc_volume == QcVolume::atomic ? "atomic"
                                                      : "half_cutoff_sphere"},
             {"push_forward", qc_push_forward == QcPushForward::PFt ? "PFt" : "PF"}};
  njson loading;
  switch (scenario) {
    case ScenarioKind::uniform: {
      Voigt6 e = to_voigt6(strain);
      loading["E"] = {e[0], e[1], e[2], e[3], e[4], e[5]};
      break;
    }
    case ScenarioKind::tensile:
      loading["sweep"] = {{"min", sweep.e33_min}, {"max", sweep.e33_max},
                          {"steps", sweep.steps}};
      break;
    case ScenarioKind::crack:
      loading["crack"] = {{"span_fraction", crack.span_fraction},
                          {"pull_e33", crack.pull_e33}};
      break;
    case ScenarioKind::dislocation:
      loading["dislocation"] = {{"nu", dislocation.nu}};
      break;
    case ScenarioKind::indentation:
      loading["indentation"] = {{"footprint_fraction", indentation.footprint_fraction},
                                {"depth_fraction", indentation.depth_fraction},
                                {"increments", indentation.increments},
                                {"vacancies", indentation.vacancies}};
      break;
  }
  j["loading"] = loading;
  j["output"] = {{"field_csv", output.field_csv}, {"vtk", output.vtk}};
  j["threads"] = threads;
  return j.dump(2);
}

}  // namespace atomfield
