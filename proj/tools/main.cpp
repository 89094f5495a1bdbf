// Command-line front end: run a scenario, validate a configuration, or
// summarize a completed run directory.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "atomfield/output.hpp"
#include "atomfield/run_config.hpp"
#include "atomfield/scenario.hpp"
#include "atomfield/version.hpp"

namespace fs = std::filesystem;
using njson = nlohmann::ordered_json;

namespace {

atomfield::RunConfig load_config(const std::string& path, int threads_flag) {
  atomfield::RunConfig cfg = path.empty()
                                 ? atomfield::RunConfig::from_json_text("{}")
                                 : atomfield::RunConfig::from_file(path);
  if (threads_flag > 0) {
    cfg.threads = threads_flag;
    cfg.relax.threads = threads_flag;
  }
  return cfg;
}

std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%12.4f", v);
  return buf;
}

void print_row(std::ostream& os, const std::string& label,
               const std::array<double, 6>& v) {
  os << label;
  for (int k = static_cast<int>(label.size()); k < 18; ++k) os << ' ';
  for (double c : v) os << cell(c);
  os << '\n';
}

std::array<double, 6> json6(const njson& arr) {
  std::array<double, 6> out{};
  for (int k = 0; k < 6; ++k) out[k] = arr.at(k).get<double>();
  return out;
}

/// Table-2-style console block: one column per component, one row per
/// estimate, plus error and scatter rows.
void print_summary_table(std::ostream& os, const njson& summary) {
  os << "scenario: " << summary.at("scenario").get<std::string>() << '\n';
  const njson& relax = summary.at("relax");
  os << "relax: converged=" << (relax.at("converged").get<bool>() ? "yes" : "no")
     << " iterations=" << relax.at("iterations").get<long long>()
     << " max_residual=" << relax.at("max_residual").get<double>() << '\n';
  if (summary.at("partial").get<bool>())
    os << "WARNING: partial run — a sweep stage failed; results below cover "
          "the completed stages\n";

  os << "\ncomponent         ";
  for (const char* c : {"11", "22", "33", "12", "13", "23"}) {
    os << "          " << c;
  }
  os << '\n';
  const njson& fields = summary.at("fields");
  print_row(os, "strain mean", json6(fields.at("strain").at("mean")));
  print_row(os, "strain std", json6(fields.at("strain").at("std")));

  const njson& refs = summary.at("references");
  print_row(os, "sigma^ref", json6(refs.at("boundary").at("sigma")));
  if (refs.contains("qc"))
    print_row(os, "sigma^QC", json6(refs.at("qc").at("cauchy")));
  print_row(os, "sigma^mean", json6(fields.at("sigma_raw").at("mean")));
  print_row(os, "Err(sigma^mean)%",
            json6(summary.at("errors_vs_reference").at("raw_pct")));
  print_row(os, "sigma^int", json6(fields.at("sigma_avg").at("mean")));
  print_row(os, "Err(sigma^int)%",
            json6(summary.at("errors_vs_reference").at("avg_pct")));
  print_row(os, "Std(sigma^mean)", json6(fields.at("sigma_raw").at("std")));
  print_row(os, "Std(sigma^int)", json6(fields.at("sigma_avg").at("std")));
  os << "\ninterior atoms: " << fields.at("strain").at("count").get<long long>()
     << "   max antisymmetry: " << summary.at("max_antisymmetry").get<double>()
     << '\n';
}

void print_monotonicity(std::ostream& os, const njson& summary) {
  if (!summary.contains("curve")) {
    os << "monotonicity: n/a (no sweep in this run)\n";
    return;
  }
  const njson& curve = summary.at("curve");
  bool monotone = true;
  double prev = 0.0;
  bool first = true;
  for (const njson& pt : curve) {
    double s = pt.at("sigma33_recovered").get<double>();
    if (!first && s <= prev) monotone = false;
    prev = s;
    first = false;
  }
  os << "monotonicity: recovered sigma33 is "
     << (monotone ? "strictly increasing" : "NOT monotone") << " over "
     << curve.size() << " sweep points\n";
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            int threads_flag) {
  atomfield::RunConfig cfg = load_config(config_path, threads_flag);
  atomfield::run_scenario(cfg, out_dir);

  std::ifstream in(fs::path(out_dir) / "summary.json");
  njson summary = njson::parse(in);
  print_summary_table(std::cout, summary);
  print_monotonicity(std::cout, summary);
  std::cout << "artifacts written to " << out_dir << '\n';
  return 0;
}

int cmd_validate(const std::string& config_path) {
  atomfield::RunConfig cfg = atomfield::RunConfig::from_file(config_path);
  std::cout << "OK: valid " << to_string(cfg.scenario)
            << " configuration\n" << cfg.resolved_json() << '\n';
  return 0;
}

/// Split one CSV line; the writers never quote, so this is a plain split.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

/// Plot-ready extracts: a depth profile of the stress field (boundary-layer
/// analogue), the sweep curve, and the deformed-position von Mises cloud.
void write_report_csvs(const fs::path& dir, const njson& summary) {
  fs::path field_csv = dir / "field.csv";
  if (fs::exists(field_csv)) {
    std::ifstream in(field_csv);
    std::string header;
    std::getline(in, header);
    std::vector<std::string> cols = split_csv(header);
    std::map<std::string, size_t> idx;
    for (size_t k = 0; k < cols.size(); ++k) idx[cols[k]] = k;

    std::ostringstream profile, cloud;
    profile << "id,X3,interior,sigma_raw_33,sigma_avg_33,vm_raw,vm_avg\n";
    cloud << "id,x1,x2,x3,vm_avg\n";
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f = split_csv(line);
      profile << f[idx.at("id")] << ',' << f[idx.at("X3")] << ','
              << f[idx.at("interior")] << ',' << f[idx.at("sigma_raw_33")] << ','
              << f[idx.at("sigma_avg_33")] << ',' << f[idx.at("vm_raw")] << ','
              << f[idx.at("vm_avg")] << '\n';
      cloud << f[idx.at("id")] << ',' << f[idx.at("x1")] << ','
            << f[idx.at("x2")] << ',' << f[idx.at("x3")] << ','
            << f[idx.at("vm_avg")] << '\n';
    }
    atomfield::write_text_file((dir / "report_profile.csv").string(), profile.str());
    atomfield::write_text_file((dir / "report_vm_cloud.csv").string(), cloud.str());
  }
  if (summary.contains("curve")) {
    std::ostringstream os;
    os << "E33,sigma33_recovered,sigma33_ref,sigma33_qc\n";
    for (const njson& pt : summary.at("curve"))
      os << atomfield::format_g9(pt.at("E33").get<double>()) << ','
         << atomfield::format_g9(pt.at("sigma33_recovered").get<double>()) << ','
         << atomfield::format_g9(pt.at("sigma33_ref").get<double>()) << ','
         << atomfield::format_g9(pt.at("sigma33_qc").get<double>()) << '\n';
    atomfield::write_text_file((dir / "report_curve.csv").string(), os.str());
  }
}

int cmd_report(const std::string& out_dir) {
  fs::path dir(out_dir);
  fs::path summary_path = dir / "summary.json";
  if (!fs::exists(summary_path))
    throw std::runtime_error("no summary.json in \"" + out_dir +
                             "\" — not a completed run directory");
  std::ifstream in(summary_path);
  njson summary;
  try {
    summary = njson::parse(in);
  } catch (const njson::parse_error& e) {
    throw std::runtime_error("corrupt summary.json in \"" + out_dir +
                             "\": " + e.what());
  }
  print_summary_table(std::cout, summary);
  print_monotonicity(std::cout, summary);
  write_report_csvs(dir, summary);
  std::cout << "report CSVs written to " << out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Atomistic field recovery: relax an FCC block and reconstruct "
               "per-atom strain and stress fields"};
  app.set_version_flag("--version", atomfield::kVersionString);
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 0;

  CLI::App* run = app.add_subcommand("run", "Execute a scenario and write artifacts");
  run->add_option("--config", config_path,
                  "JSON configuration (omit for the built-in defaults)");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--threads", threads, "Worker thread cap (speed only, never results)");

  CLI::App* validate =
      app.add_subcommand("validate", "Check a configuration file and exit");
  validate->add_option("--config", config_path, "JSON configuration")->required();

  CLI::App* report =
      app.add_subcommand("report", "Summarize a completed run directory");
  report->add_option("--out", out_dir, "Run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, threads);
    if (validate->parsed()) return cmd_validate(config_path);
    if (report->parsed()) return cmd_report(out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
