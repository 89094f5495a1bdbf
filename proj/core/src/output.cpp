#include "atomfield/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "atomfield/tensor.hpp"

namespace atomfield {

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path +
                             ": " + ec.message());
  }
}

namespace {

void append_vec(std::ostringstream& os, const Vec3& v) {
  os << ',' << format_g9(v.x) << ',' << format_g9(v.y) << ',' << format_g9(v.z);
}

void append_voigt6(std::ostringstream& os, const Voigt6& v) {
  for (double c : v) os << ',' << format_g9(c);
}

}  // namespace

void write_lattice_csv(const std::string& path, const AtomSystem& sys) {
  std::ostringstream os;
  os << "id,X1,X2,X3,fixed,coordination\n";
  for (int i = 0; i < sys.size(); ++i) {
    os << i;
    append_vec(os, sys.X[i]);
    os << ',' << (sys.fixed[i] ? 1 : 0) << ',' << sys.coordination(i) << '\n';
  }
  write_text_file(path, os.str());
}

void write_field_csv(const std::string& path, const AtomSystem& sys,
                     const FieldSnapshot& field) {
  size_t n = sys.X.size();
  bool has_avg = field.sigma_avg.size() == n;
  std::ostringstream os;
  os << "id,X1,X2,X3,x1,x2,x3,N_p,interior,"
        "F11,F12,F13,F21,F22,F23,F31,F32,F33,"
        "E11,E22,E33,E12,E13,E23,"
        "sigma_raw_11,sigma_raw_22,sigma_raw_33,sigma_raw_12,sigma_raw_13,sigma_raw_23,"
        "sigma_avg_11,sigma_avg_22,sigma_avg_33,sigma_avg_12,sigma_avg_13,sigma_avg_23,"
        "vm_raw,vm_avg,status\n";
  for (size_t i = 0; i < n; ++i) {
    os << i;
    append_vec(os, sys.X[i]);
    append_vec(os, sys.x[i]);
    os << ',' << field.n_p[i] << ',' << (field.interior[i] ? 1 : 0);
    Voigt9 f9 = flatten(field.F[i]);
    for (double c : f9) os << ',' << format_g9(c);
    append_voigt6(os, to_voigt6(field.E[i]));
    Mat3 avg = has_avg ? field.sigma_avg[i] : Mat3{};
    append_voigt6(os, to_voigt6(field.sigma_raw[i]));
    append_voigt6(os, to_voigt6(avg));
    os << ',' << format_g9(von_mises(field.sigma_raw[i])) << ','
       << format_g9(von_mises(avg));
    int status = std::max(static_cast<int>(field.F_status[i]),
                          static_cast<int>(field.sigma_status[i]));
    os << ',' << status << '\n';
  }
  write_text_file(path, os.str());
}

void write_convergence_csv(const std::string& path,
                           const std::vector<RelaxTracePoint>& trace) {
  std::ostringstream os;
  os << "iteration,energy,max_residual\n";
  for (const RelaxTracePoint& t : trace)
    os << t.iteration << ',' << format_g9(t.energy) << ','
       << format_g9(t.max_residual) << '\n';
  write_text_file(path, os.str());
}

void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& curve) {
  std::ostringstream os;
  os << "E33,sigma33_recovered,sigma33_ref,sigma33_qc\n";
  for (const CurvePoint& c : curve)
    os << format_g9(c.e33) << ',' << format_g9(c.sigma33_recovered) << ','
       << format_g9(c.sigma33_ref) << ',' << format_g9(c.sigma33_qc) << '\n';
  write_text_file(path, os.str());
}

void write_vtk(const std::string& path, const AtomSystem& sys,
               const FieldSnapshot& field) {
  size_t n = sys.X.size();
  bool has_avg = field.sigma_avg.size() == n;
  std::ostringstream os;
  os << "# vtk DataFile Version 3.0\n"
     << "atom point field\n"
     << "ASCII\n"
     << "DATASET UNSTRUCTURED_GRID\n"
     << "POINTS " << n << " double\n";
  for (size_t i = 0; i < n; ++i)
    os << format_g9(sys.x[i].x) << ' ' << format_g9(sys.x[i].y) << ' '
       << format_g9(sys.x[i].z) << '\n';
  os << "CELLS " << n << ' ' << 2 * n << '\n';
  for (size_t i = 0; i < n; ++i) os << "1 " << i << '\n';
  os << "CELL_TYPES " << n << '\n';
  for (size_t i = 0; i < n; ++i) os << "1\n";
  os << "POINT_DATA " << n << '\n'
     << "SCALARS vm_avg double 1\n"
     << "LOOKUP_TABLE default\n";
  for (size_t i = 0; i < n; ++i)
    os << format_g9(von_mises(has_avg ? field.sigma_avg[i] : Mat3{})) << '\n';
  os << "TENSORS sigma_avg double\n";
  for (size_t i = 0; i < n; ++i) {
    const Mat3 s = has_avg ? field.sigma_avg[i] : Mat3{};
    for (int a = 0; a < 3; ++a)
      os << format_g9(s(a, 0)) << ' ' << format_g9(s(a, 1)) << ' '
         << format_g9(s(a, 2)) << '\n';
  }
  write_text_file(path, os.str());
}

}  // namespace atomfield
