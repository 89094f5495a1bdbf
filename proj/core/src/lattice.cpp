#include "atomfield/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace atomfield {

AtomSystem build_fcc(const LatticeConfig& cfg) {
  if (cfg.nx <= 0 || cfg.ny <= 0 || cfg.nz <= 0)
    throw std::invalid_argument("lattice: cell counts must be positive");
  if (cfg.a <= 0.0) throw std::invalid_argument("lattice: a must be positive");
  if (cfg.r_cut <= 0.0) throw std::invalid_argument("lattice: r_cut must be positive");
  if (cfg.r_cut >= cfg.a)
    throw std::invalid_argument(
        "lattice: r_cut must stay below a (nearest-neighbor-only regime)");
  if (cfg.r_cut < cfg.a / std::sqrt(2.0))
    throw std::invalid_argument("lattice: r_cut excludes the nearest-neighbor shell");

  AtomSystem sys;
  sys.a = cfg.a;
  sys.r_cut = cfg.r_cut;

  // Corner + face-center sites on the half-spacing grid: (a/2)(i,j,k) with
  // i+j+k even. Ascending loop order gives lexicographic position order.
  double h = cfg.a / 2.0;
  for (int i = 0; i <= 2 * cfg.nx; ++i)
    for (int j = 0; j <= 2 * cfg.ny; ++j)
      for (int k = 0; k <= 2 * cfg.nz; ++k) {
        if ((i + j + k) % 2 != 0) continue;
        sys.X.push_back({h * i, h * j, h * k});
      }

  sys.x = sys.X;
  sys.fixed.assign(sys.X.size(), 0);
  sys.box_lo = {0.0, 0.0, 0.0};
  sys.box_hi = {cfg.a * cfg.nx, cfg.a * cfg.ny, cfg.a * cfg.nz};
  build_neighbors(sys);
  return sys;
}

void build_neighbors(AtomSystem& sys) {
  const int n = sys.size();
  sys.neighbors.assign(n, {});
  if (n == 0) return;

  // Cell binning at the cutoff length.
  Vec3 lo = sys.X[0], hi = sys.X[0];
  for (const Vec3& p : sys.X)
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min(lo[c], p[c]);
      hi[c] = std::max(hi[c], p[c]);
    }
  double cell = sys.r_cut;
  int gx = std::max(1, static_cast<int>((hi.x - lo.x) / cell) + 1);
  int gy = std::max(1, static_cast<int>((hi.y - lo.y) / cell) + 1);
  int gz = std::max(1, static_cast<int>((hi.z - lo.z) / cell) + 1);

  auto bin_of = [&](const Vec3& p) {
    int bx = std::min(gx - 1, static_cast<int>((p.x - lo.x) / cell));
    int by = std::min(gy - 1, static_cast<int>((p.y - lo.y) / cell));
    int bz = std::min(gz - 1, static_cast<int>((p.z - lo.z) / cell));
    return (bx * gy + by) * gz + bz;
  };

  std::vector<std::vector<int>> bins(static_cast<size_t>(gx) * gy * gz);
  for (int i = 0; i < n; ++i) bins[bin_of(sys.X[i])].push_back(i);

  const double rc2 = sys.r_cut * sys.r_cut;
  for (int i = 0; i < n; ++i) {
    const Vec3& p = sys.X[i];
    int bx = std::min(gx - 1, static_cast<int>((p.x - lo.x) / cell));
    int by = std::min(gy - 1, static_cast<int>((p.y - lo.y) / cell));
    int bz = std::min(gz - 1, static_cast<int>((p.z - lo.z) / cell));
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          int cx = bx + dx, cy = by + dy, cz = bz + dz;
          if (cx < 0 || cy < 0 || cz < 0 || cx >= gx || cy >= gy || cz >= gz) continue;
          for (int j : bins[(static_cast<size_t>(cx) * gy + cy) * gz + cz]) {
            if (j == i) continue;
            Vec3 R = sys.X[j] - sys.X[i];
            double r2 = norm2(R);
            if (r2 <= rc2) sys.neighbors[i].push_back({j, R, std::sqrt(r2)});
          }
        }
    // Deterministic bond order regardless of binning layout.
    std::sort(sys.neighbors[i].begin(), sys.neighbors[i].end(),
              [](const Bond& a, const Bond& b) { return a.j < b.j; });
  }
}

void classify_boundary(AtomSystem& sys) {
  const double tol = 1e-9 * std::max(1.0, sys.a);
  sys.fixed.assign(sys.X.size(), 0);
  for (int i = 0; i < sys.size(); ++i)
    for (int c = 0; c < 3; ++c)
      if (sys.X[i][c] <= sys.box_lo[c] + tol || sys.X[i][c] >= sys.box_hi[c] - tol) {
        sys.fixed[i] = 1;
        break;
      }
}

std::vector<std::uint8_t> interior_mask(const AtomSystem& sys) {
  std::vector<std::uint8_t> mask(sys.X.size(), 0);
  for (int i = 0; i < sys.size(); ++i)
    mask[i] = sys.coordination(i) == kFullCoordination ? 1 : 0;
  return mask;
}

BoundaryFaces boundary_faces(const AtomSystem& sys) {
  BoundaryFaces faces;
  Vec3 extent = sys.box_hi - sys.box_lo;
  if (extent.x <= 0 || extent.y <= 0 || extent.z <= 0)
    throw std::invalid_argument("boundary_faces: degenerate reference box");

  // Face order +x,-x,+y,-y,+z,-z; area of face +-c is the product of the two
  // other reference extents.
  for (int c = 0; c < 3; ++c) {
    double area = 1.0;
    for (int o = 0; o < 3; ++o)
      if (o != c) area *= extent[o];
    faces.area[2 * c] = faces.area[2 * c + 1] = area;
  }

  const double tol = 1e-9 * std::max(1.0, sys.a);
  for (int i = 0; i < sys.size(); ++i)
    for (int c = 0; c < 3; ++c) {
      if (sys.X[i][c] >= sys.box_hi[c] - tol) faces.atoms[2 * c].push_back(i);
      if (sys.X[i][c] <= sys.box_lo[c] + tol) faces.atoms[2 * c + 1].push_back(i);
    }
  return faces;
}

void remove_atoms(AtomSystem& sys, std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.empty()) return;
  for (int id : ids)
    if (id < 0 || id >= sys.size())
      throw std::invalid_argument("remove_atoms: index out of range");

  std::vector<std::uint8_t> drop(sys.X.size(), 0);
  for (int id : ids) drop[id] = 1;

  AtomSystem out;
  out.a = sys.a;
  out.r_cut = sys.r_cut;
  out.box_lo = sys.box_lo;
  out.box_hi = sys.box_hi;
  for (int i = 0; i < sys.size(); ++i) {
    if (drop[i]) continue;
    out.X.push_back(sys.X[i]);
    out.x.push_back(sys.x[i]);
    out.fixed.push_back(sys.fixed[i]);
  }
  build_neighbors(out);
  sys = std::move(out);
}

std::vector<std::vector<int>> all_pairs_within(const std::vector<Vec3>& pts,
                                               double r_cut) {
  const int n = static_cast<int>(pts.size());
  std::vector<std::vector<int>> nb(n);
  const double rc2 = r_cut * r_cut;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (norm2(pts[j] - pts[i]) <= rc2) {
        nb[i].push_back(j);
        nb[j].push_back(i);
      }
  return nb;
}

}  // namespace atomfield
