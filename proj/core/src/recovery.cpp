#include "atomfield/recovery.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "atomfield/tensor.hpp"

namespace atomfield {

double characteristic_area(double R_len, int n_p) {
  if (n_p <= 0)
    throw std::invalid_argument("characteristic_area: n_p must be positive");
  if (R_len <= 0.0)
    throw std::invalid_argument("characteristic_area: R_len must be positive");
  // Sphere of radius |R|/2 around the atom, split evenly across the bonds.
  double half = 0.5 * R_len;
  return 4.0 * std::numbers::pi * half * half / static_cast<double>(n_p);
}

const double kAntisymmetryConstraint[3][9] = {
    // Voigt-9 slots: 11 12 13 21 22 23 31 32 33
    {0, 1, 0, -1, 0, 0, 0, 0, 0},   // s12 - s21
    {0, 0, 1, 0, 0, 0, -1, 0, 0},   // s13 - s31
    {0, 0, 0, 0, 0, 1, 0, -1, 0},   // s23 - s32
};

namespace {

constexpr double kRankEps = 1e-12;  // relative eigenvalue floor for "singular"

/// Eigen-decomposition of a symmetric 3x3 Gram matrix, exposing the
/// eigenvalue-ratio condition number and a pseudo-solve.
struct GramSolver {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
  bool singular = false;
  double condition = std::numeric_limits<double>::infinity();

  explicit GramSolver(const Mat3& g) {
    Eigen::Matrix3d gm;
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) gm(a, c) = g(a, c);
    es.compute(gm);
    double lo = es.eigenvalues()(0), hi = es.eigenvalues()(2);
    singular = !(lo > kRankEps * std::max(hi, 0.0)) || hi <= 0.0;
    if (!singular) condition = hi / lo;
  }

  Vec3 solve(const Vec3& t) const {
    Eigen::Vector3d tv(t.x, t.y, t.z);
    Eigen::Vector3d y = es.eigenvectors() *
                        (es.eigenvalues().cwiseInverse().asDiagonal() *
                         (es.eigenvectors().transpose() * tv));
    return {y(0), y(1), y(2)};
  }
};

Mat3 bond_gram(const AtomSystem& sys, int i, bool deformed) {
  Mat3 g{};
  for (const Bond& b : sys.neighbors[i]) {
    Vec3 v = deformed ? sys.x[b.j] - sys.x[i] : b.R;
    g += outer(v, v);
  }
  return g;
}

}  // namespace

Mat3 recover_F_atom(const AtomSystem& sys, int i, RecoveryStatus* status,
                    double* condition) {
  if (status) *status = RecoveryStatus::ok;
  if (condition) *condition = std::numeric_limits<double>::infinity();
  GramSolver gram(bond_gram(sys, i, /*deformed=*/false));
  if (gram.singular) {
    if (status) *status = RecoveryStatus::rank_deficient;
    return Mat3{};
  }
  if (condition) *condition = gram.condition;

  // Normal equations decouple by row: G_R F_row_a = sum_j (r_j)_a R_j.
  Mat3 F{};
  Vec3 t[3] = {};
  for (const Bond& b : sys.neighbors[i]) {
    Vec3 r = sys.x[b.j] - sys.x[i];
    t[0] += r.x * b.R;
    t[1] += r.y * b.R;
    t[2] += r.z * b.R;
  }
  for (int a = 0; a < 3; ++a) {
    Vec3 row = gram.solve(t[a]);
    F(a, 0) = row.x;
    F(a, 1) = row.y;
    F(a, 2) = row.z;
  }
  return F;
}

void assemble_D(const AtomSystem& sys, int i, std::vector<double>& D,
                std::vector<double>& b) {
  const auto& bonds = sys.neighbors[i];
  size_t np = bonds.size();
  D.assign(3 * np * 9, 0.0);
  b.assign(3 * np, 0.0);
  for (size_t j = 0; j < np; ++j) {
    Vec3 r = sys.x[bonds[j].j] - sys.x[i];
    const Vec3& R = bonds[j].R;
    for (int a = 0; a < 3; ++a) {
      double* row = D.data() + ((3 * j + a) * 9);
      row[3 * a + 0] = R.x;
      row[3 * a + 1] = R.y;
      row[3 * a + 2] = R.z;
      b[3 * j + a] = (a == 0) ? r.x : (a == 1) ? r.y : r.z;
    }
  }
}

void assemble_stress_system(const AtomSystem& sys, const PairPotential& p, int i,
                            std::vector<double>& d, std::vector<double>& b) {
  const auto& bonds = sys.neighbors[i];
  size_t np = bonds.size();
  d.assign(3 * np * 9, 0.0);
  b.assign(3 * np, 0.0);
  for (size_t j = 0; j < np; ++j) {
    Vec3 r = sys.x[bonds[j].j] - sys.x[i];
    double area = characteristic_area(bonds[j].R_len, static_cast<int>(np));
    double scale = p.dphi(norm(r)) / area;
    for (int a = 0; a < 3; ++a) {
      double* row = d.data() + ((3 * j + a) * 9);
      row[3 * a + 0] = r.x;
      row[3 * a + 1] = r.y;
      row[3 * a + 2] = r.z;
      b[3 * j + a] = scale * ((a == 0) ? r.x : (a == 1) ? r.y : r.z);
    }
  }
}

Mat3 recover_sigma_atom(const AtomSystem& sys, const PairPotential& p, int i,
                        const RecoveryConfig& cfg, RecoveryStatus* status,
                        double* condition) {
  if (status) *status = RecoveryStatus::ok;
  if (condition) *condition = std::numeric_limits<double>::infinity();

  Mat3 Q = bond_gram(sys, i, /*deformed=*/true);
  GramSolver gram(Q);
  if (gram.singular) {
    if (status) *status = RecoveryStatus::rank_deficient;
    return Mat3{};
  }
  if (condition) *condition = gram.condition;
  if (gram.condition > cfg.cond_limit) {
    if (status) *status = RecoveryStatus::ill_conditioned;
    return Mat3{};
  }

  // Normal matrix d^T d = I_3 (x) Q; right-hand side sums
  // (Phi'_j / A_c_j) flatten(r_j (x) r_j).
  int np = static_cast<int>(sys.neighbors[i].size());
  Voigt9 rhs{};
  for (const Bond& bond : sys.neighbors[i]) {
    Vec3 r = sys.x[bond.j] - sys.x[i];
    double area = characteristic_area(bond.R_len, np);
    double scale = p.dphi(norm(r)) / area;
    Mat3 rr = outer(r, r);
    Voigt9 fl = flatten(rr);
    for (int k = 0; k < 9; ++k) rhs[k] += scale * fl[k];
  }

  Mat9 M{};
  for (int blk = 0; blk < 3; ++blk)
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) M.m[3 * blk + a][3 * blk + c] = Q(a, c);
  double lambda = cfg.lambda_factor * 3.0 * (Q(0, 0) + Q(1, 1) + Q(2, 2));
  for (int row = 0; row < 3; ++row)
    for (int a = 0; a < 9; ++a) {
      double va = kAntisymmetryConstraint[row][a];
      if (va == 0.0) continue;
      for (int c = 0; c < 9; ++c)
        M.m[a][c] += lambda * va * kAntisymmetryConstraint[row][c];
    }

  SpdSolve sol = solve_spd(M, rhs);
  if (!sol.ok) {
    if (status) *status = RecoveryStatus::rank_deficient;
    return Mat3{};
  }
  return unflatten(sol.x);
}

FieldSnapshot recover_fields(const AtomSystem& sys, const PairPotential& p,
                             const RecoveryConfig& cfg) {
  int n = sys.size();
  FieldSnapshot out;
  out.F.assign(n, Mat3{});
  out.E.assign(n, Mat3{});
  out.sigma_raw.assign(n, Mat3{});
  out.F_status.assign(n, RecoveryStatus::ok);
  out.sigma_status.assign(n, RecoveryStatus::ok);
  out.F_condition.assign(n, 0.0);
  out.sigma_condition.assign(n, 0.0);
  out.n_p.assign(n, 0);
  out.interior = interior_mask(sys);

  for (int i = 0; i < n; ++i) {
    out.n_p[i] = static_cast<int>(sys.neighbors[i].size());

    RecoveryStatus st = RecoveryStatus::ok;
    double cond = 0.0;
    Mat3 F = recover_F_atom(sys, i, &st, &cond);
    if (st == RecoveryStatus::ok && cond > cfg.cond_limit) {
      st = RecoveryStatus::ill_conditioned;
      F = Mat3{};
    }
    out.F_status[i] = st;
    out.F_condition[i] = cond;
    if (st == RecoveryStatus::ok) {
      out.F[i] = F;
      out.E[i] = green_lagrange(F);
    }

    out.sigma_raw[i] =
        recover_sigma_atom(sys, p, i, cfg, &out.sigma_status[i], &out.sigma_condition[i]);
  }
  return out;
}

void average_sigma(FieldSnapshot& field, const AtomSystem& sys,
                   const RecoveryConfig& cfg) {
  int n = sys.size();
  std::vector<Mat3> cur = field.sigma_raw;
  std::vector<Mat3> next(n);
  for (int pass = 0; pass < cfg.averaging_passes; ++pass) {
    for (int i = 0; i < n; ++i) {
      if (field.sigma_status[i] != RecoveryStatus::ok) {
        next[i] = Mat3{};
        continue;
      }
      Mat3 acc{};
      int n_ok = 0;
      for (const Bond& b : sys.neighbors[i]) {
        if (field.sigma_status[b.j] != RecoveryStatus::ok) continue;
        acc += cur[b.j];
        ++n_ok;
      }
      Mat3 bar = 0.5 * cur[i];
      if (n_ok > 0) {
        acc *= 0.5 / static_cast<double>(n_ok);
        bar += acc;
      } else {
        bar += 0.5 * cur[i];  // no usable neighbors: keep the raw value
      }
      next[i] = bar;
    }
    cur.swap(next);
  }
  field.sigma_avg = std::move(cur);
}

ComponentStats interior_stats(const std::vector<Mat3>& field,
                              const std::vector<RecoveryStatus>& status,
                              const std::vector<std::uint8_t>& interior) {
  ComponentStats st;
  size_t n = field.size();
  Voigt6 sum{}, sumsq{};
  for (size_t i = 0; i < n; ++i) {
    if (!interior[i] || status[i] != RecoveryStatus::ok) continue;
    Voigt6 v = to_voigt6(field[i]);
    for (int k = 0; k < 6; ++k) {
      sum[k] += v[k];
      sumsq[k] += v[k] * v[k];
    }
    ++st.count;
  }
  if (st.count == 0) return st;
  double inv = 1.0 / static_cast<double>(st.count);
  for (int k = 0; k < 6; ++k) {
    st.mean[k] = sum[k] * inv;
    double var = sumsq[k] * inv - st.mean[k] * st.mean[k];
    st.stdev[k] = std::sqrt(std::max(0.0, var));
  }
  return st;
}

}  // namespace atomfield
