#include <doctest.h>

#include <cmath>
#include <random>

#include "atomfield/lattice.hpp"
#include "atomfield/potential.hpp"
#include "atomfield/recovery.hpp"
#include "atomfield/run_config.hpp"
#include "atomfield/statics.hpp"
#include "atomfield/tensor.hpp"
#include "test_support.hpp"

using namespace atomfield;
namespace ts = testsupport;

namespace {

AtomSystem classified(int n) {
  LatticeConfig cfg;
  cfg.nx = cfg.ny = cfg.nz = n;
  AtomSystem sys = build_fcc(cfg);
  build_neighbors(sys);
  classify_boundary(sys);
  return sys;
}

/// The 4x4x4 relaxed uniform-loading snapshot used by several cases.
struct UniformRun {
  AtomSystem sys;
  FieldSnapshot field;
  Mat3 F;
};

const UniformRun& uniform_run() {
  static UniformRun run = [] {
    UniformRun r{classified(4), {}, stretch_from_strain(default_uniform_strain())};
    apply_uniform_bc(r.sys, r.F);
    relax(r.sys, PairPotential{}, RelaxParams{});
    r.field = recover_fields(r.sys, PairPotential{}, RecoveryConfig{});
    average_sigma(r.field, r.sys, RecoveryConfig{});
    return r;
  }();
  return run;
}

}  // namespace

TEST_SUITE("recovery") {

TEST_CASE("characteristic_area follows the fraction-of-sphere formula") {
  double R = 4.0 / std::sqrt(2.0);
  CHECK(characteristic_area(R, 12) ==
        doctest::Approx(2.0 * 3.14159265358979324 / 3.0).epsilon(1e-12));
  // Quadratic in |R|, inversely proportional to N_p.
  CHECK(characteristic_area(2.0 * R, 12) ==
        doctest::Approx(4.0 * characteristic_area(R, 12)).epsilon(1e-12));
  CHECK(characteristic_area(R, 8) > characteristic_area(R, 12));
  CHECK_THROWS_AS(characteristic_area(0.0, 12), std::invalid_argument);
  CHECK_THROWS_AS(characteristic_area(R, 0), std::invalid_argument);
}

TEST_CASE("assemble_D lays one 3x9 replication block per bond") {
  AtomSystem sys = ts::make_neighborhood({Vec3{1, 0, 0}}, Mat3::identity());
  sys.x[1] = {1.02, 0, 0};
  std::vector<double> D, b;
  assemble_D(sys, 0, D, b);
  REQUIRE(D.size() == 27);  // 3 rows x 9 columns
  REQUIRE(b.size() == 3);
  // Row a carries R^T in columns 3a..3a+2; everything else is zero.
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 9; ++c) {
      double want = (c == 3 * r) ? 1.0 : 0.0;  // R = (1,0,0)
      CHECK(D[static_cast<size_t>(r) * 9 + c] == want);
    }
  CHECK(b[0] == 1.02);
  CHECK(b[1] == 0.0);
  CHECK(b[2] == 0.0);
}

TEST_CASE("D * flatten(F) reproduces F R for random pairs") {
  std::mt19937 rng(501);
  for (int it = 0; it < 100; ++it) {
    Vec3 R = ts::random_vec(rng, 3.0);
    if (norm(R) < 0.1) continue;
    Mat3 F = ts::random_gradient(rng, 0.3);
    AtomSystem sys = ts::make_neighborhood({R}, Mat3::identity());
    std::vector<double> D, b;
    assemble_D(sys, 0, D, b);
    Voigt9 f = flatten(F);
    Vec3 got{};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 9; ++c)
        got[r] += D[static_cast<size_t>(r) * 9 + c] * f[static_cast<size_t>(c)];
    Vec3 want = F * R;
    CHECK(std::abs(got.x - want.x) <= 1e-12);
    CHECK(std::abs(got.y - want.y) <= 1e-12);
    CHECK(std::abs(got.z - want.z) <= 1e-12);
  }
}

TEST_CASE("a 12-neighbor FCC atom yields a 36x9 stacked system") {
  AtomSystem sys = classified(3);
  int atom = -1;
  for (int i = 0; i < sys.size() && atom < 0; ++i)
    if (sys.coordination(i) == 12) atom = i;
  REQUIRE(atom >= 0);
  std::vector<double> D, b;
  assemble_D(sys, atom, D, b);
  CHECK(D.size() == 36 * 9);
  CHECK(b.size() == 36);
}

TEST_CASE("recover_F is exact for affine neighborhood motion") {
  std::mt19937 rng(502);
  AtomSystem sys = classified(3);
  Mat3 F = ts::random_gradient(rng);
  for (int i = 0; i < sys.size(); ++i) sys.x[i] = F * sys.X[i];
  for (int i = 0; i < sys.size(); ++i) {
    RecoveryStatus st{};
    Mat3 got = recover_F_atom(sys, i, &st);
    if (st != RecoveryStatus::ok) continue;
    CHECK(ts::max_abs_diff(got, F) <= 1e-12);
    CHECK(ts::max_abs_diff(green_lagrange(got), green_lagrange(F)) <= 1e-12);
  }
}

TEST_CASE("interior atoms recover E33 = 0.0200 under the combined loading") {
  const UniformRun& run = uniform_run();
  int checked = 0;
  for (int i = 0; i < run.sys.size(); ++i) {
    if (!run.field.interior[i] || run.field.F_status[i] != RecoveryStatus::ok) continue;
    CHECK(std::abs(run.field.E[i](2, 2) - 0.0200) <= 1e-6);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("interior strain means match the prescribed loading") {
  const UniformRun& run = uniform_run();
  ComponentStats stats = interior_stats(run.field.E, run.field.F_status, run.field.interior);
  Voigt6 want{0.0100, 0.0100, 0.0200, 0.0100, -0.0080, 0.0100};
  for (int c = 0; c < 6; ++c) {
    CHECK(std::abs(stats.mean[static_cast<size_t>(c)] - want[static_cast<size_t>(c)]) <= 1e-8);
    CHECK(stats.stdev[static_cast<size_t>(c)] <= 1e-10);
  }
  CHECK(stats.count > 0);
}

TEST_CASE("undeformed lattice recovers zero strain and zero stress exactly") {
  AtomSystem sys = classified(3);
  FieldSnapshot field = recover_fields(sys, PairPotential{}, RecoveryConfig{});
  for (int i = 0; i < sys.size(); ++i) {
    if (field.F_status[i] == RecoveryStatus::ok) CHECK(max_abs(field.E[i]) == 0.0);
    if (field.sigma_status[i] == RecoveryStatus::ok)
      CHECK(max_abs(field.sigma_raw[i]) == 0.0);
  }
}

TEST_CASE("fewer than three independent bonds is flagged, never silent") {
  std::mt19937 rng(503);
  Mat3 F = ts::random_gradient(rng);

  // Two non-collinear bonds: rank 2.
  AtomSystem two = ts::make_neighborhood({Vec3{2, 0, 0}, Vec3{0, 2, 0}}, F);
  // Three coplanar bonds: still rank 2.
  AtomSystem coplanar =
      ts::make_neighborhood({Vec3{2, 0, 0}, Vec3{0, 2, 0}, Vec3{2, 2, 0}}, F);
  // One bond: rank 1.
  AtomSystem one = ts::make_neighborhood({Vec3{2, 0, 0}}, F);

  for (AtomSystem* sys : {&two, &coplanar, &one}) {
    RecoveryStatus st{};
    Mat3 got = recover_F_atom(*sys, 0, &st);
    CHECK(st == RecoveryStatus::rank_deficient);
    CHECK(max_abs(got) == 0.0);
    st = RecoveryStatus::ok;
    Mat3 sig = recover_sigma_atom(*sys, PairPotential{}, 0, RecoveryConfig{}, &st);
    CHECK(st == RecoveryStatus::rank_deficient);
    CHECK(max_abs(sig) == 0.0);
  }
}

TEST_CASE("ill-conditioned neighborhoods are flagged and excluded from statistics") {
  std::mt19937 rng(504);
  // Three bonds barely out of plane: the smallest Gram eigenvalue is about
  // eps^2/3 ~ 1e-9 — comfortably above the rank floor, but the eigenvalue
  // ratio ~1e10 is far beyond the 1e8 condition limit.
  AtomSystem sys = ts::make_neighborhood(
      {Vec3{2, 0, 0}, Vec3{0, 2, 0}, Vec3{2, 2, 6e-5}}, ts::random_gradient(rng));
  RecoveryStatus st{};
  double cond = 0.0;
  recover_F_atom(sys, 0, &st, &cond);
  CHECK(st == RecoveryStatus::ok);  // the raw solve succeeds...
  CHECK(cond > 1e8);                // ...but reports the poor conditioning

  // recover_fields applies the condition limit and zeroes the fields.
  FieldSnapshot snap = recover_fields(sys, PairPotential{}, RecoveryConfig{});
  CHECK(snap.F_status[0] == RecoveryStatus::ill_conditioned);
  CHECK(max_abs(snap.F[0]) == 0.0);
  CHECK(max_abs(snap.E[0]) == 0.0);
  CHECK(snap.sigma_status[0] == RecoveryStatus::ill_conditioned);
  CHECK(max_abs(snap.sigma_raw[0]) == 0.0);

  // interior_stats skips the flagged atom even when marked interior.
  std::vector<Mat3> field{Mat3::diag(5, 5, 5), Mat3::diag(1, 1, 1)};
  std::vector<RecoveryStatus> status{RecoveryStatus::ill_conditioned, RecoveryStatus::ok};
  std::vector<std::uint8_t> interior{1, 1};
  ComponentStats stats = interior_stats(field, status, interior);
  CHECK(stats.count == 1);
  CHECK(stats.mean[0] == 1.0);
}

TEST_CASE("unloaded ideal lattice: recovered stress is exactly zero") {
  AtomSystem sys = classified(4);
  FieldSnapshot field = recover_fields(sys, PairPotential{}, RecoveryConfig{});
  double worst = 0.0;
  for (int i = 0; i < sys.size(); ++i) worst = std::max(worst, max_abs(field.sigma_raw[i]));
  CHECK(worst == 0.0);
}

TEST_CASE("recovered stress under uniform loading is uniform and nearly symmetric") {
  const UniformRun& run = uniform_run();
  ComponentStats raw =
      interior_stats(run.field.sigma_raw, run.field.sigma_status, run.field.interior);
  for (int c = 0; c < 6; ++c) {
    double mean = std::abs(raw.mean[static_cast<size_t>(c)]);
    CHECK(raw.stdev[static_cast<size_t>(c)] <= 1e-6 * mean);
  }
  double worst = 0.0;
  for (int i = 0; i < run.sys.size(); ++i)
    if (run.field.sigma_status[i] == RecoveryStatus::ok)
      worst = std::max(worst, antisymmetry(run.field.sigma_raw[i]));
  CHECK(worst <= 1e-6);  // default-penalty calibration
}

TEST_CASE("with lambda = 0 a symmetric 12-bond neighborhood is symmetric anyway") {
  const UniformRun& run = uniform_run();
  // Exact affine copy, so lattice symmetry is bit-clean.
  AtomSystem sys = run.sys;
  for (int i = 0; i < sys.size(); ++i) sys.x[i] = run.F * sys.X[i];
  RecoveryConfig cfg;
  cfg.lambda_factor = 0.0;
  int checked = 0;
  for (int i = 0; i < sys.size(); ++i) {
    if (sys.coordination(i) != 12) continue;
    RecoveryStatus st{};
    Mat3 sig = recover_sigma_atom(sys, PairPotential{}, i, cfg, &st);
    REQUIRE(st == RecoveryStatus::ok);
    CHECK(antisymmetry(sig) <= 1e-8);
    if (++checked >= 8) break;
  }
  CHECK(checked > 0);
}

TEST_CASE("the antisymmetry residual is non-increasing in lambda") {
  std::mt19937 rng(505);
  AtomSystem sys = ts::random_neighborhood(rng, 7, ts::random_gradient(rng), 0.02);
  double prev = 2.0;  // antisymmetry() is bounded by 2
  for (double lf : {0.0, 1.0, 1e2, 1e4, 1e6, 1e8}) {
    RecoveryConfig cfg;
    cfg.lambda_factor = lf;
    RecoveryStatus st{};
    Mat3 sig = recover_sigma_atom(sys, PairPotential{}, 0, cfg, &st);
    REQUIRE(st == RecoveryStatus::ok);
    double as = antisymmetry(sig);
    CHECK(as <= prev * (1.0 + 1e-9) + 1e-15);
    prev = as;
  }
}

TEST_CASE("LS solves match the pseudo-inverse oracle on random neighborhoods") {
  std::mt19937 rng(506);
  PairPotential p;
  for (int it = 0; it < 30; ++it) {
    int n_bonds = 3 + static_cast<int>(rng() % 10);
    AtomSystem sys = ts::random_neighborhood(rng, n_bonds, ts::random_gradient(rng), 0.05);

    RecoveryStatus st{};
    Mat3 F_lib = recover_F_atom(sys, 0, &st);
    REQUIRE(st == RecoveryStatus::ok);
    CHECK(ts::rel_diff(F_lib, ts::oracle_recover_F(sys, 0)) <= 1e-10);

    RecoveryConfig cfg;
    Mat3 s_lib = recover_sigma_atom(sys, p, 0, cfg, &st);
    REQUIRE(st == RecoveryStatus::ok);
    CHECK(ts::rel_diff(s_lib, ts::oracle_recover_sigma(sys, p, 0, cfg.lambda_factor)) <= 1e-10);
  }
}

TEST_CASE("recovered fields are invariant under rigid translation") {
  std::mt19937 rng(507);
  // Quantize positions to multiples of 2^-10 so adding an integer shift is
  // exact in floating point and the invariance can be checked bit-for-bit.
  AtomSystem sys = ts::random_neighborhood(rng, 9, ts::random_gradient(rng), 0.03);
  for (Vec3& v : sys.x)
    for (int c = 0; c < 3; ++c) v[c] = std::round(v[c] * 1024.0) / 1024.0;

  PairPotential p;
  RecoveryStatus st{};
  Mat3 F0 = recover_F_atom(sys, 0, &st);
  Mat3 s0 = recover_sigma_atom(sys, p, 0, RecoveryConfig{}, &st);

  for (Vec3& v : sys.x) v += Vec3{3.0, -7.0, 11.0};
  Mat3 F1 = recover_F_atom(sys, 0, &st);
  Mat3 s1 = recover_sigma_atom(sys, p, 0, RecoveryConfig{}, &st);

  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      CHECK(F1(r, c) == F0(r, c));
      CHECK(s1(r, c) == s0(r, c));
    }
}

TEST_CASE("average_sigma leaves a spatially uniform field unchanged") {
  AtomSystem sys = classified(3);
  FieldSnapshot field = recover_fields(sys, PairPotential{}, RecoveryConfig{});
  Mat3 S = Mat3::diag(3.0, 2.0, 1.0);
  S(0, 1) = S(1, 0) = 0.5;
  for (int i = 0; i < sys.size(); ++i) {
    field.sigma_raw[i] = S;
    field.sigma_status[i] = RecoveryStatus::ok;
  }
  average_sigma(field, sys, RecoveryConfig{});
  for (int i = 0; i < sys.size(); ++i)
    CHECK(ts::max_abs_diff(field.sigma_avg[i], S) <= 1e-14);
}

TEST_CASE("average_sigma renormalizes over neighbors with valid stress") {
  AtomSystem sys = classified(3);
  FieldSnapshot field = recover_fields(sys, PairPotential{}, RecoveryConfig{});
  Mat3 S = Mat3::diag(4.0, 4.0, 4.0);
  for (int i = 0; i < sys.size(); ++i) {
    field.sigma_raw[i] = S;
    field.sigma_status[i] = RecoveryStatus::ok;
  }
  // Poison one atom; its neighbors must renormalize around it and stay at S.
  int atom = -1;
  for (int i = 0; i < sys.size() && atom < 0; ++i)
    if (sys.coordination(i) == 12) atom = i;
  REQUIRE(atom >= 0);
  field.sigma_status[atom] = RecoveryStatus::rank_deficient;
  field.sigma_raw[atom] = Mat3::diag(1e9, 1e9, 1e9);  // must never leak in

  average_sigma(field, sys, RecoveryConfig{});
  for (const Bond& b : sys.neighbors[atom])
    CHECK(ts::max_abs_diff(field.sigma_avg[b.j], S) <= 1e-14);
}

TEST_CASE("an atom with no valid neighbors keeps its own raw stress") {
  AtomSystem sys = ts::make_neighborhood({Vec3{2, 0, 0}, Vec3{0, 2, 0}, Vec3{0, 0, 2}},
                                         Mat3::identity());
  FieldSnapshot field = recover_fields(sys, PairPotential{}, RecoveryConfig{});
  Mat3 own = Mat3::diag(7.0, 7.0, 7.0);
  field.sigma_raw[0] = own;
  field.sigma_status[0] = RecoveryStatus::ok;
  for (int j = 1; j < sys.size(); ++j) field.sigma_status[j] = RecoveryStatus::rank_deficient;
  average_sigma(field, sys, RecoveryConfig{});
  CHECK(ts::max_abs_diff(field.sigma_avg[0], own) <= 1e-15);
}

TEST_CASE("averaging passes compose as repeated Jacobi sweeps") {
  // Three-atom chain 0-1-2 with distinct values; two passes must equal a
  // hand-computed double application of Eq. 37.
  AtomSystem sys;
  sys.X = {{0, 0, 0}, {2, 0, 0}, {4, 0, 0}};
  sys.x = sys.X;
  sys.fixed = {0, 0, 0};
  sys.neighbors.resize(3);
  sys.neighbors[0] = {Bond{1, {2, 0, 0}, 2.0}};
  sys.neighbors[1] = {Bond{0, {-2, 0, 0}, 2.0}, Bond{2, {2, 0, 0}, 2.0}};
  sys.neighbors[2] = {Bond{1, {-2, 0, 0}, 2.0}};
  sys.box_lo = {0, 0, 0};
  sys.box_hi = {4, 0, 0};

  FieldSnapshot field;
  field.sigma_raw = {Mat3::diag(8, 0, 0), Mat3::diag(4, 0, 0), Mat3::diag(0, 0, 0)};
  field.sigma_avg.resize(3);
  field.sigma_status = {RecoveryStatus::ok, RecoveryStatus::ok, RecoveryStatus::ok};
  field.F.resize(3);
  field.E.resize(3);
  field.F_status = field.sigma_status;
  field.F_condition = {0, 0, 0};
  field.sigma_condition = {0, 0, 0};
  field.n_p = {1, 2, 1};
  field.interior = {1, 1, 1};

  auto once = [](double v0, double v1, double v2) {
    return std::array<double, 3>{0.5 * v0 + 0.5 * v1, 0.5 * v1 + 0.25 * (v0 + v2),
                                 0.5 * v2 + 0.5 * v1};
  };
  auto first = once(8, 4, 0);
  auto second = once(first[0], first[1], first[2]);

  FieldSnapshot one_pass = field;
  RecoveryConfig cfg1;
  cfg1.averaging_passes = 1;
  average_sigma(one_pass, sys, cfg1);
  FieldSnapshot two_pass = field;
  RecoveryConfig cfg2;
  cfg2.averaging_passes = 2;
  average_sigma(two_pass, sys, cfg2);

  for (int i = 0; i < 3; ++i) {
    CHECK(one_pass.sigma_avg[i](0, 0) == doctest::Approx(first[i]).epsilon(1e-14));
    CHECK(two_pass.sigma_avg[i](0, 0) == doctest::Approx(second[i]).epsilon(1e-14));
  }
}

TEST_CASE("interior_stats computes population statistics over valid interior atoms") {
  std::vector<Mat3> field{Mat3::diag(1, 0, 0), Mat3::diag(3, 0, 0), Mat3::diag(100, 0, 0)};
  std::vector<RecoveryStatus> status{RecoveryStatus::ok, RecoveryStatus::ok,
                                     RecoveryStatus::ok};
  std::vector<std::uint8_t> interior{1, 1, 0};  // the 100 is a surface atom
  ComponentStats stats = interior_stats(field, status, interior);
  CHECK(stats.count == 2);
  CHECK(stats.mean[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(stats.stdev[0] == doctest::Approx(1.0).epsilon(1e-12));  // population std
  CHECK(stats.mean[1] == 0.0);
}

}  // TEST_SUITE
