#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "atomfield/lattice.hpp"
#include "atomfield/potential.hpp"
#include "test_support.hpp"

using namespace atomfield;
namespace ts = testsupport;

namespace {

AtomSystem perturbed_lattice(int n, unsigned seed, double amp) {
  LatticeConfig cfg;
  cfg.nx = cfg.ny = cfg.nz = n;
  AtomSystem sys = build_fcc(cfg);
  build_neighbors(sys);
  std::mt19937 rng(seed);
  for (Vec3& p : sys.x) p += ts::random_vec(rng, amp);
  return sys;
}

}  // namespace

TEST_SUITE("potential") {

TEST_CASE("phi at the nearest-neighbor distance") {
  PairPotential p;
  // Exactly at a/sqrt(2): B/262144 - A/512 = -A/1024 = -99990.234375.
  CHECK(p.phi(std::sqrt(8.0)) == doctest::Approx(-99990.234375).epsilon(1e-9));
  CHECK(p.phi(2.8284) == doctest::Approx(-9.999e4).epsilon(1e-4));
}

TEST_CASE("phi approaches zero from below at large r") {
  PairPotential p;
  CHECK(p.phi(100.0) < 0.0);
  CHECK(p.phi(100.0) > -2e-4);
  CHECK(std::abs(p.phi(1000.0)) < std::abs(p.phi(100.0)));
}

TEST_CASE("the equilibrium distance is the global minimum") {
  PairPotential p;
  double req = p.equilibrium_distance();
  CHECK(req == doctest::Approx(4.0 / std::sqrt(2.0)).epsilon(1e-12));
  double fmin = p.phi(req);
  for (double r = 1.8; r < 6.0; r += 0.01) CHECK(fmin <= p.phi(r));
  CHECK(fmin < p.phi(req - 0.01));
  CHECK(fmin < p.phi(req + 0.01));
}

TEST_CASE("dphi vanishes at equilibrium and is positive beyond it") {
  PairPotential p;
  CHECK(std::abs(p.dphi(p.equilibrium_distance())) <= 1e-4);  // scale ~8e4
  CHECK(p.dphi(3.0) == doctest::Approx(83616.544452).epsilon(1e-9));
  CHECK(p.dphi(3.0) == doctest::Approx(8.36e4).epsilon(1e-3));
  CHECK(p.dphi(2.5) < 0.0);  // repulsive inside the well
}

TEST_CASE("dphi matches a central finite difference of phi") {
  PairPotential p;
  for (double r : {2.5, 2.8284, 2.9, 3.0, 3.5}) {
    double h = 1e-6 * r;
    double fd = (p.phi(r + h) - p.phi(r - h)) / (2.0 * h);
    CHECK(fd == doctest::Approx(p.dphi(r)).epsilon(1e-6));
  }
}

TEST_CASE("phi and dphi reject non-positive distances") {
  PairPotential p;
  CHECK_THROWS_AS(p.phi(0.0), std::invalid_argument);
  CHECK_THROWS_AS(p.phi(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(p.dphi(0.0), std::invalid_argument);
}

TEST_CASE("pair_force is exactly zero on an ideal-lattice bond") {
  PairPotential p;
  Vec3 f = pair_force(p, {2.0, 2.0, 0.0});  // |r|^2 = 8 exactly
  CHECK(f.x == 0.0);
  CHECK(f.y == 0.0);
  CHECK(f.z == 0.0);
}

TEST_CASE("a stretched +z bond attracts: force on i points toward j") {
  PairPotential p;
  Vec3 f = pair_force(p, {0.0, 0.0, 3.0});
  CHECK(f.x == 0.0);
  CHECK(f.y == 0.0);
  CHECK(f.z == doctest::Approx(p.dphi(3.0)).epsilon(1e-12));
  CHECK(f.z > 0.0);
}

TEST_CASE("pair_force is antisymmetric and rejects zero-length bonds") {
  PairPotential p;
  std::mt19937 rng(401);
  for (int it = 0; it < 20; ++it) {
    Vec3 r = ts::random_vec(rng, 3.0);
    if (norm(r) < 0.5) continue;
    Vec3 f = pair_force(p, r);
    Vec3 g = pair_force(p, -r);
    CHECK(f.x == -g.x);
    CHECK(f.y == -g.y);
    CHECK(f.z == -g.z);
  }
  CHECK_THROWS_AS(pair_force(p, Vec3{}), std::invalid_argument);
}

TEST_CASE("forces vanish identically on the ideal lattice") {
  AtomSystem sys = perturbed_lattice(3, 0, 0.0);
  auto f = assemble_forces(sys, PairPotential{});
  for (const Vec3& fi : f) {
    CHECK(fi.x == 0.0);
    CHECK(fi.y == 0.0);
    CHECK(fi.z == 0.0);
  }
}

TEST_CASE("force sum and torque vanish on a randomly perturbed lattice") {
  AtomSystem sys = perturbed_lattice(3, 402, 0.05);
  PairPotential p;
  auto f = assemble_forces(sys, p);
  Vec3 fsum{}, torque{};
  for (int i = 0; i < sys.size(); ++i) {
    fsum += f[i];
    torque += cross(sys.x[i], f[i]);
  }
  CHECK(std::abs(fsum.x) <= 1e-8);
  CHECK(std::abs(fsum.y) <= 1e-8);
  CHECK(std::abs(fsum.z) <= 1e-8);
  CHECK(std::abs(torque.x) <= 1e-7);
  CHECK(std::abs(torque.y) <= 1e-7);
  CHECK(std::abs(torque.z) <= 1e-7);
}

TEST_CASE("forces are the negative gradient of total_energy") {
  AtomSystem sys = perturbed_lattice(3, 403, 0.04);
  PairPotential p;
  auto f = assemble_forces(sys, p);
  double fscale = 0.0;
  for (const Vec3& fi : f)
    for (int c = 0; c < 3; ++c) fscale = std::max(fscale, std::abs(fi[c]));
  std::mt19937 rng(404);
  double h = 1e-6;
  for (int probe = 0; probe < 10; ++probe) {
    int i = static_cast<int>(rng() % static_cast<unsigned>(sys.size()));
    int c = static_cast<int>(rng() % 3);
    double saved = sys.x[i][c];
    sys.x[i][c] = saved + h;
    double ep = total_energy(sys, p);
    sys.x[i][c] = saved - h;
    double em = total_energy(sys, p);
    sys.x[i][c] = saved;
    double fd = -(ep - em) / (2.0 * h);
    CHECK(std::abs(fd - f[i][c]) <= 1e-5 * fscale);  // relative to the force scale
  }
}

TEST_CASE("two-atom system at equilibrium separation has energy phi(r_eq)") {
  PairPotential p;
  double req = p.equilibrium_distance();
  AtomSystem sys = ts::make_neighborhood({Vec3{req, 0, 0}}, Mat3::identity());
  CHECK(total_energy(sys, p) == doctest::Approx(p.phi(req)).epsilon(1e-12));
}

TEST_CASE("energy and forces are translation invariant") {
  AtomSystem sys = perturbed_lattice(3, 405, 0.05);
  PairPotential p;
  double e0 = total_energy(sys, p);
  auto f0 = assemble_forces(sys, p);
  for (Vec3& x : sys.x) x += Vec3{0.5, -0.25, 1.0};
  double e1 = total_energy(sys, p);
  auto f1 = assemble_forces(sys, p);
  CHECK(e1 == doctest::Approx(e0).epsilon(1e-10));
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < sys.size(); ++i)
    for (int c = 0; c < 3; ++c) {
      worst = std::max(worst, std::abs(f1[i][c] - f0[i][c]));
      scale = std::max(scale, std::abs(f0[i][c]));
    }
  CHECK(worst <= 1e-10 * std::max(1.0, scale));
}

TEST_CASE("thread count never changes forces or energy") {
  AtomSystem sys = perturbed_lattice(4, 406, 0.05);
  PairPotential p;
  double e1 = total_energy(sys, p, 1);
  auto f1 = assemble_forces(sys, p, 1);
  for (int threads : {2, 3, 8}) {
    CHECK(total_energy(sys, p, threads) == e1);  // bitwise
    auto ft = assemble_forces(sys, p, threads);
    for (int i = 0; i < sys.size(); ++i)
      for (int c = 0; c < 3; ++c) CHECK(ft[i][c] == f1[i][c]);
  }
}

TEST_CASE("zero-length bonds in a system are reported, not ignored") {
  PairPotential p;
  AtomSystem sys = ts::make_neighborhood({Vec3{2, 2, 0}}, Mat3::identity());
  sys.x[1] = sys.x[0];  // collapse the bond
  CHECK_THROWS_AS(assemble_forces(sys, p), std::runtime_error);
  CHECK_THROWS_AS(total_energy(sys, p), std::runtime_error);
}

}  // TEST_SUITE
