#include "atomfield/potential.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace atomfield {

double PairPotential::phi(double r) const {
  if (r <= 0.0) throw std::invalid_argument("phi: r must be positive");
  double r2 = r * r;
  double r6 = r2 * r2 * r2;
  return B / (r6 * r6) - A / r6;
}

double PairPotential::dphi(double r) const {
  if (r <= 0.0) throw std::invalid_argument("dphi: r must be positive");
  double r2 = r * r;
  double r6 = r2 * r2 * r2;
  double r7 = r6 * r;
  return -12.0 * B / (r6 * r7) + 6.0 * A / r7;
}

double PairPotential::equilibrium_distance() const {
  return std::pow(2.0 * B / A, 1.0 / 6.0);
}

Vec3 pair_force(const PairPotential& p, const Vec3& r_vec) {
  double u = norm2(r_vec);
  if (u <= 0.0) throw std::invalid_argument("pair_force: zero-length bond");
  return p.pair_scale(u) * r_vec;
}

namespace {

/// Fixed work-chunk width (atoms). Chunk boundaries depend only on n, never
/// on the thread count, so chunk-indexed reductions keep a thread-invariant
/// summation order and --threads can never change results.
constexpr int kChunk = 1024;

inline int chunk_count(int n) { return (n + kChunk - 1) / kChunk; }

/// Run fn(begin, end, chunk_index) over [0, n) in fixed chunks. Worker
/// threads pull chunk indices from a shared counter; with threads <= 1 (or a
/// single chunk) the same chunks run sequentially.
template <typename Fn>
void for_each_chunk(int n, int threads, Fn&& fn) {
  int nchunks = chunk_count(n);
  if (threads <= 1 || nchunks <= 1) {
    for (int c = 0; c < nchunks; ++c) fn(c * kChunk, std::min(n, (c + 1) * kChunk), c);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int c = next.fetch_add(1); c < nchunks; c = next.fetch_add(1))
      fn(c * kChunk, std::min(n, (c + 1) * kChunk), c);
  };
  std::vector<std::thread> pool;
  int nthreads = std::min(threads, nchunks);
  pool.reserve(static_cast<size_t>(nthreads));
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<Vec3> assemble_forces(const AtomSystem& sys, const PairPotential& p,
                                  int threads) {
  std::vector<Vec3> f(sys.X.size());
  std::atomic<bool> bad_bond{false};
  for_each_chunk(sys.size(), threads, [&](int b, int e, int) {
    for (int i = b; i < e; ++i) {
      Vec3 acc{};
      for (const Bond& bond : sys.neighbors[i]) {
        Vec3 r = sys.x[bond.j] - sys.x[i];
        double u = norm2(r);
        if (u <= 0.0) {
          bad_bond.store(true, std::memory_order_relaxed);
          return;
        }
        acc += p.pair_scale(u) * r;
      }
      f[i] = acc;
    }
  });
  if (bad_bond.load()) throw std::runtime_error("assemble_forces: zero-length bond");
  return f;
}

double total_energy(const AtomSystem& sys, const PairPotential& p, int threads) {
  int n = sys.size();
  std::vector<double> partial(static_cast<size_t>(chunk_count(n)), 0.0);
  std::atomic<bool> bad_bond{false};
  for_each_chunk(n, threads, [&](int b, int e, int c) {
    double acc = 0.0;
    for (int i = b; i < e; ++i)
      for (const Bond& bond : sys.neighbors[i]) {
        Vec3 r = sys.x[bond.j] - sys.x[i];
        double rl = norm(r);
        if (rl <= 0.0) {
          bad_bond.store(true, std::memory_order_relaxed);
          return;
        }
        acc += p.phi(rl);
      }
    partial[static_cast<size_t>(c)] = acc;
  });
  if (bad_bond.load()) throw std::runtime_error("total_energy: zero-length bond");
  double sum = 0.0;
  for (double v : partial) sum += v;  // fixed chunk order, thread-invariant
  return 0.5 * sum;                   // every bond appears in two lists
}

}  // namespace atomfield
