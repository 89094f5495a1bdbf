#include "atomfield/statics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "atomfield/potential.hpp"

namespace atomfield {

void apply_uniform_bc(AtomSystem& sys, const Mat3& F) {
  if (det(F) <= 0.0)
    throw std::invalid_argument("apply_uniform_bc: det(F) must be positive");
  for (int i = 0; i < sys.size(); ++i)
    if (sys.fixed[i]) sys.x[i] = F * sys.X[i];
}

std::vector<Vec3> constraint_forces(const AtomSystem& sys,
                                    const PairPotential& p, int threads) {
  std::vector<Vec3> f = assemble_forces(sys, p, threads);
  std::vector<Vec3> c(f.size(), Vec3{});
  for (int i = 0; i < sys.size(); ++i)
    if (sys.fixed[i]) c[i] = -1.0 * f[i];
  return c;
}

namespace {

double max_free_residual(const AtomSystem& sys, const std::vector<Vec3>& f) {
  double r = 0.0;
  for (int i = 0; i < sys.size(); ++i) {
    if (sys.fixed[i]) continue;
    r = std::max({r, std::abs(f[i].x), std::abs(f[i].y), std::abs(f[i].z)});
  }
  return r;
}

}  // namespace

RelaxResult relax(AtomSystem& sys, const PairPotential& p,
                  const RelaxParams& params) {
  if (params.force_tolerance <= 0.0)
    throw std::invalid_argument("relax: force_tolerance must be positive");
  if (params.max_iterations < 1)
    throw std::invalid_argument("relax: max_iterations must be at least 1");

  std::vector<int> free_atoms;
  for (int i = 0; i < sys.size(); ++i)
    if (!sys.fixed[i]) free_atoms.push_back(i);
  int nfree = static_cast<int>(free_atoms.size());

  RelaxResult res;
  std::vector<Vec3> f = assemble_forces(sys, p, params.threads);
  res.energy = total_energy(sys, p, params.threads);
  res.max_residual = max_free_residual(sys, f);
  res.trace.push_back({0, res.energy, res.max_residual});
  if (nfree == 0 || res.max_residual <= params.force_tolerance) {
    res.converged = true;
    return res;
  }

  // Polak-Ribiere+ nonlinear CG on the free coordinates. The gradient of the
  // energy is -f, so the steepest-descent direction is f itself.
  std::vector<Vec3> d(nfree), f_prev(nfree), x_save(nfree);
  auto gather = [&](const std::vector<Vec3>& full, std::vector<Vec3>& out) {
    for (int k = 0; k < nfree; ++k) out[k] = full[free_atoms[k]];
  };
  gather(f, d);
  gather(f, f_prev);

  auto dot_free = [&](const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double s = 0.0;
    for (int k = 0; k < nfree; ++k) s += dot(a[k], b[k]);
    return s;
  };
  auto step_to = [&](double alpha) {
    for (int k = 0; k < nfree; ++k)
      sys.x[free_atoms[k]] = x_save[k] + alpha * d[k];
  };

  const double c1 = 1e-4;            // Armijo sufficient-decrease constant
  const int restart_every = 3 * 3 * nfree;
  double alpha_prev = 1e-6;          // ~1/stiffness of the nearest-neighbor bond
  int since_restart = 0;

  for (int it = 1; it <= params.max_iterations; ++it) {
    double dE0 = -dot_free(f, d);    // directional derivative of the energy
    if (dE0 >= 0.0) {                // not a descent direction: restart on f
      gather(f, d);
      since_restart = 0;
      dE0 = -dot_free(f, d);
      if (dE0 >= 0.0) break;         // gradient numerically zero
    }

    for (int k = 0; k < nfree; ++k) x_save[k] = sys.x[free_atoms[k]];
    double e0 = res.energy;

    // One-point quadratic interpolation, then Armijo backtracking.
    double alpha0 = alpha_prev;
    step_to(alpha0);
    double e1 = total_energy(sys, p, params.threads);
    double denom = e1 - e0 - dE0 * alpha0;
    double alpha = (denom > 0.0)
                       ? -0.5 * dE0 * alpha0 * alpha0 / denom
                       : 2.0 * alpha0;  // curvature non-positive: expand
    alpha = std::clamp(alpha, 0.05 * alpha0, 20.0 * alpha0);

    step_to(alpha);
    double e_new = total_energy(sys, p, params.threads);
    // The negated comparison keeps backtracking on NaN energies.
    auto accepted = [&] { return e_new <= e0 + c1 * alpha * dE0; };
    int backtracks = 0;
    while (!accepted() && backtracks < 60) {
      alpha *= 0.5;
      step_to(alpha);
      e_new = total_energy(sys, p, params.threads);
      ++backtracks;
    }
    if (!accepted() || !std::isfinite(e_new)) {
      step_to(0.0);  // line search collapsed; leave the best point in place
      res.iterations = it;
      throw RelaxError("relax: line search failed to find a descent step", res);
    }
    alpha_prev = alpha;
    res.energy = e_new;

    f = assemble_forces(sys, p, params.threads);
    res.max_residual = max_free_residual(sys, f);
    res.iterations = it;
    res.trace.push_back({it, res.energy, res.max_residual});
    if (res.max_residual <= params.force_tolerance) {
      res.converged = true;
      return res;
    }

    std::vector<Vec3> f_new(nfree);
    gather(f, f_new);
    ++since_restart;
    double beta = 0.0;
    if (since_restart < restart_every) {
      double denom_b = dot_free(f_prev, f_prev);
      if (denom_b > 0.0) {
        double num = 0.0;
        for (int k = 0; k < nfree; ++k)
          num += dot(f_new[k], f_new[k] - f_prev[k]);
        beta = std::max(0.0, num / denom_b);
      }
    } else {
      since_restart = 0;
    }
    for (int k = 0; k < nfree; ++k) d[k] = f_new[k] + beta * d[k];
    f_prev.swap(f_new);
  }

  throw RelaxError("relax: force residual did not reach tolerance within "
                   "the iteration budget",
                   res);
}

}  // namespace atomfield
