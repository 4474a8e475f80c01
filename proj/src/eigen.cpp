#include "gpmass/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gpmass/kernels.hpp"
#include "gpmass/solver.hpp"

namespace gpmass {

namespace {

// A x = (-lap + V) x on raw storage
void apply_schrodinger(const RealField& V, const double* x, double* out, std::vector<double>& lap) {
  const Grid& g = V.grid;
  const double inv_h2 = 1.0 / (g.h * g.h);
  if (g.dim == 1)
    kernels::laplacian_1d(x, lap.data(), g.n, inv_h2);
  else
    kernels::laplacian_2d(x, lap.data(), g.n, inv_h2);
  const std::size_t m = V.size();
  for (std::size_t i = 0; i < m; ++i) out[i] = -lap[i] + V.v[i] * x[i];
}

}  // namespace

RealField schrodinger_apply(const RealField& V, const RealField& u) {
  require_same_grid(V.grid, u.grid);
  RealField out = laplacian_apply(u);
  for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = -out.v[i] + V.v[i] * u.v[i];
  return out;
}

Eigenpair principal_eigenpair(const RealField& V, const EigenOptions& opts) {
  const Grid& g = V.grid;
  const std::size_t m = V.size();
  const double cellv = g.dim == 1 ? g.h : g.h * g.h;

  std::vector<double> lap(m);
  auto apply = [&](const double* x, double* out) { apply_schrodinger(V, x, out, lap); };

  // Positive product of half-period cosines: nonzero overlap with the ground
  // state for any trapping V on this box, and deterministic.
  RealField phi(g);
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i)
      phi.v[i] = std::cos(0.5 * std::numbers::pi * g.coord(i) / g.extent);
  } else {
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        phi.v[static_cast<std::size_t>(i) * g.n + j] =
            std::cos(0.5 * std::numbers::pi * g.coord(i) / g.extent) *
            std::cos(0.5 * std::numbers::pi * g.coord(j) / g.extent);
  }
  scale_field(phi, 1.0 / l2_norm(phi));

  Eigenpair out;
  std::vector<double> y(m, 0.0), ay(m);
  for (int it = 0; it < opts.max_iters; ++it) {
    // y = A^{-1} phi (shift 0: the smallest eigenvalue dominates the inverse)
    CgResult cg = cg_solve(apply, phi.data(), y.data(), m, opts.cg_tol, opts.cg_max_iters);
    if (cg.rel_residual > 1e3 * opts.cg_tol)
      throw LinearSolveFailure("eigen: inner CG stalled at relative residual " +
                               std::to_string(cg.rel_residual));
    std::copy(y.begin(), y.end(), phi.v.begin());
    scale_field(phi, 1.0 / l2_norm(phi));

    apply(phi.data(), ay.data());
    out.lambda = cellv * kernels::dot(ay.data(), phi.data(), m);
    double rs = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = ay[i] - out.lambda * phi.v[i];
      rs += d * d;
    }
    out.residual = std::sqrt(cellv * rs);
    out.iterations = it + 1;
    if (out.residual <= opts.tol) break;
  }
  if (out.residual > opts.tol)
    throw NoConvergence("eigen: residual " + std::to_string(out.residual) + " after " +
                        std::to_string(out.iterations) + " iterations");

  // Sign convention: positive at the max-|.| node. The ground state has one
  // sign; clamp roundoff-negative entries and reject anything larger.
  std::size_t imax = 0;
  for (std::size_t i = 1; i < m; ++i)
    if (std::abs(phi.v[i]) > std::abs(phi.v[imax])) imax = i;
  if (phi.v[imax] < 0.0) scale_field(phi, -1.0);
  double neg = 0.0;
  for (std::size_t i = 0; i < m; ++i) neg = std::min(neg, phi.v[i]);
  if (neg < -1e-8 * phi.v[imax])
    throw NoConvergence("eigen: converged vector changes sign; not the ground state");
  for (std::size_t i = 0; i < m; ++i) phi.v[i] = std::max(phi.v[i], 0.0);
  scale_field(phi, 1.0 / l2_norm(phi));

  out.phi = std::move(phi);
  return out;
}

EigenPairs principal_eigenpairs(const ModelParams& m, const EigenOptions& opts) {
  EigenPairs out;
  out.first = principal_eigenpair(m.V1, opts);
  if (m.V1.v == m.V2.v)
    out.second = out.first;
  else
    out.second = principal_eigenpair(m.V2, opts);
  return out;
}

double feasibility_threshold(const EigenPairs& eigs, double rho1, double rho2) {
  if (!(rho1 > 0.0) || !(rho2 > 0.0))
    throw ConfigError("threshold: masses rho1, rho2 must be positive");
  return eigs.first.lambda * rho1 + eigs.second.lambda * rho2;
}

}  // namespace gpmass
