#include "gpmass/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gpmass/errors.hpp"
#include "gpmass/kernels.hpp"
#include "gpmass/solver.hpp"

namespace gpmass {

namespace {

double cell(const Grid& g) { return g.dim == 1 ? g.h : g.h * g.h; }

RealField cubic(const RealField& ui, const RealField& uj, double mu, double beta) {
  RealField z(ui.grid);
  kernels::cubic_term(ui.data(), uj.data(), mu, beta, z.data(), z.size());
  return z;
}

// Deflated solve of (A - lambda) psi = rhs on the phi-orthogonal complement;
// phi spans the kernel, so the restricted operator is SPD. Returns the
// relative true residual.
double solve_deflated(const RealField& V, double lambda, const RealField& phi,
                      const RealField& rhs, RealField& psi) {
  const Grid& g = rhs.grid;
  // cg_projected deflates against a unit-l2 raw vector; phi is normalized in
  // the cell-weighted inner product, so rescale.
  RealField q = phi;
  scale_field(q, std::sqrt(cell(g)));
  auto op = [&](const double* in, double* out) {
    RealField tmp(g);
    std::copy(in, in + tmp.size(), tmp.v.begin());
    RealField r = schrodinger_apply(V, tmp);
    axpy(-lambda, tmp, r);
    std::copy(r.v.begin(), r.v.end(), out);
  };
  psi = RealField(g);
  CgResult res = cg_projected(op, rhs.data(), psi.data(), q.data(), psi.size(), 1e-12, 20000);
  return res.rel_residual;
}

}  // namespace

ThetaPoint theta_point(const EigenPairs& eigs, double theta) {
  if (!(theta > 0.0) || !(theta < std::numbers::pi / 2.0))
    throw ThetaDegenerate("theta_point: theta must lie strictly inside (0, pi/2), got " +
                          std::to_string(theta));
  const double l1 = eigs.first.lambda, l2 = eigs.second.lambda;
  const double c = std::cos(theta), s = std::sin(theta);
  ThetaPoint tp;
  tp.theta = theta;
  tp.rho_bar1 = c * c / l1;
  tp.rho_bar2 = s * s / l2;
  tp.u_bar = RealPair{eigs.first.phi, eigs.second.phi};
  scale_field(tp.u_bar.u1, c / std::sqrt(l1));
  scale_field(tp.u_bar.u2, s / std::sqrt(l2));
  return tp;
}

KernelElement kernel_element(const ModelParams& m, const EigenPairs& eigs, double theta) {
  require_nondegenerate(m.scattering);
  const ThetaPoint tp = theta_point(eigs, theta);
  const RealField& u1 = tp.u_bar.u1;
  const RealField& u2 = tp.u_bar.u2;
  const RealField z1 = cubic(u1, u2, m.scattering.mu1, m.scattering.beta);
  const RealField z2 = cubic(u2, u1, m.scattering.mu2, m.scattering.beta);

  KernelElement ke{RealField(m.grid), RealField(m.grid), 0.0, 0.0, 0.0, 0.0};
  // Discrete masses (not the analytic rho_bar) make <rhs, u_bar> vanish to
  // roundoff, which is exactly the Fredholm condition the deflated solve needs.
  ke.o1 = l2_inner(z1, u1) / l2_norm_sq(u1);
  ke.o2 = l2_inner(z2, u2) / l2_norm_sq(u2);

  const Eigenpair* eig[2] = {&eigs.first, &eigs.second};
  const RealField* V[2] = {&m.V1, &m.V2};
  const RealField* ub[2] = {&u1, &u2};
  const RealField* z[2] = {&z1, &z2};
  const double o[2] = {ke.o1, ke.o2};
  RealField* psi[2] = {&ke.psi1, &ke.psi2};
  for (int i = 0; i < 2; ++i) {
    RealField rhs = *z[i];
    axpy(-o[i], *ub[i], rhs);
    const double mis = std::abs(l2_inner(rhs, eig[i]->phi));
    if (mis > 1e-8 * l2_norm(rhs))
      throw RhsNotOrthogonal("kernel_element: right-hand side " + std::to_string(i + 1) +
                             " not orthogonal to the eigenfunction (relative " +
                             std::to_string(mis / l2_norm(rhs)) + ")");
    const double res = solve_deflated(*V[i], eig[i]->lambda, eig[i]->phi, rhs, *psi[i]);
    ke.solve_residual = std::max(ke.solve_residual, res);
    // final clean-up of the kernel component (roundoff-level)
    axpy(-l2_inner(*psi[i], *ub[i]) / l2_norm_sq(*ub[i]), *ub[i], *psi[i]);
  }

  ke.nondeg_value =
      2.0 * (h_norm_sq_component(ke.psi1, m.V1) - eigs.first.lambda * l2_norm_sq(ke.psi1) +
             h_norm_sq_component(ke.psi2, m.V2) - eigs.second.lambda * l2_norm_sq(ke.psi2));
  return ke;
}

KernelElement kernel_element(const ModelParams& m, double theta) {
  return kernel_element(m, principal_eigenpairs(m), theta);
}

LinearizedImage linearized_apply(const ModelParams& m, const EigenPairs& eigs,
                                 const ThetaPoint& tp, const RealPair& v, double o1,
                                 double o2, double g) {
  require_same_grid(tp.u_bar.u1.grid, v.u1.grid);
  const RealField z1 = cubic(tp.u_bar.u1, tp.u_bar.u2, m.scattering.mu1, m.scattering.beta);
  const RealField z2 = cubic(tp.u_bar.u2, tp.u_bar.u1, m.scattering.mu2, m.scattering.beta);

  LinearizedImage im{RealField(m.grid), RealField(m.grid), 0.0, 0.0, 0.0};
  im.f1 = schrodinger_apply(m.V1, v.u1);
  axpy(-eigs.first.lambda, v.u1, im.f1);
  axpy(o1, tp.u_bar.u1, im.f1);
  axpy(-g, z1, im.f1);
  im.f2 = schrodinger_apply(m.V2, v.u2);
  axpy(-eigs.second.lambda, v.u2, im.f2);
  axpy(o2, tp.u_bar.u2, im.f2);
  axpy(-g, z2, im.f2);

  im.h1 = 2.0 * l2_inner(tp.u_bar.u1, v.u1);
  im.h2 = 2.0 * l2_inner(tp.u_bar.u2, v.u2);
  im.k = 2.0 * (l2_inner(schrodinger_apply(m.V1, tp.u_bar.u1), v.u1) +
                l2_inner(schrodinger_apply(m.V2, tp.u_bar.u2), v.u2));
  return im;
}

ScalingFit small_mass_scaling(const ModelParams& m, double theta,
                              const std::vector<double>& eps_grid,
                              const MaximizeOptions& opts) {
  if (eps_grid.empty()) throw ConfigError("small_mass_scaling: empty eps grid");
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    if (!(eps_grid[k] > 0.0)) throw ConfigError("small_mass_scaling: eps must be positive");
    if (k > 0 && !(eps_grid[k] < eps_grid[k - 1]))
      throw ConfigError("small_mass_scaling: eps grid must decrease toward 0");
  }
  const EigenPairs eigs = principal_eigenpairs(m);
  const ThetaPoint tp = theta_point(eigs, theta);
  const double T = feasibility_threshold(eigs, tp.rho_bar1, tp.rho_bar2);

  ScalingFit fit;
  fit.eps = eps_grid;
  fit.alpha.reserve(eps_grid.size());
  fit.gamma.reserve(eps_grid.size());
  fit.dist.reserve(eps_grid.size());
  std::optional<RealPair> warm;
  for (double eps : eps_grid) {
    const ConstraintSpec c{T * (1.0 + eps), tp.rho_bar1, tp.rho_bar2};
    SolitarySolution s = maximize(m, c, warm, opts, eigs);
    fit.alpha.push_back(c.alpha);
    fit.gamma.push_back(s.gamma);
    fit.dist.push_back(pair_l2_dist(s.pair, tp.u_bar));
    warm = s.pair;
  }

  // least-squares line through (log eps, log gamma)
  const std::size_t n = eps_grid.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = std::log(fit.eps[k]);
    const double y = std::log(fit.gamma[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double det = n * sxx - sx * sx;
  fit.slope = n > 1 ? (n * sxy - sx * sy) / det : 0.0;
  fit.intercept = n > 1 ? (sy * sxx - sx * sxy) / det : sy;
  fit.ratio = fit.gamma.back() / std::sqrt(fit.eps.back());
  fit.dist_to_anchor = fit.dist.back();
  return fit;
}

MassWindow mass_window(const ModelParams& m, double k, double eps,
                       const MaximizeOptions& opts, int theta_samples) {
  if (!(k >= 1.0)) throw ConfigError("mass_window: k must be >= 1");
  if (!(eps > 0.0)) throw ConfigError("mass_window: eps must be positive");
  if (theta_samples < 1) throw ConfigError("mass_window: need at least one theta sample");
  const EigenPairs eigs = principal_eigenpairs(m);
  const double l1 = eigs.first.lambda, l2 = eigs.second.lambda;

  MassWindow w;
  w.theta_lo = std::atan(std::sqrt(l2 / (k * l1)));
  w.theta_hi = std::atan(std::sqrt(k * l2 / l1));
  w.m_bar = std::numeric_limits<double>::infinity();
  for (int i = 0; i < theta_samples; ++i) {
    const double t = theta_samples == 1
                         ? 0.5
                         : static_cast<double>(i) / (theta_samples - 1);
    const double theta = w.theta_lo + t * (w.theta_hi - w.theta_lo);
    const ThetaPoint tp = theta_point(eigs, theta);
    const double T = feasibility_threshold(eigs, tp.rho_bar1, tp.rho_bar2);
    SolitarySolution s =
        maximize(m, {T * (1.0 + eps), tp.rho_bar1, tp.rho_bar2}, std::nullopt, opts, eigs);
    w.m_bar = std::min(w.m_bar, (tp.rho_bar1 + tp.rho_bar2) * std::sqrt(s.gamma));
    if (w.theta_hi == w.theta_lo) break;
  }
  return w;
}

}  // namespace gpmass
