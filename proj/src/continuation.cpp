#include "gpmass/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gpmass/errors.hpp"

namespace gpmass {

namespace {

// First derivative of samples on a possibly nonuniform grid: three-point
// central stencil on the interior, first-order one-sided at the ends.
std::vector<double> fd_derivative(const std::vector<double>& a, const std::vector<double>& f) {
  const std::size_t n = a.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  d[0] = (f[1] - f[0]) / (a[1] - a[0]);
  d[n - 1] = (f[n - 1] - f[n - 2]) / (a[n - 1] - a[n - 2]);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double hl = a[k] - a[k - 1];
    const double hr = a[k + 1] - a[k];
    d[k] = (hl * hl * f[k + 1] - hr * hr * f[k - 1] - (hl * hl - hr * hr) * f[k]) /
           (hl * hr * (hl + hr));
  }
  return d;
}

std::vector<double> branch_alphas(const BranchCurve& b) {
  std::vector<double> a;
  a.reserve(b.points.size());
  for (const auto& p : b.points) a.push_back(p.alpha);
  return a;
}

std::vector<double> branch_gammas(const BranchCurve& b) {
  std::vector<double> g;
  g.reserve(b.points.size());
  for (const auto& p : b.points) g.push_back(p.gamma);
  return g;
}

// Longest contiguous run of points with gamma' > 0; returns [begin, end)
// indices, empty run as (0, 0).
std::pair<std::size_t, std::size_t> monotone_run(const std::vector<double>& gp) {
  std::size_t best_lo = 0, best_hi = 0, lo = 0;
  while (lo < gp.size()) {
    if (!(gp[lo] > 0.0)) {
      ++lo;
      continue;
    }
    std::size_t hi = lo;
    while (hi < gp.size() && gp[hi] > 0.0) ++hi;
    if (hi - lo > best_hi - best_lo) {
      best_lo = lo;
      best_hi = hi;
    }
    lo = hi;
  }
  return {best_lo, best_hi};
}

}  // namespace

BranchCurve sweep(const ModelParams& m, double rho1, double rho2,
                  const std::vector<double>& alpha_grid, const SweepOptions& opts,
                  const EigenPairs& eigs) {
  require_nondegenerate(m.scattering);
  if (alpha_grid.empty()) throw ConfigError("sweep: empty alpha grid");
  for (std::size_t k = 1; k < alpha_grid.size(); ++k)
    if (!(alpha_grid[k] > alpha_grid[k - 1]))
      throw ConfigError("sweep: alpha grid must be strictly increasing");

  BranchCurve b;
  b.rho1 = rho1;
  b.rho2 = rho2;
  b.points.reserve(alpha_grid.size());
  if (opts.cross_validate) b.discontinuity.assign(alpha_grid.size(), 0);

  std::optional<RealPair> warm;  // previous point's pair
  for (std::size_t k = 0; k < alpha_grid.size(); ++k) {
    const ConstraintSpec c{alpha_grid[k], rho1, rho2};
    SolitarySolution s;
    try {
      s = maximize(m, c, warm, opts.inner, eigs);
    } catch (const NoConvergence& e) {
      throw NoConvergence("sweep at alpha=" + std::to_string(c.alpha) + ": " + e.what());
    } catch (const InfeasibleConstraint& e) {
      throw InfeasibleConstraint("sweep at alpha=" + std::to_string(c.alpha) + ": " +
                                 e.what());
    }
    if (opts.cross_validate) {
      SolitarySolution cold = maximize(m, c, std::nullopt, opts.inner, eigs);
      if (pair_l2_dist(cold.pair, s.pair) > opts.disc_tol) b.discontinuity[k] = 1;
    }
    warm = s.pair;
    b.points.push_back(std::move(s));
  }
  b.gamma_prime = fd_derivative(branch_alphas(b), branch_gammas(b));
  return b;
}

BranchCurve sweep(const ModelParams& m, double rho1, double rho2,
                  const std::vector<double>& alpha_grid, const SweepOptions& opts) {
  return sweep(m, rho1, rho2, alpha_grid, opts, principal_eigenpairs(m));
}

ECurve e_curve(BranchCurve& b, double alpha_star) {
  if (b.points.empty()) throw OutOfRange("e_curve: empty branch");
  const std::vector<double> a = branch_alphas(b);
  if (alpha_star < a.front() || alpha_star > a.back())
    throw OutOfRange("e_curve: alpha_star outside the branch range");

  ECurve out;
  if (b.points.size() == 1) {
    out.gamma_star = b.points.front().gamma;
  } else {
    const auto hi =
        std::upper_bound(a.begin() + 1, a.end() - 1, alpha_star) - a.begin();
    const double t = (alpha_star - a[hi - 1]) / (a[hi] - a[hi - 1]);
    out.gamma_star = (1.0 - t) * b.points[hi - 1].gamma + t * b.points[hi].gamma;
  }
  out.e.reserve(b.points.size());
  for (const auto& p : b.points) out.e.push_back(0.5 * p.alpha - out.gamma_star * p.m_value);
  out.e_prime = fd_derivative(a, out.e);
  b.e_values = out.e;
  return out;
}

double e_prime_probe(const ModelParams& m, const BranchCurve& b, std::size_t k,
                     double gamma_star, double delta, const SweepOptions& opts,
                     const EigenPairs& eigs) {
  if (k >= b.points.size()) throw OutOfRange("e_prime_probe: branch index out of range");
  if (!(delta > 0.0)) throw ConfigError("e_prime_probe: delta must be positive");
  const SolitarySolution& p = b.points[k];
  const double T = feasibility_threshold(eigs, b.rho1, b.rho2);
  if (!(p.alpha - delta > T))
    throw OutOfRange("e_prime_probe: alpha - delta falls below the threshold");
  const std::optional<RealPair> warm(p.pair);
  const SolitarySolution lo =
      maximize(m, {p.alpha - delta, b.rho1, b.rho2}, warm, opts.inner, eigs);
  const SolitarySolution hi =
      maximize(m, {p.alpha + delta, b.rho1, b.rho2}, warm, opts.inner, eigs);
  const double e_lo = 0.5 * lo.alpha - gamma_star * lo.m_value;
  const double e_hi = 0.5 * hi.alpha - gamma_star * hi.m_value;
  return (e_hi - e_lo) / (2.0 * delta);
}

StabilityVerdict stability_verdict(const BranchCurve& b, double margin) {
  if (b.points.size() < 3)
    throw OutOfRange("stability_verdict: branch needs at least 3 points");
  const double eff = std::max(margin, 0.0);  // stable only where gamma' > margin > 0
  StabilityVerdict v;
  v.flags.reserve(b.points.size());
  for (double gp : b.gamma_prime)
    v.flags.push_back(gp > eff ? PointVerdict::stable : PointVerdict::inconclusive);
  const auto [lo, hi] = monotone_run(b.gamma_prime);
  if (hi > lo) {
    v.window_lo = b.points[lo].alpha;
    v.window_hi = b.points[hi - 1].alpha;
  } else {
    v.window_lo = v.window_hi = std::numeric_limits<double>::quiet_NaN();
  }
  return v;
}

double default_stability_margin(const BranchCurve& b) {
  const std::vector<double> a = branch_alphas(b);
  const std::vector<double> g = branch_gammas(b);
  if (a.size() < 4) return 1e-8;
  // third derivative from divided differences: f''' ~ 6 f[a_k,...,a_{k+3}]
  double worst = 0.0;
  for (std::size_t k = 0; k + 3 < a.size(); ++k) {
    double dd[4] = {g[k], g[k + 1], g[k + 2], g[k + 3]};
    for (int order = 1; order <= 3; ++order)
      for (int i = 0; i + order <= 3; ++i)
        dd[i] = (dd[i + 1] - dd[i]) / (a[k + i + order] - a[k + i]);
    worst = std::max(worst, std::abs(6.0 * dd[0]));
  }
  double hmax = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) hmax = std::max(hmax, a[k] - a[k - 1]);
  return 10.0 * (hmax * hmax / 6.0) * worst;
}

double invert_mass(const BranchCurve& b, double m1, double m2, double ratio_tol) {
  if (!(b.rho1 > 0.0) || !(b.rho2 > 0.0))
    throw ConfigError("invert_mass: branch has nonpositive masses");
  const double r1 = m1 / b.rho1;
  const double r2 = m2 / b.rho2;
  if (std::abs(r1 - r2) > ratio_tol * std::max({1.0, std::abs(r1), std::abs(r2)}))
    throw InfeasibleConstraint(
        "invert_mass: m1/rho1 and m2/rho2 disagree; masses not on this branch");
  const double target = 0.5 * (r1 + r2);

  const auto [lo, hi] = monotone_run(b.gamma_prime);
  if (hi - lo < 2) throw OutOfRange("invert_mass: branch has no monotone window");
  const double glo = b.points[lo].gamma;
  const double ghi = b.points[hi - 1].gamma;
  if (target < glo || target > ghi)
    throw OutOfRange("invert_mass: target gamma outside the monotone window");

  // gamma is increasing across the window points; locate the segment and
  // solve the linear interpolant (bisection degenerates to this exactly).
  for (std::size_t k = lo; k + 1 < hi; ++k) {
    const double g0 = b.points[k].gamma, g1 = b.points[k + 1].gamma;
    if (target > g1) continue;
    if (g1 == g0) return b.points[k].alpha;
    const double t = (target - g0) / (g1 - g0);
    return b.points[k].alpha + t * (b.points[k + 1].alpha - b.points[k].alpha);
  }
  return b.points[hi - 1].alpha;
}

}  // namespace gpmass
