#pragma once

#include <string>
#include <vector>

#include "gpmass/maximizer.hpp"

namespace gpmass {

// Solution branch over an increasing alpha-grid at fixed masses. gamma_prime
// holds the finite-difference derivative of gamma(alpha): central stencil on
// the (possibly nonuniform) interior, one-sided at the ends. e_values stays
// empty until e_curve fills it for a chosen reference point.
struct BranchCurve {
  double rho1 = 0.0;
  double rho2 = 0.0;
  std::vector<SolitarySolution> points;  // strictly increasing alpha
  std::vector<double> gamma_prime;       // one entry per point
  std::vector<double> e_values;          // filled by e_curve
  // set where the cross-validation cold start landed > disc_tol away from the
  // warm-started point (possible branch jump); empty when cross-validation off
  std::vector<char> discontinuity;
};

struct SweepOptions {
  MaximizeOptions inner;
  // re-solve every point from a cold start and flag disagreements
  bool cross_validate = false;
  double disc_tol = 1e-2;
};

// e(alpha) = alpha/2 - gamma_star * M(alpha) for gamma_star = gamma(alpha_star)
// interpolated on the branch, plus its finite-difference derivative.
struct ECurve {
  double gamma_star = 0.0;
  std::vector<double> e;
  std::vector<double> e_prime;
};

enum class PointVerdict { stable, inconclusive };

struct StabilityVerdict {
  std::vector<PointVerdict> flags;  // one per branch point
  // maximal contiguous alpha-interval with gamma' > 0; NaN bounds if none
  double window_lo;
  double window_hi;
};

// Trace the branch by warm-started maximization: each point starts from the
// previous one's pair; the first point starts from the solver's own
// eigenfunction-anchor seeding. Throws NoConvergence tagged with the failing
// alpha; validates the grid is sorted and feasible up front.
BranchCurve sweep(const ModelParams& m, double rho1, double rho2,
                  const std::vector<double>& alpha_grid, const SweepOptions& opts,
                  const EigenPairs& eigs);
BranchCurve sweep(const ModelParams& m, double rho1, double rho2,
                  const std::vector<double>& alpha_grid, const SweepOptions& opts = {});

// Evaluate e(alpha) along the branch with gamma* taken at alpha_star
// (linearly interpolated between branch points). Fills b.e_values as a side
// effect so the curve can be serialized alongside the branch. Throws
// OutOfRange when alpha_star lies outside the branch.
ECurve e_curve(BranchCurve& b, double alpha_star);

// Local centered probe of e'(alpha) at branch point k: two dedicated solves
// at alpha_k +- delta, warm-started from the branch pair. The branch-grid
// differences carry O(h^2 e''') truncation error, and e''' ~ gamma*/gamma^3
// diverges toward the threshold, so certifying the e-identity needs a spacing
// delta much smaller than the sweep grid. Throws OutOfRange for k out of
// bounds or when alpha_k - delta falls below the feasibility threshold.
double e_prime_probe(const ModelParams& m, const BranchCurve& b, std::size_t k,
                     double gamma_star, double delta, const SweepOptions& opts,
                     const EigenPairs& eigs);

// One-sided stability criterion: a point is flagged stable where the
// finite-difference gamma' clears the margin; everywhere else the verdict is
// inconclusive (the criterion never claims instability). Requires >= 3 points.
StabilityVerdict stability_verdict(const BranchCurve& b, double margin);

// Default margin: 10x the central-difference truncation estimate
// (h^2/6)*max|gamma'''|, with gamma''' estimated from third differences.
double default_stability_margin(const BranchCurve& b);

// Invert the physical-mass correspondence m_i = gamma(alpha) * rho_i on the
// branch: finds alpha with gamma(alpha) = m1/rho1 (= m2/rho2) by bisection on
// the piecewise-linear interpolant restricted to the monotone window. Throws
// InfeasibleConstraint when the two mass ratios disagree beyond ratio_tol,
// OutOfRange when the target gamma is not bracketed by the window.
double invert_mass(const BranchCurve& b, double m1, double m2, double ratio_tol = 1e-8);

}  // namespace gpmass
