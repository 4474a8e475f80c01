#pragma once

#include <vector>

#include "gpmass/eigen.hpp"
#include "gpmass/grid.hpp"
#include "gpmass/maximizer.hpp"
#include "gpmass/model.hpp"

namespace gpmass {

// Point on the trivial eigenfunction branch: masses and pair are determined
// by the mixing angle theta in (0, pi/2), with rho_bar_i chosen so the
// feasibility threshold at (rho_bar1, rho_bar2) is exactly 1.
struct ThetaPoint {
  double theta = 0.0;
  double rho_bar1 = 0.0;  // cos^2(theta) / lambda1
  double rho_bar2 = 0.0;  // sin^2(theta) / lambda2
  RealPair u_bar;         // (cos/sqrt(lambda1) phi1, sin/sqrt(lambda2) phi2)
};

// Kernel element (psi1, psi2, o1, o2, 1) of the linearized Euler-Lagrange
// operator at the trivial branch, plus the nondegeneracy scalar
// 2 sum_i (||psi_i||_H^2 - lambda_i ||psi_i||_L2^2), strictly positive in
// admissible regimes.
struct KernelElement {
  RealField psi1, psi2;
  double o1 = 0.0, o2 = 0.0;
  double nondeg_value = 0.0;
  double solve_residual = 0.0;  // worst relative residual of the two psi solves
};

// Image of the linearized operator applied to (v1, v2, o1, o2, g) at the
// trivial branch point: two field rows, two mass rows, one H-budget row
// (the scalar rows carry the factor 2 of the derivative of the squared norms).
struct LinearizedImage {
  RealField f1, f2;  // (A_i - lambda_i) v_i + o_i u_bar_i - g z_i(u_bar)
  double h1 = 0.0, h2 = 0.0;  // 2 int u_bar_i v_i
  double k = 0.0;             // 2 sum_i <u_bar_i, v_i>_H
};

// Log-log fit of gamma against eps for alpha = threshold * (1 + eps) at fixed
// theta-masses; slope should approach 1/2 as eps -> 0.
struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> eps;
  std::vector<double> alpha;     // threshold * (1 + eps)
  std::vector<double> gamma;
  std::vector<double> dist;      // L2 distance of each maximizer pair to u_bar
  double ratio = 0.0;            // gamma / sqrt(eps) at the smallest eps (empirical a(theta))
  double dist_to_anchor = 0.0;   // L2 distance of the smallest-eps pair to u_bar
};

struct MassWindow {
  double theta_lo = 0.0;  // arctan sqrt(lambda2 / (k lambda1))
  double theta_hi = 0.0;  // arctan sqrt(k lambda2 / lambda1)
  double m_bar = 0.0;     // min over a theta sample of (rho1+rho2) sqrt(gamma)
};

// Throws ThetaDegenerate unless theta lies strictly inside (0, pi/2).
ThetaPoint theta_point(const EigenPairs& eigs, double theta);

// o_i by quadrature against the discrete masses (which makes the Fredholm
// orthogonality of the right-hand side exact), psi_i by deflated CG on the
// phi_i-orthogonal complement, then an explicit final orthogonalization.
// Throws RhsNotOrthogonal if the right-hand side fails the solvability gate
// (an o_i computation bug, not a data property).
KernelElement kernel_element(const ModelParams& m, const EigenPairs& eigs, double theta);
KernelElement kernel_element(const ModelParams& m, double theta);

// Apply the linearized operator at the trivial branch point to an arbitrary
// direction; used to certify kernel membership and the range identity
// k = lambda1 h1 + lambda2 h2.
LinearizedImage linearized_apply(const ModelParams& m, const EigenPairs& eigs,
                                 const ThetaPoint& tp, const RealPair& v, double o1,
                                 double o2, double g);

// Run maximize at alpha = threshold*(1+eps) for each eps (given decreasing
// toward 0), warm-starting each solve from the previous one, and fit
// log gamma = slope * log eps + intercept.
ScalingFit small_mass_scaling(const ModelParams& m, double theta,
                              const std::vector<double>& eps_grid,
                              const MaximizeOptions& opts = {});

// Theta window for mass ratios within [1/k, k] and the minimal mass scale over
// a sample of the window at fixed eps. Requires k >= 1 and eps > 0.
MassWindow mass_window(const ModelParams& m, double k, double eps,
                       const MaximizeOptions& opts = {}, int theta_samples = 5);

}  // namespace gpmass
