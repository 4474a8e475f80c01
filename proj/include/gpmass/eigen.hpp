#pragma once

#include "gpmass/grid.hpp"
#include "gpmass/model.hpp"

namespace gpmass {

struct Eigenpair {
  double lambda = 0.0;
  RealField phi;          // L2-normalized, positive at its max-|.| node
  double residual = 0.0;  // ||(-lap + V) phi - lambda phi||_{L2}
  int iterations = 0;     // inverse power iterations
};

struct EigenOptions {
  double tol = 1e-10;     // residual target
  int max_iters = 200;    // power iterations
  double cg_tol = 1e-12;  // inner linear solves
  int cg_max_iters = 20000;
};

// (-lap + V) u, the Schrodinger operator every module builds on
RealField schrodinger_apply(const RealField& V, const RealField& u);

// Principal eigenpair of A = -lap_h + V by inverse power iteration (A is SPD
// since V >= 0 and the Dirichlet Laplacian is negative definite).
Eigenpair principal_eigenpair(const RealField& V, const EigenOptions& opts = {});

struct EigenPairs {
  Eigenpair first, second;
};

// Both components; the second solve is skipped when V1 and V2 coincide.
EigenPairs principal_eigenpairs(const ModelParams& m, const EigenOptions& opts = {});

// T = lambda1 rho1 + lambda2 rho2, the smallest feasible H-budget.
double feasibility_threshold(const EigenPairs& eigs, double rho1, double rho2);

}  // namespace gpmass
