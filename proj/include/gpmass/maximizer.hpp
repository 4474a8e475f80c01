#pragma once

#include <optional>
#include <vector>

#include "gpmass/eigen.hpp"
#include "gpmass/grid.hpp"
#include "gpmass/model.hpp"

namespace gpmass {

struct SolitarySolution {
  RealPair pair;        // nonnegative maximizer (u1, u2)
  double omega1 = 0.0;  // chemical potentials
  double omega2 = 0.0;
  double gamma = 0.0;   // nonlinearity multiplier
  double alpha = 0.0;
  double rho1 = 0.0, rho2 = 0.0;
  double m_value = 0.0;   // attained F
  double residual = 0.0;  // relative L2 Euler-Lagrange residual
  int iterations = 0;
};

struct MaximizeOptions {
  double gtol = 1e-8;   // tangent gradient norm
  double ctol = 1e-10;  // relative constraint violation
  double rtol = 1e-6;   // relative Euler-Lagrange residual
  int max_iters = 20000;
  double armijo = 1e-4;
  uint64_t seed = 1;
  // |alpha - threshold| <= band * max(1, threshold) short-circuits to the
  // eigenpair solution (F is constant on U there)
  double threshold_band = 1e-9;
  int verbose = 0;  // 1: iteration trace on stderr
};

// Newton solve for (w1, w2) = ((1+a) u1 + b phi_1, (1+c) u2) meeting the two
// mass constraints and the H-budget exactly (to ctol); the phi-correction
// attaches to whichever component sits strictly above its eigen-level, so the
// roles of the components may swap. Pure constraint restoration: the output is
// not sign-normalized.
RealPair retract(const RealPair& p, const ModelParams& m, const ConstraintSpec& c,
                 const EigenPairs& eigs, double ctol = 1e-10);

// Least-squares multipliers of the Euler-Lagrange system for a given pair:
// minimize sum_i || (-lap + V_i) u_i + omega_i u_i - gamma (mu_i u_i^3 + beta
// u_i u_j^2) ||_{L2}^2 over (omega1, omega2, gamma).
struct MultiplierFit {
  double omega1 = 0.0, omega2 = 0.0, gamma = 0.0;
  double residual = 0.0;  // relative to sqrt(sum_i ||(-lap+V_i) u_i||^2)
};
MultiplierFit extract_multipliers(const RealPair& p, const ModelParams& m);

// Projected gradient ascent for M(alpha, rho1, rho2) = sup F. init, when
// given, is only a starting guess (it will be sign-corrected and retracted);
// otherwise a seeded perturbation of the eigenpair anchor is used.
SolitarySolution maximize(const ModelParams& m, const ConstraintSpec& c,
                          const std::optional<RealPair>& init, const MaximizeOptions& opts,
                          const EigenPairs& eigs);
SolitarySolution maximize(const ModelParams& m, const ConstraintSpec& c,
                          const std::optional<RealPair>& init = std::nullopt,
                          const MaximizeOptions& opts = {});

// Best-of multi-start: seeds seed, seed+1, ..., seed+starts-1; result list is
// ordered by F (then seed) and deduplicated at L2 distance 1e-3; front() is the
// reported maximizer.
std::vector<SolitarySolution> maximize_multistart(const ModelParams& m,
                                                  const ConstraintSpec& c, int starts,
                                                  const MaximizeOptions& opts,
                                                  const EigenPairs& eigs);

// Physical solitary wave: U_i = sqrt(gamma) u_i solves the gamma-free system
// and carries masses m_i = gamma rho_i.
struct PhysicalSolution {
  RealPair pair;
  double omega1 = 0.0, omega2 = 0.0;
  double m1 = 0.0, m2 = 0.0;
};
PhysicalSolution to_physical(const SolitarySolution& s);

}  // namespace gpmass
