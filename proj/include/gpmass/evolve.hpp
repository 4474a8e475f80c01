#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gpmass/grid.hpp"
#include "gpmass/maximizer.hpp"
#include "gpmass/model.hpp"

namespace gpmass {

// Trajectory state plus the conserved quantities cached at t=0; every step
// checks the relative mass drift against a hard 1e-6 limit and aborts on
// violation (both substeps are L2-isometries, so a drift that large can only
// be an integrator fault).
struct EvolutionState {
  ComplexPair pair;
  double t = 0.0;
  double mass1_0 = 0.0, mass2_0 = 0.0, energy_0 = 0.0;
};

EvolutionState make_state(const ComplexPair& pair, const ModelParams& m, double gamma_star);
EvolutionState make_state(const RealPair& pair, const ModelParams& m, double gamma_star);

// Cached pieces of the Crank-Nicolson solve, keyed on (grid, dt/2): the 1D
// complex Thomas factors, and warm starts for the 2D normal-equation CG.
// Reused across steps; rebuilt automatically when the key changes.
struct CnCache {
  Grid grid;
  double theta = std::numeric_limits<double>::quiet_NaN();
  std::vector<cxd> cp;         // Thomas forward factors
  std::vector<cxd> denom_inv;  // Thomas pivot inverses
  std::vector<double> warm[4];  // 2D warm starts: re1, im1, re2, im2
};

// One Strang step of i dPsi/dt + lap Psi - V Psi + gamma* (mu_i |Psi_i|^2 +
// beta |Psi_j|^2) Psi = 0: exact half-step phase rotation (potential +
// nonlinearity), Crank-Nicolson full step for the free part, half-step phase
// rotation. Second order in dt; each substep conserves both L2 masses.
EvolutionState step(EvolutionState st, const ModelParams& m, double gamma_star, double dt,
                    CnCache& cache);
EvolutionState step(EvolutionState st, const ModelParams& m, double gamma_star, double dt);

// Distance to the phase orbit of a real pair: the infimum over per-component
// phases has the closed form sqrt(sum_i [||Psi_i||_H^2 + ||u_i||_H^2 -
// 2 |<Psi_i, u_i>_H|]) because u is real; clamped at 0 against roundoff.
double orbital_distance(const ComplexPair& psi, const RealPair& u, const ModelParams& m);

struct Trajectory {
  std::vector<double> t, mass1, mass2, energy, dist;
};

// Evolve to the horizon, sampling conserved quantities (and, when a reference
// pair is given, the orbital distance) every sample_dt time units.
Trajectory evolve_trajectory(EvolutionState st, const ModelParams& m, double gamma_star,
                             double dt, double horizon, double sample_dt,
                             const RealPair* reference, CnCache& cache);

enum class PerturbationKind { bump, rotation, branch_tangent };
const char* perturbation_kind_name(PerturbationKind k);
PerturbationKind perturbation_kind_from_name(const std::string& name);

struct StabilityOptions {
  double sample_dt = 0.1;
  uint64_t seed = 1;
  MaximizeOptions inner;  // only used by the branch_tangent perturbation
};

struct StabilityReport {
  double delta = 0.0;
  double horizon = 0.0;
  double sup_distance = 0.0;
  std::vector<double> times;
  std::vector<double> distance_series;
  double max_mass_drift = 0.0;    // relative, over both components
  double max_energy_drift = 0.0;  // relative
};

// Initial data for a stability run: the standing wave perturbed by delta in
// the H-norm. bump: random smooth Gaussian bumps; rotation: mass-preserving
// rotation of each component toward its eigenfunction; branch_tangent: the
// finite-difference tangent of the solution branch in alpha.
ComplexPair perturbed_data(const SolitarySolution& s, const ModelParams& m, double delta,
                           PerturbationKind kind, const StabilityOptions& opts = {});

// Evolve the perturbed standing wave with gamma* = s.gamma and report the
// sampled orbital distances to the unperturbed profile.
StabilityReport stability_experiment(const SolitarySolution& s, const ModelParams& m,
                                     double delta, double horizon, double dt,
                                     PerturbationKind kind,
                                     const StabilityOptions& opts = {});

}  // namespace gpmass
