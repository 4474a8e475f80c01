#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gpmass/grid.hpp"

namespace gpmass {

// ---- potentials ----

enum class PotentialKind { harmonic, anisotropic_harmonic, quartic, custom_file };

struct PotentialSpec {
  PotentialKind kind = PotentialKind::harmonic;
  std::vector<double> coeffs;   // anisotropic-harmonic: one weight per axis
  std::filesystem::path path;   // custom-file
};

PotentialKind potential_kind_from_name(const std::string& name);
std::string potential_kind_name(PotentialKind kind);

// Evaluate on the grid and enforce the trapping assumptions: V >= 0 everywhere,
// and V >= confinement_floor on boundary-adjacent nodes (finite-box proxy for
// V -> +inf). Throws ConfigError on violation.
RealField evaluate_potential(const Grid& grid, const PotentialSpec& spec,
                             double confinement_floor = 0.0);

// ---- scattering / regime ----

struct ScatteringParams {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double beta = 0.0;
};

enum class RegimeLabel {
  mixed_sign,
  focusing_coop_or_comp,
  defocusing,
  defocusing_weak_interaction,
  degenerate,
};

struct Regime {
  bool nondeg = false;
  RegimeLabel label = RegimeLabel::degenerate;
  std::string diagnostic;  // names the violated clause when degenerate
};

std::string regime_label_name(RegimeLabel label);

// Degeneracy is an exact algebraic condition (beta equal to +-sqrt(mu1 mu2)),
// so the comparisons are exact: a configuration a rounding error away from
// degenerate is honestly nondegenerate.
Regime classify(const ScatteringParams& s);

// Throws DegenerateRegime (with the clause diagnostic) unless classify(s).nondeg.
void require_nondegenerate(const ScatteringParams& s);

// ---- constraint set / model data ----

struct ConstraintSpec {
  double alpha = 0.0;  // H-norm-squared budget
  double rho1 = 0.0;   // target masses
  double rho2 = 0.0;
};

struct ModelParams {
  Grid grid;
  RealField V1, V2;
  ScatteringParams scattering;
};

ModelParams make_model(const Grid& grid, const PotentialSpec& p1, const PotentialSpec& p2,
                       const ScatteringParams& s, double confinement_floor = 0.0);

// ---- functionals ----

// F = 1/4 int mu1 u1^4 + 2 beta u1^2 u2^2 + mu2 u2^4; complex input reduces to
// the modulus pair through the same quadrature.
double eval_F(const RealPair& p, const ScatteringParams& s);
double eval_F(const ComplexPair& p, const ScatteringParams& s);

// E_gamma = 1/2 ||.||_H^2 - gamma F
double eval_energy(const RealPair& p, const ModelParams& m, double gamma);
double eval_energy(const ComplexPair& p, const ModelParams& m, double gamma);

// A = 1/2 ||.||_H^2 - gamma F + (omega1/2) Q(u1) + (omega2/2) Q(u2)
double eval_action(const RealPair& p, const ModelParams& m, double omega1, double omega2,
                   double gamma);

}  // namespace gpmass
