#include "gpmass/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpmass/kernels.hpp"

namespace gpmass {

PotentialKind potential_kind_from_name(const std::string& name) {
  if (name == "harmonic") return PotentialKind::harmonic;
  if (name == "anisotropic-harmonic") return PotentialKind::anisotropic_harmonic;
  if (name == "quartic") return PotentialKind::quartic;
  if (name == "custom-file") return PotentialKind::custom_file;
  throw ConfigError("unknown potential kind '" + name +
                    "' (expected harmonic, anisotropic-harmonic, quartic, custom-file)");
}

std::string potential_kind_name(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::harmonic: return "harmonic";
    case PotentialKind::anisotropic_harmonic: return "anisotropic-harmonic";
    case PotentialKind::quartic: return "quartic";
    case PotentialKind::custom_file: return "custom-file";
  }
  return "?";
}

namespace {

double radius_sq(const Grid& g, std::size_t idx) {
  if (g.dim == 1) {
    const double x = g.coord(static_cast<int>(idx));
    return x * x;
  }
  const double x = g.coord(static_cast<int>(idx) / g.n);
  const double y = g.coord(static_cast<int>(idx) % g.n);
  return x * x + y * y;
}

bool on_boundary_ring(const Grid& g, std::size_t idx) {
  if (g.dim == 1) {
    const int i = static_cast<int>(idx);
    return i == 0 || i == g.n - 1;
  }
  const int i = static_cast<int>(idx) / g.n;
  const int j = static_cast<int>(idx) % g.n;
  return i == 0 || i == g.n - 1 || j == 0 || j == g.n - 1;
}

}  // namespace

RealField evaluate_potential(const Grid& grid, const PotentialSpec& spec,
                             double confinement_floor) {
  RealField V(grid);
  switch (spec.kind) {
    case PotentialKind::harmonic:
      for (std::size_t k = 0; k < V.size(); ++k) V.v[k] = radius_sq(grid, k);
      break;
    case PotentialKind::anisotropic_harmonic: {
      if (static_cast<int>(spec.coeffs.size()) != grid.dim)
        throw ConfigError("anisotropic-harmonic needs one coefficient per axis");
      if (grid.dim == 1) {
        for (int i = 0; i < grid.n; ++i) {
          const double x = grid.coord(i);
          V.v[i] = spec.coeffs[0] * x * x;
        }
      } else {
        for (int i = 0; i < grid.n; ++i)
          for (int j = 0; j < grid.n; ++j) {
            const double x = grid.coord(i);
            const double y = grid.coord(j);
            V.v[static_cast<std::size_t>(i) * grid.n + j] =
                spec.coeffs[0] * x * x + spec.coeffs[1] * y * y;
          }
      }
      break;
    }
    case PotentialKind::quartic:
      for (std::size_t k = 0; k < V.size(); ++k) {
        const double r2 = radius_sq(grid, k);
        V.v[k] = r2 * r2;
      }
      break;
    case PotentialKind::custom_file: {
      V = read_real_field(spec.path);
      if (!(V.grid == grid))
        throw ConfigError("custom potential '" + spec.path.string() +
                          "' is tabulated on a different grid");
      break;
    }
  }

  double vmin = V.v[0];
  double ring_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < V.size(); ++k) {
    vmin = std::min(vmin, V.v[k]);
    if (on_boundary_ring(grid, k)) ring_min = std::min(ring_min, V.v[k]);
  }
  if (vmin < 0.0)
    throw ConfigError("potential '" + potential_kind_name(spec.kind) +
                      "' takes negative values (trapping requires V >= 0)");
  if (ring_min < confinement_floor)
    throw ConfigError("potential '" + potential_kind_name(spec.kind) +
                      "' falls below the confinement floor at the box boundary");
  return V;
}

std::string regime_label_name(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::mixed_sign: return "mixed-sign";
    case RegimeLabel::focusing_coop_or_comp: return "focusing-coop-or-comp";
    case RegimeLabel::defocusing: return "defocusing";
    case RegimeLabel::defocusing_weak_interaction: return "defocusing-weak-interaction";
    case RegimeLabel::degenerate: return "degenerate";
  }
  return "?";
}

Regime classify(const ScatteringParams& s) {
  Regime r;
  const double mu1 = s.mu1, mu2 = s.mu2, beta = s.beta;
  if (mu1 * mu2 < 0.0) {
    r.nondeg = true;
    r.label = RegimeLabel::mixed_sign;
    return r;
  }
  if (mu1 == 0.0 && mu2 == 0.0) {
    r.diagnostic = "mu1 = mu2 = 0: F is constant on the constraint set, gamma undetermined";
    return r;
  }
  if (mu1 >= 0.0 && mu2 >= 0.0) {
    const double root = std::sqrt(mu1 * mu2);
    if (beta == -root) {
      r.diagnostic = "mu1, mu2 >= 0 with beta = -sqrt(mu1 mu2): nondegeneracy clause violated";
      return r;
    }
    r.nondeg = true;
    r.label = RegimeLabel::focusing_coop_or_comp;
    return r;
  }
  // mu1, mu2 <= 0, not both zero
  const double root = std::sqrt(mu1 * mu2);
  if (beta == root) {
    r.diagnostic = "mu1, mu2 <= 0 with beta = sqrt(mu1 mu2): nondegeneracy clause violated";
    return r;
  }
  r.nondeg = true;
  r.label = (mu1 < 0.0 && mu2 < 0.0 && beta * beta < mu1 * mu2)
                ? RegimeLabel::defocusing_weak_interaction
                : RegimeLabel::defocusing;
  return r;
}

void require_nondegenerate(const ScatteringParams& s) {
  const Regime r = classify(s);
  if (!r.nondeg) throw DegenerateRegime(r.diagnostic);
}

ModelParams make_model(const Grid& grid, const PotentialSpec& p1, const PotentialSpec& p2,
                       const ScatteringParams& s, double confinement_floor) {
  if (!std::isfinite(s.mu1) || !std::isfinite(s.mu2) || !std::isfinite(s.beta))
    throw ConfigError("scattering parameters must be finite");
  ModelParams m;
  m.grid = grid;
  m.V1 = evaluate_potential(grid, p1, confinement_floor);
  m.V2 = evaluate_potential(grid, p2, confinement_floor);
  m.scattering = s;
  return m;
}

double eval_F(const RealPair& p, const ScatteringParams& s) {
  require_same_grid(p.u1.grid, p.u2.grid);
  const double c = p.u1.grid.dim == 1 ? p.u1.grid.h : p.u1.grid.h * p.u1.grid.h;
  return 0.25 * c *
         kernels::quartic_sum(p.u1.data(), p.u2.data(), s.mu1, s.mu2, s.beta, p.u1.size());
}

double eval_F(const ComplexPair& p, const ScatteringParams& s) {
  return eval_F(RealPair{modulus_field(p.p1), modulus_field(p.p2)}, s);
}

double eval_energy(const RealPair& p, const ModelParams& m, double gamma) {
  return 0.5 * h_norm_sq(p, m.V1, m.V2) - gamma * eval_F(p, m.scattering);
}

double eval_energy(const ComplexPair& p, const ModelParams& m, double gamma) {
  return 0.5 * h_norm_sq(p, m.V1, m.V2) - gamma * eval_F(p, m.scattering);
}

double eval_action(const RealPair& p, const ModelParams& m, double omega1, double omega2,
                   double gamma) {
  return eval_energy(p, m, gamma) + 0.5 * omega1 * l2_norm_sq(p.u1) +
         0.5 * omega2 * l2_norm_sq(p.u2);
}

}  // namespace gpmass
