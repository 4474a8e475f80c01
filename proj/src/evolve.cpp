#include "gpmass/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "gpmass/errors.hpp"
#include "gpmass/kernels.hpp"
#include "gpmass/rng.hpp"
#include "gpmass/solver.hpp"

namespace gpmass {

namespace {

double cell(const Grid& g) { return g.dim == 1 ? g.h : g.h * g.h; }

double mass_of(const ComplexField& f) {
  return cell(f.grid) * kernels::sum_abs2(f.data(), f.size());
}

// Rebuild the cache when the (grid, theta) key changes. For 1D this holds the
// Thomas factorization of tridiag(e, d, e) with d = 1 + 2 i theta / h^2 and
// e = -i theta / h^2 (strictly diagonally dominant, so the sweep is stable).
void refresh_cache(CnCache& c, const Grid& g, double theta) {
  if (c.grid == g && c.theta == theta) return;
  c.grid = g;
  c.theta = theta;
  if (g.dim == 1) {
    const cxd e{0.0, -theta / (g.h * g.h)};
    const cxd d = 1.0 - 2.0 * e;
    c.cp.assign(g.n, cxd{});
    c.denom_inv.assign(g.n, cxd{});
    cxd denom = d;
    for (int k = 0; k < g.n; ++k) {
      if (k > 0) denom = d - e * c.cp[k - 1];
      c.denom_inv[k] = 1.0 / denom;
      c.cp[k] = e * c.denom_inv[k];
    }
  } else {
    for (auto& w : c.warm) w.assign(g.size(), 0.0);
  }
}

// Solve (I - i theta lap) x = b in place. 1D: direct complex Thomas solve.
// 2D: the normal equations (I + theta^2 lap^2) x = (I + i theta lap) b have a
// real SPD operator, so the real and imaginary parts decouple into two real
// CG solves (warm-started across steps).
void cn_solve(ComplexField& b, const CnCache& c, std::vector<double>* warm_re,
              std::vector<double>* warm_im) {
  const Grid& g = b.grid;
  const double theta = c.theta;
  if (g.dim == 1) {
    const cxd e{0.0, -theta / (g.h * g.h)};
    b.v[0] *= c.denom_inv[0];
    for (int k = 1; k < g.n; ++k) b.v[k] = (b.v[k] - e * b.v[k - 1]) * c.denom_inv[k];
    for (int k = g.n - 2; k >= 0; --k) b.v[k] -= c.cp[k] * b.v[k + 1];
    return;
  }

  ComplexField lb = laplacian_apply(b);
  kernels::axpy(cxd{0.0, theta}, lb.data(), b.data(), b.size());  // b <- (I + i th lap) b
  std::vector<double> rhs(g.size());
  auto apply = [&](const double* in, double* out) {
    RealField t1(g);
    std::copy(in, in + t1.size(), t1.v.begin());
    RealField t2 = laplacian_apply(t1);
    RealField t3 = laplacian_apply(t2);
    for (std::size_t i = 0; i < t1.size(); ++i) out[i] = in[i] + theta * theta * t3.v[i];
  };
  for (int part = 0; part < 2; ++part) {
    std::vector<double>& x = part == 0 ? *warm_re : *warm_im;
    for (std::size_t i = 0; i < rhs.size(); ++i)
      rhs[i] = part == 0 ? b.v[i].real() : b.v[i].imag();
    CgResult res = cg_solve(apply, rhs.data(), x.data(), rhs.size(), 1e-12, 10000);
    if (res.rel_residual > 1e-10)
      throw LinearSolveFailure("cn_solve: 2D normal-equation CG stalled at residual " +
                               std::to_string(res.rel_residual));
    for (std::size_t i = 0; i < rhs.size(); ++i)
      b.v[i] = part == 0 ? cxd{x[i], b.v[i].imag()} : cxd{b.v[i].real(), x[i]};
  }
}

void half_phase(ComplexPair& p, const ModelParams& m, double gamma_star, double c) {
  kernels::phase_rotate(p.p1.data(), p.p2.data(), m.V1.data(), m.V2.data(),
                        m.scattering.mu1, m.scattering.mu2, m.scattering.beta, gamma_star,
                        c, p.p1.size());
}

}  // namespace

EvolutionState make_state(const ComplexPair& pair, const ModelParams& m, double gamma_star) {
  require_same_grid(pair.p1.grid, m.grid);
  require_same_grid(pair.p2.grid, m.grid);
  EvolutionState st;
  st.pair = pair;
  st.t = 0.0;
  st.mass1_0 = mass_of(pair.p1);
  st.mass2_0 = mass_of(pair.p2);
  st.energy_0 = eval_energy(pair, m, gamma_star);
  return st;
}

EvolutionState make_state(const RealPair& pair, const ModelParams& m, double gamma_star) {
  return make_state(ComplexPair{ComplexField(pair.u1), ComplexField(pair.u2)}, m,
                    gamma_star);
}

EvolutionState step(EvolutionState st, const ModelParams& m, double gamma_star, double dt,
                    CnCache& cache) {
  if (dt == 0.0) throw ConfigError("step: dt must be nonzero");
  const double theta = 0.5 * dt;
  refresh_cache(cache, st.pair.p1.grid, theta);

  half_phase(st.pair, m, gamma_star, theta);
  for (int comp = 0; comp < 2; ++comp) {
    ComplexField& f = comp == 0 ? st.pair.p1 : st.pair.p2;
    // rhs = (I + i theta lap) Psi; cn_solve inverts (I - i theta lap) on it
    ComplexField lb = laplacian_apply(f);
    kernels::axpy(cxd{0.0, theta}, lb.data(), f.data(), f.size());
    cn_solve(f, cache, &cache.warm[2 * comp], &cache.warm[2 * comp + 1]);
  }
  half_phase(st.pair, m, gamma_star, theta);
  st.t += dt;

  const double d1 = std::abs(mass_of(st.pair.p1) - st.mass1_0) / st.mass1_0;
  const double d2 = std::abs(mass_of(st.pair.p2) - st.mass2_0) / st.mass2_0;
  if (d1 > 1e-6 || d2 > 1e-6)
    throw NoConvergence("step: integrator fault, relative mass drift " +
                        std::to_string(std::max(d1, d2)) + " at t=" + std::to_string(st.t));
  return st;
}

EvolutionState step(EvolutionState st, const ModelParams& m, double gamma_star, double dt) {
  CnCache cache;
  return step(std::move(st), m, gamma_star, dt, cache);
}

double orbital_distance(const ComplexPair& psi, const RealPair& u, const ModelParams& m) {
  require_same_grid(psi.p1.grid, u.u1.grid);
  require_same_grid(psi.p1.grid, m.grid);
  double d2 = 0.0;
  const ComplexField* pc[2] = {&psi.p1, &psi.p2};
  const RealField* uc[2] = {&u.u1, &u.u2};
  const RealField* V[2] = {&m.V1, &m.V2};
  for (int i = 0; i < 2; ++i) {
    const double a = h_norm_sq_component(*pc[i], *V[i]);
    const double b = h_norm_sq_component(*uc[i], *V[i]);
    const double cross = std::abs(h_inner(*pc[i], *uc[i], *V[i]));
    d2 += std::max(0.0, a + b - 2.0 * cross);
  }
  return std::sqrt(d2);
}

Trajectory evolve_trajectory(EvolutionState st, const ModelParams& m, double gamma_star,
                             double dt, double horizon, double sample_dt,
                             const RealPair* reference, CnCache& cache) {
  if (!(dt > 0.0) || !(horizon > 0.0))
    throw ConfigError("evolve_trajectory: dt and horizon must be positive");
  const long steps = std::lround(horizon / dt);
  const long every = std::max(1L, std::lround(sample_dt / dt));

  Trajectory tr;
  auto record = [&]() {
    tr.t.push_back(st.t);
    tr.mass1.push_back(mass_of(st.pair.p1));
    tr.mass2.push_back(mass_of(st.pair.p2));
    tr.energy.push_back(eval_energy(st.pair, m, gamma_star));
    if (reference) tr.dist.push_back(orbital_distance(st.pair, *reference, m));
  };
  record();
  for (long k = 1; k <= steps; ++k) {
    st = step(std::move(st), m, gamma_star, dt, cache);
    if (k % every == 0 || k == steps) record();
  }
  return tr;
}

const char* perturbation_kind_name(PerturbationKind k) {
  switch (k) {
    case PerturbationKind::bump: return "bump";
    case PerturbationKind::rotation: return "rotation";
    case PerturbationKind::branch_tangent: return "branch-tangent";
  }
  return "?";
}

PerturbationKind perturbation_kind_from_name(const std::string& name) {
  if (name == "bump") return PerturbationKind::bump;
  if (name == "rotation") return PerturbationKind::rotation;
  if (name == "branch-tangent") return PerturbationKind::branch_tangent;
  throw ConfigError("unknown perturbation kind '" + name +
                    "' (expected bump|rotation|branch-tangent)");
}

namespace {

// Smooth random Gaussian bump per component, scaled to H-norm delta.
RealPair bump_direction(const ModelParams& m, Rng& rng) {
  const Grid& g = m.grid;
  RealPair d{RealField(g), RealField(g)};
  for (int comp = 0; comp < 2; ++comp) {
    RealField& f = comp == 0 ? d.u1 : d.u2;
    const double amp = rng.symmetric();
    const double x0 = 0.5 * g.extent * rng.symmetric();
    const double y0 = 0.5 * g.extent * rng.symmetric();
    const double w = g.extent * (0.125 + 0.125 * rng.uniform());
    for (int i = 0; i < g.n; ++i) {
      const double dx = g.coord(i) - x0;
      if (g.dim == 1) {
        f.v[i] = amp * std::exp(-dx * dx / (w * w));
      } else {
        for (int j = 0; j < g.n; ++j) {
          const double dy = g.coord(j) - y0;
          f.v[static_cast<std::size_t>(i) * g.n + j] =
              amp * std::exp(-(dx * dx + dy * dy) / (w * w));
        }
      }
    }
  }
  return d;
}

}  // namespace

ComplexPair perturbed_data(const SolitarySolution& s, const ModelParams& m, double delta,
                           PerturbationKind kind, const StabilityOptions& opts) {
  const RealPair& u = s.pair;
  if (delta == 0.0) return ComplexPair{ComplexField(u.u1), ComplexField(u.u2)};

  if (kind == PerturbationKind::rotation) {
    // Rotate each component inside span{u_i, phi_i}: with v_i the normalized
    // orthogonal complement of phi_i (matched to ||u_i||), the rotation
    // cos(t) u_i + sin(t) v_i preserves the mass exactly for every t; pick t
    // so the H-distance to u is exactly delta (bisection on a closed form).
    const EigenPairs eigs = principal_eigenpairs(m);
    RealPair v{RealField(m.grid), RealField(m.grid)};
    const RealField* phi[2] = {&eigs.first.phi, &eigs.second.phi};
    const RealField* uu[2] = {&u.u1, &u.u2};
    RealField* vv[2] = {&v.u1, &v.u2};
    for (int i = 0; i < 2; ++i) {
      *vv[i] = *phi[i];
      axpy(-l2_inner(*phi[i], *uu[i]) / l2_norm_sq(*uu[i]), *uu[i], *vv[i]);
      const double nv = l2_norm(*vv[i]);
      if (nv <= 1e-12) {
        *vv[i] = RealField(m.grid);  // u_i already parallel to phi_i
        continue;
      }
      scale_field(*vv[i], l2_norm(*uu[i]) / nv);
    }
    const double huu = h_norm_sq(u, m.V1, m.V2);
    const double hvv = h_norm_sq(v, m.V1, m.V2);
    const double huv = l2_inner(schrodinger_apply(m.V1, u.u1), v.u1) +
                       l2_inner(schrodinger_apply(m.V2, u.u2), v.u2);
    auto dist2 = [&](double t) {
      const double a = std::cos(t) - 1.0, b = std::sin(t);
      return a * a * huu + b * b * hvv + 2.0 * a * b * huv;
    };
    double lo = 0.0, hi = std::numbers::pi / 2.0;
    if (dist2(hi) < delta * delta)
      throw OutOfRange("perturbed_data: rotation cannot reach the requested delta");
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (dist2(mid) < delta * delta ? lo : hi) = mid;
    }
    const double t = 0.5 * (lo + hi);
    ComplexPair out{ComplexField(m.grid), ComplexField(m.grid)};
    for (std::size_t i = 0; i < out.p1.size(); ++i) {
      out.p1.v[i] = std::cos(t) * u.u1.v[i] + std::sin(t) * v.u1.v[i];
      out.p2.v[i] = std::cos(t) * u.u2.v[i] + std::sin(t) * v.u2.v[i];
    }
    return out;
  }

  RealPair dir{RealField(m.grid), RealField(m.grid)};
  if (kind == PerturbationKind::bump) {
    Rng rng(opts.seed);
    dir = bump_direction(m, rng);
  } else {
    // branch tangent: finite difference of the maximizer in alpha
    const EigenPairs eigs = principal_eigenpairs(m);
    const double dalpha = 1e-2 * std::max(1.0, s.alpha);
    SolitarySolution nb = maximize(m, {s.alpha + dalpha, s.rho1, s.rho2},
                                   std::optional<RealPair>(s.pair), opts.inner, eigs);
    dir = nb.pair;
    axpy(-1.0, u.u1, dir.u1);
    axpy(-1.0, u.u2, dir.u2);
  }
  const double hn = std::sqrt(h_norm_sq(dir, m.V1, m.V2));
  if (hn <= 0.0) throw OutOfRange("perturbed_data: degenerate perturbation direction");
  scale_field(dir.u1, delta / hn);
  scale_field(dir.u2, delta / hn);
  ComplexPair out{ComplexField(u.u1), ComplexField(u.u2)};
  for (std::size_t i = 0; i < out.p1.size(); ++i) {
    out.p1.v[i] += dir.u1.v[i];
    out.p2.v[i] += dir.u2.v[i];
  }
  return out;
}

StabilityReport stability_experiment(const SolitarySolution& s, const ModelParams& m,
                                     double delta, double horizon, double dt,
                                     PerturbationKind kind, const StabilityOptions& opts) {
  ComplexPair psi0 = perturbed_data(s, m, delta, kind, opts);
  EvolutionState st = make_state(psi0, m, s.gamma);
  CnCache cache;
  Trajectory tr =
      evolve_trajectory(std::move(st), m, s.gamma, dt, horizon, opts.sample_dt, &s.pair,
                        cache);

  StabilityReport rep;
  rep.delta = delta;
  rep.horizon = horizon;
  rep.times = tr.t;
  rep.distance_series = tr.dist;
  rep.sup_distance = *std::max_element(tr.dist.begin(), tr.dist.end());
  const double m10 = tr.mass1.front(), m20 = tr.mass2.front(), e0 = tr.energy.front();
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    rep.max_mass_drift = std::max({rep.max_mass_drift, std::abs(tr.mass1[k] - m10) / m10,
                                   std::abs(tr.mass2[k] - m20) / m20});
    rep.max_energy_drift =
        std::max(rep.max_energy_drift, std::abs(tr.energy[k] - e0) / std::abs(e0));
  }
  return rep;
}

}  // namespace gpmass
