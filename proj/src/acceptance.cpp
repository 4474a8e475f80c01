#include "gpmass/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <iterator>
#include <numbers>
#include <ostream>
#include <utility>
#include <vector>

#include "gpmass/bifurcation.hpp"
#include "gpmass/config.hpp"
#include "gpmass/continuation.hpp"
#include "gpmass/evolve.hpp"
#include "gpmass/kernels.hpp"
#include "gpmass/rng.hpp"

namespace gpmass {

namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// Accumulates headline measurements and failed clauses for one criterion.
struct Check {
  bool pass = true;
  std::string info;
  std::string fails;
  int nfail = 0;

  void note(const std::string& s) {
    if (!info.empty()) info += "  ";
    info += s;
  }
  void require(bool ok, const std::string& clause) {
    if (ok) return;
    pass = false;
    if (++nfail > 6) return;  // keep the line readable
    if (!fails.empty()) fails += "; ";
    fails += clause;
  }
  std::string detail() const {
    if (pass) return info;
    std::string out = info.empty() ? "" : info + " | ";
    out += "failed: " + fails;
    if (nfail > 6) out += fmt(" (+%d more)", nfail - 6);
    return out;
  }
};

struct Suite {
  int scale = 1;

  // resolution divided by scale; discretization-limited tolerances widen by
  // scale^2 (second-order stencils), so the pinned values hold exactly at
  // scale 1 and the suite remains honest when run coarser
  int n_at(int base) const { return std::max(32, base / scale); }
  double tol2(double base) const { return base * scale * scale; }

  ModelParams model1d(const ScatteringParams& s, int n, double L = 10.0) const {
    return make_model(Grid::make(1, n, L), {PotentialKind::harmonic, {}, {}},
                      {PotentialKind::harmonic, {}, {}}, s);
  }
};

double constraint_violation(const SolitarySolution& s, const ModelParams& m) {
  const double v1 = std::abs(l2_norm_sq(s.pair.u1) - s.rho1) / s.rho1;
  const double v2 = std::abs(l2_norm_sq(s.pair.u2) - s.rho2) / s.rho2;
  const double vh = std::abs(h_norm_sq(s.pair, m.V1, m.V2) - s.alpha) / s.alpha;
  return std::max({v1, v2, vh});
}

std::vector<double> alpha_grid20(double T) {
  std::vector<double> g(20);
  for (int k = 0; k < 20; ++k) g[k] = T + 0.05 + (2.0 - 0.05) * k / 19.0;
  return g;
}

Check c1_eigensolver(const Suite& S) {
  Check c;
  ModelParams m1 = S.model1d({-1.0, -1.0, 0.5}, S.n_at(1024));
  const double l1 = principal_eigenpairs(m1).first.lambda;
  // 2D box: L = 5 keeps the Dirichlet truncation error of the n = 128
  // harmonic ground state below the pinned tolerance (a wider box at the same
  // n under-resolves the core and overshoots it)
  ModelParams m2 = make_model(Grid::make(2, S.n_at(128), 5.0),
                              {PotentialKind::harmonic, {}, {}},
                              {PotentialKind::harmonic, {}, {}}, {-1.0, -1.0, 0.5});
  const double l2 = principal_eigenpairs(m2).first.lambda;
  c.note(fmt("lambda_1d=%.7f lambda_2d=%.7f", l1, l2));
  c.require(std::abs(l1 - 1.0) <= S.tol2(1e-4), fmt("|lambda_1d - 1| <= %g", S.tol2(1e-4)));
  c.require(std::abs(l2 - 2.0) <= S.tol2(1e-3), fmt("|lambda_2d - 2| <= %g", S.tol2(1e-3)));
  return c;
}

Check c2_anchor(const Suite& S) {
  Check c;
  ModelParams m = S.model1d({-1.0, -1.0, 0.0}, S.n_at(1024));
  EigenPairs eigs = principal_eigenpairs(m);
  const double T = feasibility_threshold(eigs, 1.0, 1.0);
  SolitarySolution s = maximize(m, {T, 1.0, 1.0}, std::nullopt, {}, eigs);
  c.note(fmt("M=%.6f omega=(%.6f, %.6f) gamma=%.1e", s.m_value, s.omega1, s.omega2, s.gamma));
  c.require(std::abs(s.m_value - (-0.19947)) <= 1e-3, "M = -0.19947 +- 1e-3");
  const double wtol = S.tol2(1e-4);
  c.require(std::abs(s.omega1 + 1.0) <= wtol, fmt("omega1 = -1 +- %g", wtol));
  c.require(std::abs(s.omega2 + 1.0) <= wtol, fmt("omega2 = -1 +- %g", wtol));
  c.require(std::abs(s.gamma) <= wtol, fmt("gamma = 0 +- %g", wtol));
  return c;
}

Check c3_euler_lagrange(const Suite& S) {
  Check c;
  const ScatteringParams regimes[] = {{1.0, -1.0, 0.3}, {-1.0, -1.0, 0.5}, {1.0, 1.0, 0.2}};
  for (const ScatteringParams& sc : regimes) {
    ModelParams m = S.model1d(sc, S.n_at(512));
    EigenPairs eigs = principal_eigenpairs(m);
    const double T = feasibility_threshold(eigs, 1.0, 1.0);
    SolitarySolution s = maximize(m, {T + 0.5, 1.0, 1.0}, std::nullopt, {}, eigs);
    const double viol = constraint_violation(s, m);
    const std::string tag = fmt("(%g,%g,%g)", sc.mu1, sc.mu2, sc.beta);
    c.note(tag + fmt(" res=%.1e viol=%.1e gamma=%.3f", s.residual, viol, s.gamma));
    c.require(s.residual < 1e-6, tag + " relative residual < 1e-6");
    c.require(viol < 1e-9, tag + " constraint violations < 1e-9");
    c.require(s.gamma > 0.0, tag + " gamma > 0 above threshold");
  }
  return c;
}

Check c4_monotone_unique(const Suite& S) {
  Check c;
  ModelParams m = S.model1d({-1.0, -1.0, 0.5}, S.n_at(512));
  EigenPairs eigs = principal_eigenpairs(m);
  const double T = feasibility_threshold(eigs, 1.0, 1.0);
  const std::vector<double> grid = alpha_grid20(T);
  BranchCurve b = sweep(m, 1.0, 1.0, grid, {}, eigs);
  double dg_min = 1e300;
  for (std::size_t k = 1; k < b.points.size(); ++k)
    dg_min = std::min(dg_min, b.points[k].gamma - b.points[k - 1].gamma);
  c.require(dg_min > 0.0, "all gamma increments strictly positive");

  double spread = 0.0;
  for (double a : grid) {
    MaximizeOptions o;
    o.seed = 1;
    SolitarySolution ref = maximize(m, {a, 1.0, 1.0}, std::nullopt, o, eigs);
    for (uint64_t seed = 2; seed <= 8; ++seed) {
      o.seed = seed;
      SolitarySolution alt = maximize(m, {a, 1.0, 1.0}, std::nullopt, o, eigs);
      spread = std::max(spread, pair_l2_dist(ref.pair, alt.pair));
    }
  }
  c.note(fmt("min dgamma=%.3e multi-start spread=%.2e", dg_min, spread));
  c.require(spread <= 1e-5, "8-seed multi-start agrees to 1e-5 in L2");
  return c;
}

Check c5_e_identity(const Suite& S) {
  Check c;
  ModelParams m = S.model1d({-1.0, -1.0, 0.5}, S.n_at(512));
  EigenPairs eigs = principal_eigenpairs(m);
  const double T = feasibility_threshold(eigs, 1.0, 1.0);
  BranchCurve b = sweep(m, 1.0, 1.0, alpha_grid20(T), {}, eigs);
  const std::size_t mid = b.points.size() / 2;
  ECurve ec = e_curve(b, b.points[mid].alpha);
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < b.points.size(); ++k) {
    const double ep = e_prime_probe(m, b, k, ec.gamma_star, 1e-3, {}, eigs);
    const double identity = 0.5 * (1.0 - ec.gamma_star / b.points[k].gamma);
    worst = std::max(worst, std::abs(ep - identity));
  }
  const double estar = e_prime_probe(m, b, mid, ec.gamma_star, 1e-3, {}, eigs);
  c.note(fmt("max |e' - (1 - gamma*/gamma)/2| = %.2e  |e'(alpha*)| = %.2e", worst,
             std::abs(estar)));
  c.require(worst < 5e-3, "e-identity holds to 5e-3 at all interior points");
  c.require(std::abs(estar) < 5e-3, "e'(alpha*) = 0 within FD tolerance");
  return c;
}

Check c6_small_mass(const Suite& S) {
  Check c;
  ModelParams m = S.model1d({1.0, 1.0, 0.2}, S.n_at(512));
  std::vector<double> eps(8);
  for (int k = 0; k < 8; ++k) eps[k] = std::pow(10.0, -2.0 - 2.0 * k / 7.0);
  ScalingFit fit = small_mass_scaling(m, std::numbers::pi / 4.0, eps);
  c.note(fmt("slope=%.4f dist_to_anchor=%.2e", fit.slope, fit.dist_to_anchor));
  c.require(std::abs(fit.slope - 0.5) <= 0.05, "log-log slope = 0.50 +- 0.05");
  c.require(fit.dist_to_anchor <= 1e-2, "smallest-eps maximizer within 1e-2 of the anchor");
  return c;
}

Check c7_kernel(const Suite& S) {
  Check c;
  ModelParams m = S.model1d({1.0, 1.0, 0.0}, S.n_at(1024));
  EigenPairs eigs = principal_eigenpairs(m);
  const double th = std::numbers::pi / 4.0;
  ThetaPoint tp = theta_point(eigs, th);
  KernelElement ke = kernel_element(m, eigs, th);

  RealField z1(m.grid), z2(m.grid);
  kernels::cubic_term(tp.u_bar.u1.data(), tp.u_bar.u2.data(), m.scattering.mu1,
                      m.scattering.beta, z1.data(), z1.size());
  kernels::cubic_term(tp.u_bar.u2.data(), tp.u_bar.u1.data(), m.scattering.mu2,
                      m.scattering.beta, z2.data(), z2.size());
  LinearizedImage im =
      linearized_apply(m, eigs, tp, RealPair{ke.psi1, ke.psi2}, ke.o1, ke.o2, 1.0);
  const double res = std::sqrt(l2_norm_sq(im.f1) + l2_norm_sq(im.f2) + im.h1 * im.h1 +
                               im.h2 * im.h2 + im.k * im.k) /
                     std::sqrt(l2_norm_sq(z1) + l2_norm_sq(z2));
  c.note(fmt("membership res=%.2e o=(%.6f, %.6f)", res, ke.o1, ke.o2));
  c.require(res < 1e-6, "kernel-membership residual < 1e-6");
  const double otol = S.tol2(1e-4);
  c.require(std::abs(ke.o1 - 0.19947) <= otol, fmt("o1 = 0.19947 +- %g", otol));
  c.require(std::abs(ke.o2 - 0.19947) <= otol, fmt("o2 = 0.19947 +- %g", otol));

  double nd_min = 1e300;
  for (double theta : {0.2, 0.5, th, 1.0, 1.35})
    nd_min = std::min(nd_min, kernel_element(m, eigs, theta).nondeg_value);
  c.note(fmt("min nondeg=%.4f", nd_min));
  c.require(nd_min > 0.0, "nondeg_value > 0 across the theta sample");
  return c;
}

Check c8_conservation(const Suite& S) {
  Check c;
  ModelParams m = S.model1d({-1.0, -1.0, 0.5}, S.n_at(512));
  EigenPairs eigs = principal_eigenpairs(m);
  const double T = feasibility_threshold(eigs, 1.0, 1.0);
  SolitarySolution s = maximize(m, {T + 0.25, 1.0, 1.0}, std::nullopt, {}, eigs);

  auto max_drift = [&](const ComplexPair& init, double dt, long steps) {
    CnCache cache;
    EvolutionState st = make_state(init, m, s.gamma);
    double dm = 0.0, de = 0.0;
    for (long k = 0; k < steps; ++k) {
      st = step(std::move(st), m, s.gamma, dt, cache);
      if ((k + 1) % 10 == 0 || k + 1 == steps) {
        const double m1 = l2_norm_sq(modulus_field(st.pair.p1));
        const double m2 = l2_norm_sq(modulus_field(st.pair.p2));
        dm = std::max({dm, std::abs(m1 - st.mass1_0) / st.mass1_0,
                       std::abs(m2 - st.mass2_0) / st.mass2_0});
        de = std::max(de, std::abs(eval_energy(st.pair, m, s.gamma) - st.energy_0) /
                              std::abs(st.energy_0));
      }
    }
    return std::pair<double, double>{dm, de};
  };

  ComplexPair wave{ComplexField(s.pair.u1), ComplexField(s.pair.u2)};
  const auto [dm, de] = max_drift(wave, 1e-3, 10000);
  c.note(fmt("standing wave: mass drift=%.1e energy drift=%.1e", dm, de));
  c.require(dm < 1e-10, "relative mass drift < 1e-10 over 1e4 steps");
  c.require(de < 1e-6, "relative energy drift < 1e-6 over 1e4 steps");

  // The standing wave's energy error is quadratically suppressed (the energy
  // gradient is parallel to the profile while mass is conserved to roundoff),
  // so its drift sits at the accumulation floor where no dt-order is visible.
  // A deterministic +-0.5% component rescale of the same converged profile
  // puts the error in the truncation regime without changing the model.
  ComplexPair kicked = wave;
  for (auto& z : kicked.p1.v) z *= 1.005;
  for (auto& z : kicked.p2.v) z *= 0.995;
  const double dek = max_drift(kicked, 1e-3, 10000).second;
  const double dek2 = max_drift(kicked, 5e-4, 20000).second;
  c.note(fmt("order probe: energy drift %.2e -> %.2e (ratio %.2f)", dek, dek2, dek / dek2));
  c.require(dek >= 3.5 * dek2 || dek < 1e-12,
            "dt halving reduces energy drift by >= 3.5x");
  return c;
}

Check c9_stability(const Suite& S, double* max_traj_seconds) {
  Check c;
  ModelParams m = S.model1d({-1.0, -1.0, 0.5}, S.n_at(512));
  EigenPairs eigs = principal_eigenpairs(m);
  const double T = feasibility_threshold(eigs, 1.0, 1.0);
  SolitarySolution s = maximize(m, {T + 0.5, 1.0, 1.0}, std::nullopt, {}, eigs);

  auto timed = [&](double delta, double dt, PerturbationKind kind, uint64_t seed) {
    StabilityOptions o;
    o.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    StabilityReport rep = stability_experiment(s, m, delta, 20.0, dt, kind, o);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    *max_traj_seconds = std::max(*max_traj_seconds, secs);
    return rep;
  };

  StabilityReport un = timed(0.0, 5e-4, PerturbationKind::bump, 1);
  c.note(fmt("unperturbed sup=%.2e", un.sup_distance));
  c.require(un.sup_distance < 1e-5, "unperturbed sup orbital distance < 1e-5 to horizon 20");

  double sup_worst = 0.0, ratio_lo = 1e300, ratio_hi = 0.0;
  for (PerturbationKind kind : {PerturbationKind::bump, PerturbationKind::rotation,
                                PerturbationKind::branch_tangent}) {
    for (uint64_t seed = 1; seed <= 3; ++seed) {
      StabilityReport full = timed(1e-3, 1e-3, kind, seed);
      StabilityReport half = timed(5e-4, 1e-3, kind, seed);
      sup_worst = std::max(sup_worst, full.sup_distance);
      const double ratio = full.sup_distance / half.sup_distance;
      ratio_lo = std::min(ratio_lo, ratio);
      ratio_hi = std::max(ratio_hi, ratio);
      const std::string tag = fmt("%s/seed%llu", perturbation_kind_name(kind),
                                  static_cast<unsigned long long>(seed));
      c.require(full.sup_distance < 1e-1, tag + " sup distance < 1e-1");
      c.require(ratio >= 1.5 && ratio <= 2.5, tag + " delta-halving ratio in [1.5, 2.5]");
    }
  }
  c.note(fmt("perturbed sup max=%.2e ratios=[%.2f, %.2f] max traj %.1f s", sup_worst,
             ratio_lo, ratio_hi, *max_traj_seconds));
  c.require(*max_traj_seconds < 300.0, "runtime < 5 min per trajectory");
  return c;
}

Check c10_invariants(const Suite& S) {
  Check c;
  Grid g1 = Grid::make(1, S.n_at(512), 10.0);
  RealField v0(g1);  // zero potential isolates the kinetic form

  // diamagnetic inequality on random complex fields
  Rng rng(12345);
  int viol = 0;
  double margin_min = 1e300;
  for (int t = 0; t < 100; ++t) {
    ComplexField w(g1);
    for (auto& z : w.v) z = cxd(rng.symmetric(), rng.symmetric());
    const double kin_w = h_norm_sq_component(w, v0);
    const double kin_abs = h_norm_sq_component(modulus_field(w), v0);
    margin_min = std::min(margin_min, kin_w - kin_abs);
    if (!(kin_abs <= kin_w * (1.0 + 1e-12))) ++viol;
  }
  c.note(fmt("diamagnetic violations=%d min margin=%.3e", viol, margin_min));
  c.require(viol == 0, "diamagnetic inequality on 100 random fields");

  // Laplacian symmetry and negativity, 1D and 2D
  for (int dim = 1; dim <= 2; ++dim) {
    Grid g = dim == 1 ? g1 : Grid::make(2, S.n_at(48), 6.0);
    for (int t = 0; t < 10; ++t) {
      RealField f(g), h(g);
      for (auto& x : f.v) x = rng.symmetric();
      for (auto& x : h.v) x = rng.symmetric();
      RealField lf = laplacian_apply(f), lh = laplacian_apply(h);
      const double a = l2_inner(lf, h), b = l2_inner(f, lh);
      c.require(std::abs(a - b) <= 1e-10 * (std::abs(a) + std::abs(b) + 1.0),
                fmt("%dD Laplacian symmetry", dim));
      c.require(l2_inner(lf, f) < 0.0, fmt("%dD Laplacian negativity", dim));
    }
  }

  // F evenness and modulus-equality
  const ScatteringParams sc{1.0, -1.0, 0.3};
  RealPair p{RealField(g1), RealField(g1)};
  for (auto& x : p.u1.v) x = rng.symmetric();
  for (auto& x : p.u2.v) x = rng.symmetric();
  RealPair pneg = p;
  scale_field(pneg.u1, -1.0);
  c.require(eval_F(p, sc) == eval_F(pneg, sc), "F is even per component");
  ComplexPair cp{ComplexField(g1), ComplexField(g1)};
  RealPair mod{RealField(g1), RealField(g1)};
  for (std::size_t k = 0; k < cp.p1.size(); ++k) {
    cp.p1.v[k] = std::polar(std::abs(p.u1.v[k]), rng.symmetric() * 3.0);
    cp.p2.v[k] = std::polar(std::abs(p.u2.v[k]), rng.symmetric() * 3.0);
    mod.u1.v[k] = std::abs(cp.p1.v[k]);
    mod.u2.v[k] = std::abs(cp.p2.v[k]);
  }
  const double fc = eval_F(cp, sc), fm = eval_F(mod, sc);
  c.require(std::abs(fc - fm) <= 1e-12 * (std::abs(fc) + 1.0),
            "F of a complex pair equals F of its modulus pair");

  // M-continuity under alpha-grid refinement
  ModelParams m = S.model1d({-1.0, -1.0, 0.5}, S.n_at(256));
  EigenPairs eigs = principal_eigenpairs(m);
  const double T = feasibility_threshold(eigs, 1.0, 1.0);
  auto max_jump = [&](int pts) {
    std::vector<double> grid(pts);
    for (int k = 0; k < pts; ++k) grid[k] = T + 0.1 + 1.0 * k / (pts - 1);
    BranchCurve b = sweep(m, 1.0, 1.0, grid, {}, eigs);
    double j = 0.0;
    for (std::size_t k = 1; k < b.points.size(); ++k)
      j = std::max(j, std::abs(b.points[k].m_value - b.points[k - 1].m_value));
    return j;
  };
  const double j5 = max_jump(5), j9 = max_jump(9), j17 = max_jump(17);
  c.note(fmt("M jumps %.3e -> %.3e -> %.3e", j5, j9, j17));
  c.require(j9 < j5 && j17 < j9, "M jumps decrease under grid refinement");
  return c;
}

Check c11_degenerate(const Suite&) {
  Check c;
  const char* toml =
      "[model]\n"
      "dim = 1\n"
      "n = 64\n"
      "L = 10.0\n"
      "potential1 = {kind = \"harmonic\"}\n"
      "potential2 = {kind = \"harmonic\"}\n"
      "mu1 = 1.0\n"
      "mu2 = 1.0\n"
      "beta = -1.0\n";
  try {
    model_from_config(parse_toml_text(toml, "<degenerate>"));
    c.require(false, "degenerate (1,1,-1) configuration was accepted");
  } catch (const DegenerateRegime& e) {
    c.note(fmt("rejected as expected: %s", e.what()));
  }
  return c;
}

}  // namespace

std::vector<CriterionOutcome> run_acceptance(const AcceptanceOptions& opts,
                                             std::ostream& log) {
  Suite S{std::max(1, opts.scale)};
  double max_traj = 0.0;

  struct Item {
    const char* name;
    std::function<Check()> body;
    double limit_seconds;  // 0 = no pinned ceiling
  };
  const Item items[] = {
      {"eigensolver oracle", [&] { return c1_eigensolver(S); }, 30.0},
      {"threshold anchor", [&] { return c2_anchor(S); }, 0.0},
      {"Euler-Lagrange certification", [&] { return c3_euler_lagrange(S); }, 0.0},
      {"defocusing monotonicity + uniqueness", [&] { return c4_monotone_unique(S); }, 300.0},
      {"e-identity along the branch", [&] { return c5_e_identity(S); }, 0.0},
      {"small-mass scaling", [&] { return c6_small_mass(S); }, 300.0},
      {"bifurcation kernel diagnostics", [&] { return c7_kernel(S); }, 0.0},
      {"conservation under time stepping", [&] { return c8_conservation(S); }, 0.0},
      {"orbital stability", [&] { return c9_stability(S, &max_traj); }, 0.0},
      {"invariant suites", [&] { return c10_invariants(S); }, 0.0},
      {"degenerate config rejected (expected fail)", [&] { return c11_degenerate(S); }, 0.0},
  };

  std::vector<CriterionOutcome> out;
  int failed = 0;
  for (std::size_t i = 0; i < std::size(items); ++i) {
    const int idx = static_cast<int>(i) + 1;
    if (opts.only != 0 && opts.only != idx) continue;
    CriterionOutcome r;
    r.index = idx;
    r.name = items[i].name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Check c = items[i].body();
      r.pass = c.pass;
      r.detail = c.detail();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = fmt("exception: %s", e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (items[i].limit_seconds > 0.0 && r.seconds > items[i].limit_seconds) {
      r.pass = false;
      r.detail += fmt(" | exceeded %.0f s runtime ceiling", items[i].limit_seconds);
    }
    if (!r.pass) ++failed;
    log << fmt("%2d  %-44s %s %8.2f s  %s\n", idx, r.name.c_str(),
               r.pass ? "PASS" : "FAIL", r.seconds, r.detail.c_str());
    log.flush();
    out.push_back(std::move(r));
  }
  if (failed == 0)
    log << "acceptance: ALL PASS\n";
  else
    log << fmt("acceptance: %d of %zu FAILED\n", failed, out.size());
  return out;
}

}  // namespace gpmass
