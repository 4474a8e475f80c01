#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "gpmass/kernels.hpp"
#include "gpmass/maximizer.hpp"
#include "gpmass/rng.hpp"

using namespace gpmass;

namespace {

ModelParams harmonic_model(const ScatteringParams& s, int n = 1024, double L = 10.0) {
  Grid g = Grid::make(1, n, L);
  return make_model(g, {PotentialKind::harmonic, {}, {}}, {PotentialKind::harmonic, {}, {}}, s);
}

RealPair anchor_pair(const EigenPairs& eigs, double rho1, double rho2) {
  RealPair p{eigs.first.phi, eigs.second.phi};
  scale_field(p.u1, std::sqrt(rho1));
  scale_field(p.u2, std::sqrt(rho2));
  return p;
}

void check_solution_invariants(const SolitarySolution& s, const ModelParams& m,
                               const MaximizeOptions& opts) {
  CHECK(std::abs(l2_norm_sq(s.pair.u1) - s.rho1) <= opts.ctol * s.rho1);
  CHECK(std::abs(l2_norm_sq(s.pair.u2) - s.rho2) <= opts.ctol * s.rho2);
  CHECK(std::abs(h_norm_sq(s.pair, m.V1, m.V2) - s.alpha) <= opts.ctol * s.alpha);
  CHECK(s.residual <= opts.rtol);
  double mn = 0.0;
  for (double v : s.pair.u1.v) mn = std::min(mn, v);
  for (double v : s.pair.u2.v) mn = std::min(mn, v);
  CHECK(mn >= 0.0);  // sign convention is exact
}

}  // namespace

TEST_CASE("retract: fixed point and pure-scaling cases") {
  ModelParams m = harmonic_model({-1.0, -1.0, 0.5});
  EigenPairs eigs = principal_eigenpairs(m);

  SUBCASE("a pair already on the constraint set is returned unchanged") {
    RealPair p = anchor_pair(eigs, 1.0, 1.0);
    const double alpha = h_norm_sq(p, m.V1, m.V2);  // exactly this pair's budget
    RealPair q = retract(p, m, {alpha, 1.0, 1.0}, eigs);
    for (std::size_t i = 0; i < p.u1.size(); ++i) {
      CHECK(q.u1.v[i] == doctest::Approx(p.u1.v[i]).epsilon(1e-12));
      CHECK(q.u2.v[i] == doctest::Approx(p.u2.v[i]).epsilon(1e-12));
    }
  }

  SUBCASE("scaled eigenpair at threshold budget reduces to the eigenpair") {
    RealPair p = anchor_pair(eigs, 1.0, 1.0);
    scale_field(p.u1, 2.0);
    scale_field(p.u2, 3.0);
    const double T = feasibility_threshold(eigs, 1.0, 1.0);
    RealPair q = retract(p, m, {T, 1.0, 1.0}, eigs);
    RealPair want = anchor_pair(eigs, 1.0, 1.0);
    CHECK(pair_l2_dist(q, want) <= 1e-10);
  }

  SUBCASE("eigen-level pair cannot be inflated above threshold") {
    RealPair p = anchor_pair(eigs, 1.0, 1.0);
    const double T = feasibility_threshold(eigs, 1.0, 1.0);
    CHECK_THROWS_AS(retract(p, m, {T + 0.5, 1.0, 1.0}, eigs), RetractFailure);
  }

  SUBCASE("zero component is rejected") {
    RealPair p{eigs.first.phi, RealField(m.grid)};
    CHECK_THROWS_AS(retract(p, m, {2.5, 1.0, 1.0}, eigs), RetractFailure);
  }
}

TEST_CASE("retract: random perturbations restore all three constraints to 1e-10") {
  ModelParams m = harmonic_model({-1.0, -1.0, 0.5});
  EigenPairs eigs = principal_eigenpairs(m);
  const ConstraintSpec c{2.5, 1.0, 1.0};
  // a genuinely off-eigen feasible point to perturb around
  SolitarySolution base = maximize(m, c, std::nullopt, {}, eigs);

  // Node-wise noise of amplitude a carries O(a^2/h) gradient energy; keep the
  // H-norm inflation well inside the budget the retract can shed.
  Rng rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    RealPair p = base.pair;
    for (auto& v : p.u1.v) v += 1e-3 * rng.symmetric();
    for (auto& v : p.u2.v) v += 1e-3 * rng.symmetric();
    RealPair q = retract(p, m, c, eigs);
    CHECK(std::abs(l2_norm_sq(q.u1) - c.rho1) <= 1e-10 * c.rho1);
    CHECK(std::abs(l2_norm_sq(q.u2) - c.rho2) <= 1e-10 * c.rho2);
    CHECK(std::abs(h_norm_sq(q, m.V1, m.V2) - c.alpha) <= 1e-10 * c.alpha);
    // retract is a small correction: stays near the perturbed input
    CHECK(pair_l2_dist(q, p) <= 0.2);
  }
}

TEST_CASE("extract_multipliers: eigenpair gives (-lambda1, -lambda2, 0)") {
  ModelParams m = harmonic_model({-1.0, -1.0, 0.5});
  EigenPairs eigs = principal_eigenpairs(m);
  RealPair p = anchor_pair(eigs, 1.0, 2.0);
  MultiplierFit fit = extract_multipliers(p, m);
  CHECK(fit.omega1 == doctest::Approx(-eigs.first.lambda).epsilon(1e-8));
  CHECK(fit.omega2 == doctest::Approx(-eigs.second.lambda).epsilon(1e-8));
  CHECK(std::abs(fit.gamma) <= 1e-8);
  CHECK(fit.residual <= 1e-8);
}

TEST_CASE("extract_multipliers: manufactured solution is recovered to 1e-8") {
  // Build V_i from the discrete operator so the Euler-Lagrange system holds
  // exactly on the grid: V_i = (lap_h u_i + gamma0 z_i)/u_i - omega0_i.
  // The profiles vanish at the box edge, so the Dirichlet boundary rows are
  // consistent and the manufactured V_i stay bounded and nonnegative.
  Grid g = Grid::make(1, 600, 6.0);
  const ScatteringParams s{1.0, -1.0, 0.3};
  const double gamma0 = 0.7, w01 = -4.0, w02 = -4.0;

  RealPair u{RealField(g), RealField(g)};
  const double cc = std::numbers::pi / (2.0 * g.extent);
  for (int i = 0; i < g.n; ++i) {
    const double x = g.coord(i);
    u.u1.v[i] = std::cos(cc * x);
    u.u2.v[i] = std::cos(cc * x) * std::cos(cc * x);
  }
  RealField lap1 = laplacian_apply(u.u1);
  RealField lap2 = laplacian_apply(u.u2);
  RealField z1(g), z2(g);
  kernels::cubic_term(u.u1.data(), u.u2.data(), s.mu1, s.beta, z1.data(), z1.size());
  kernels::cubic_term(u.u2.data(), u.u1.data(), s.mu2, s.beta, z2.data(), z2.size());

  ModelParams m;
  m.grid = g;
  m.V1 = RealField(g);
  m.V2 = RealField(g);
  for (int i = 0; i < g.n; ++i) {
    m.V1.v[i] = (lap1.v[i] + gamma0 * z1.v[i]) / u.u1.v[i] - w01;
    m.V2.v[i] = (lap2.v[i] + gamma0 * z2.v[i]) / u.u2.v[i] - w02;
    REQUIRE(m.V1.v[i] >= 0.0);
    REQUIRE(m.V2.v[i] >= 0.0);
  }
  m.scattering = s;

  MultiplierFit fit = extract_multipliers(u, m);
  CHECK(fit.omega1 == doctest::Approx(w01).epsilon(1e-8));
  CHECK(fit.omega2 == doctest::Approx(w02).epsilon(1e-8));
  CHECK(fit.gamma == doctest::Approx(gamma0).epsilon(1e-8));
  CHECK(fit.residual <= 1e-10);
}

TEST_CASE("extract_multipliers: constant fields make the fit singular") {
  Grid g = Grid::make(1, 128, 4.0);
  ModelParams m = make_model(g, {PotentialKind::harmonic, {}, {}},
                             {PotentialKind::harmonic, {}, {}}, {1.0, 1.0, 0.2});
  RealPair p{RealField(g), RealField(g)};
  for (auto& v : p.u1.v) v = 1.0;
  for (auto& v : p.u2.v) v = 1.0;  // u^3 proportional to u
  CHECK_THROWS_AS(extract_multipliers(p, m), SingularFit);
}

TEST_CASE("maximize: threshold anchor returns the eigenpair solution") {
  ModelParams m = harmonic_model({-1.0, -1.0, 0.0});
  EigenPairs eigs = principal_eigenpairs(m);
  const double T = feasibility_threshold(eigs, 1.0, 1.0);
  MaximizeOptions opts;
  SolitarySolution s = maximize(m, {T, 1.0, 1.0}, std::nullopt, opts, eigs);

  // M = -1/2 int phi^4: frozen discrete value, and the Gaussian limit
  CHECK(s.m_value == doctest::Approx(-0.5 * 0.3989529609039).epsilon(1e-9));
  CHECK(s.m_value == doctest::Approx(-0.19947).epsilon(1e-3));
  CHECK(s.gamma == 0.0);
  CHECK(s.omega1 == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(s.omega2 == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(s.residual <= 1e-8);
  CHECK(pair_l2_dist(s.pair, anchor_pair(eigs, 1.0, 1.0)) <= 1e-12);
}

TEST_CASE("maximize: infeasible and degenerate inputs are rejected") {
  ModelParams m = harmonic_model({-1.0, -1.0, 0.5});
  EigenPairs eigs = principal_eigenpairs(m);
  const double T = feasibility_threshold(eigs, 1.0, 1.0);
  CHECK_THROWS_AS(maximize(m, {T - 0.01, 1.0, 1.0}, std::nullopt, {}, eigs),
                  InfeasibleConstraint);
  ModelParams bad = harmonic_model({1.0, 1.0, -1.0});
  CHECK_THROWS_AS(maximize(bad, {3.0, 1.0, 1.0}, std::nullopt, {}, eigs), DegenerateRegime);
}

TEST_CASE("maximize: defocusing weak interaction at alpha = 2.5") {
  ModelParams m = harmonic_model({-1.0, -1.0, 0.5});
  EigenPairs eigs = principal_eigenpairs(m);
  MaximizeOptions opts;
  SolitarySolution s = maximize(m, {2.5, 1.0, 1.0}, std::nullopt, opts, eigs);

  check_solution_invariants(s, m, opts);
  CHECK(s.gamma > 0.0);

  // multiplier consistency identity, tested against u_i:
  // h_i + omega_i rho_i = gamma int (mu_i u_i^4 + beta u_i^2 u_j^2)
  const double h1 = h_norm_sq_component(s.pair.u1, m.V1);
  const double h2 = h_norm_sq_component(s.pair.u2, m.V2);
  RealField z1(m.grid), z2(m.grid);
  kernels::cubic_term(s.pair.u1.data(), s.pair.u2.data(), m.scattering.mu1, m.scattering.beta,
                      z1.data(), z1.size());
  kernels::cubic_term(s.pair.u2.data(), s.pair.u1.data(), m.scattering.mu2, m.scattering.beta,
                      z2.data(), z2.size());
  CHECK(h1 + s.omega1 * s.rho1 ==
        doctest::Approx(s.gamma * l2_inner(z1, s.pair.u1)).epsilon(1e-5));
  CHECK(h2 + s.omega2 * s.rho2 ==
        doctest::Approx(s.gamma * l2_inner(z2, s.pair.u2)).epsilon(1e-5));

  // action stationarity: finite-difference directional derivative vanishes
  Rng rng(5);
  RealPair dir{RealField(m.grid), RealField(m.grid)};
  for (auto& v : dir.u1.v) v = rng.symmetric();
  for (auto& v : dir.u2.v) v = rng.symmetric();
  const double nd = std::sqrt(l2_norm_sq(dir.u1) + l2_norm_sq(dir.u2));
  scale_field(dir.u1, 1.0 / nd);
  scale_field(dir.u2, 1.0 / nd);
  const double eps = 1e-5;
  RealPair plus = s.pair, minus = s.pair;
  axpy(eps, dir.u1, plus.u1);
  axpy(eps, dir.u2, plus.u2);
  axpy(-eps, dir.u1, minus.u1);
  axpy(-eps, dir.u2, minus.u2);
  const double dA = (eval_action(plus, m, s.omega1, s.omega2, s.gamma) -
                     eval_action(minus, m, s.omega1, s.omega2, s.gamma)) /
                    (2.0 * eps);
  CHECK(std::abs(dA) <= 1e-4);
}

TEST_CASE("maximize: multi-start agreement in the uniqueness regime") {
  ModelParams m = harmonic_model({-1.0, -1.0, 0.5});
  EigenPairs eigs = principal_eigenpairs(m);
  MaximizeOptions opts;
  auto sols = maximize_multistart(m, {2.5, 1.0, 1.0}, 4, opts, eigs);
  CHECK(sols.size() == 1);  // all seeds collapse to one branch (dedup at 1e-3)

  MaximizeOptions o2 = opts;
  o2.seed = 12345;
  SolitarySolution other = maximize(m, {2.5, 1.0, 1.0}, std::nullopt, o2, eigs);
  CHECK(pair_l2_dist(other.pair, sols.front().pair) <= 1e-5);
}

TEST_CASE("maximize: mixed-sign branch stays near the anchor for small excess") {
  ModelParams m = harmonic_model({1.0, -1.0, 0.3});
  EigenPairs eigs = principal_eigenpairs(m);
  const double T = feasibility_threshold(eigs, 1.0, 1.0);
  SolitarySolution s = maximize(m, {T + 1e-3, 1.0, 1.0}, std::nullopt, {}, eigs);
  CHECK(pair_l2_dist(s.pair, anchor_pair(eigs, 1.0, 1.0)) <= 0.1);
  CHECK(s.gamma > 0.0);
}

TEST_CASE("maximize: focusing regime converges with positive gamma") {
  ModelParams m = harmonic_model({1.0, 1.0, 0.2});
  EigenPairs eigs = principal_eigenpairs(m);
  const double T = feasibility_threshold(eigs, 1.0, 1.0);
  MaximizeOptions opts;
  SolitarySolution s = maximize(m, {T + 1.0, 1.0, 1.0}, std::nullopt, opts, eigs);
  check_solution_invariants(s, m, opts);
  CHECK(s.gamma > 0.0);
}

TEST_CASE("maximize: sign-flipped init yields the identical nonnegative solution") {
  ModelParams m = harmonic_model({-1.0, -1.0, 0.5});
  EigenPairs eigs = principal_eigenpairs(m);
  const ConstraintSpec c{2.5, 1.0, 1.0};
  SolitarySolution a = maximize(m, c, std::nullopt, {}, eigs);
  RealPair flipped = a.pair;
  scale_field(flipped.u2, -1.0);
  SolitarySolution b = maximize(m, c, flipped, {}, eigs);
  SolitarySolution d = maximize(m, c, a.pair, {}, eigs);
  CHECK(b.pair.u1.v == d.pair.u1.v);  // |(-u)| == |u| pointwise, identical path
  CHECK(b.pair.u2.v == d.pair.u2.v);
  CHECK(b.m_value == doctest::Approx(a.m_value).epsilon(1e-10));
}

TEST_CASE("to_physical scaling laws") {
  Grid g = Grid::make(1, 64, 4.0);
  SolitarySolution s;
  s.pair = RealPair{RealField(g), RealField(g)};
  for (int i = 0; i < g.n; ++i) {
    s.pair.u1.v[i] = 0.1 * i;
    s.pair.u2.v[i] = 0.2 * i;
  }
  s.rho1 = 1.0;
  s.rho2 = 2.0;
  s.omega1 = -1.5;
  s.omega2 = -2.5;

  s.gamma = 1.0;
  PhysicalSolution p = to_physical(s);
  CHECK(p.pair.u1.v == s.pair.u1.v);
  CHECK(p.m1 == 1.0);
  CHECK(p.m2 == 2.0);

  s.gamma = 4.0;
  p = to_physical(s);
  CHECK(p.m1 == 4.0);
  CHECK(p.m2 == 8.0);
  for (std::size_t i = 0; i < p.pair.u1.size(); ++i)
    CHECK(p.pair.u1.v[i] == doctest::Approx(2.0 * s.pair.u1.v[i]).epsilon(1e-15));
  CHECK(p.omega1 == s.omega1);

  s.gamma = 0.0;
  CHECK_THROWS_AS(to_physical(s), NonpositiveGamma);
}

TEST_CASE("to_physical: converged solution satisfies the physical system") {
  // residual of -lap U_i + V_i U_i + omega_i U_i - (mu_i U_i^3 + beta U_i U_j^2)
  ModelParams m = harmonic_model({-1.0, -1.0, 0.5});
  EigenPairs eigs = principal_eigenpairs(m);
  SolitarySolution s = maximize(m, {2.5, 1.0, 1.0}, std::nullopt, {}, eigs);
  PhysicalSolution p = to_physical(s);

  RealField r1 = schrodinger_apply(m.V1, p.pair.u1);
  RealField r2 = schrodinger_apply(m.V2, p.pair.u2);
  const double denom = std::sqrt(l2_norm_sq(r1) + l2_norm_sq(r2));
  RealField z1(m.grid), z2(m.grid);
  kernels::cubic_term(p.pair.u1.data(), p.pair.u2.data(), m.scattering.mu1, m.scattering.beta,
                      z1.data(), z1.size());
  kernels::cubic_term(p.pair.u2.data(), p.pair.u1.data(), m.scattering.mu2, m.scattering.beta,
                      z2.data(), z2.size());
  axpy(p.omega1, p.pair.u1, r1);
  axpy(p.omega2, p.pair.u2, r2);
  axpy(-1.0, z1, r1);
  axpy(-1.0, z2, r2);
  CHECK(std::sqrt(l2_norm_sq(r1) + l2_norm_sq(r2)) / denom <= 1e-6);
}
