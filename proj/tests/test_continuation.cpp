#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "gpmass/continuation.hpp"

using namespace gpmass;

namespace {

ModelParams harmonic_model(const ScatteringParams& s, int n = 512, double L = 10.0) {
  Grid g = Grid::make(1, n, L);
  return make_model(g, {PotentialKind::harmonic, {}, {}}, {PotentialKind::harmonic, {}, {}},
                    s);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = a + (b - a) * k / (n - 1);
  return v;
}

// scalar-only branch for formula tests (pairs left empty on purpose)
BranchCurve synthetic_branch(const std::vector<double>& alphas,
                             const std::vector<double>& gammas,
                             const std::vector<double>& m_values) {
  BranchCurve b;
  b.rho1 = b.rho2 = 1.0;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    SolitarySolution s;
    s.alpha = alphas[k];
    s.gamma = gammas[k];
    s.m_value = m_values[k];
    b.points.push_back(std::move(s));
  }
  // gamma' exactly as sweep computes it: central interior, one-sided ends
  const std::size_t n = alphas.size();
  b.gamma_prime.assign(n, 0.0);
  if (n >= 2) {
    b.gamma_prime[0] = (gammas[1] - gammas[0]) / (alphas[1] - alphas[0]);
    b.gamma_prime[n - 1] = (gammas[n - 1] - gammas[n - 2]) / (alphas[n - 1] - alphas[n - 2]);
    for (std::size_t k = 1; k + 1 < n; ++k)
      b.gamma_prime[k] = (gammas[k + 1] - gammas[k - 1]) / (alphas[k + 1] - alphas[k - 1]);
  }
  return b;
}

}  // namespace

TEST_CASE("sweep: the threshold grid point is the anchor with gamma = 0") {
  ModelParams m = harmonic_model({-1.0, -1.0, 0.5});
  EigenPairs eigs = principal_eigenpairs(m);
  const double T = feasibility_threshold(eigs, 1.0, 1.0);
  BranchCurve b = sweep(m, 1.0, 1.0, {T}, {}, eigs);
  REQUIRE(b.points.size() == 1);
  CHECK(b.points[0].alpha == T);
  CHECK(b.points[0].gamma == 0.0);
  CHECK(b.gamma_prime.size() == 1);
}

TEST_CASE("sweep: defocusing weak interaction branch is strictly monotone in gamma") {
  ModelParams m = harmonic_model({-1.0, -1.0, 0.5});
  EigenPairs eigs = principal_eigenpairs(m);
  const double T = feasibility_threshold(eigs, 1.0, 1.0);
  SweepOptions opts;
  BranchCurve b = sweep(m, 1.0, 1.0, linspace(T + 0.05, T + 2.0, 8), opts, eigs);
  REQUIRE(b.points.size() == 8);

  for (std::size_t k = 0; k < b.points.size(); ++k) {
    const SolitarySolution& s = b.points[k];
    CHECK(s.residual <= opts.inner.rtol);
    CHECK(std::abs(l2_norm_sq(s.pair.u1) - 1.0) <= opts.inner.ctol);
    CHECK(std::abs(l2_norm_sq(s.pair.u2) - 1.0) <= opts.inner.ctol);
    CHECK(std::abs(h_norm_sq(s.pair, m.V1, m.V2) - s.alpha) <= opts.inner.ctol * s.alpha);
    if (k > 0) CHECK(s.gamma > b.points[k - 1].gamma);  // defocusing monotonicity
  }
  for (double gp : b.gamma_prime) CHECK(gp > 0.0);

  // omega-trend diagnostic: omega1' rho1 + omega2' rho2 < 0 (loose tolerance)
  for (std::size_t k = 1; k + 1 < b.points.size(); ++k) {
    const double da = b.points[k + 1].alpha - b.points[k - 1].alpha;
    const double w1p = (b.points[k + 1].omega1 - b.points[k - 1].omega1) / da;
    const double w2p = (b.points[k + 1].omega2 - b.points[k - 1].omega2) / da;
    CHECK(w1p * 1.0 + w2p * 1.0 < 1e-2);
  }

  SUBCASE("e-curve identity and local minimum at the reference point") {
    const std::size_t mid = 4;
    ECurve ec = e_curve(b, b.points[mid].alpha);
    CHECK(ec.gamma_star == doctest::Approx(b.points[mid].gamma).epsilon(1e-12));
    CHECK(b.e_values == ec.e);
    // e''' ~ gamma*/gamma^3 diverges toward the threshold, so the identity is
    // certified with the local probe (delta << branch spacing), not the
    // branch-grid derivative
    for (std::size_t k = 1; k + 1 < b.points.size(); ++k) {
      const double identity = 0.5 * (1.0 - ec.gamma_star / b.points[k].gamma);
      const double ep = e_prime_probe(m, b, k, ec.gamma_star, 1e-3, opts, eigs);
      CHECK(std::abs(ep - identity) < 5e-3);
    }
    CHECK(std::abs(e_prime_probe(m, b, mid, ec.gamma_star, 1e-3, opts, eigs)) < 5e-3);
    // the branch-grid derivative at the reference point is truncation-limited
    CHECK(std::abs(ec.e_prime[mid]) < 2e-2);
    CHECK(ec.e[mid] <= ec.e[mid - 1] + 1e-12);
    CHECK(ec.e[mid] <= ec.e[mid + 1] + 1e-12);
    CHECK_THROWS_AS(e_curve(b, b.points.front().alpha - 1.0), OutOfRange);
    CHECK_THROWS_AS(e_curve(b, b.points.back().alpha + 1.0), OutOfRange);
  }

  SUBCASE("stability verdict: interior stable, window spans the branch") {
    const double margin = default_stability_margin(b);
    CHECK(margin >= 0.0);
    StabilityVerdict v = stability_verdict(b, margin);
    REQUIRE(v.flags.size() == b.points.size());
    for (std::size_t k = 1; k + 1 < v.flags.size(); ++k)
      CHECK(v.flags[k] == PointVerdict::stable);
    CHECK(v.window_lo == b.points.front().alpha);
    CHECK(v.window_hi == b.points.back().alpha);

    StabilityVerdict strict = stability_verdict(b, 1e9);
    for (auto f : strict.flags) CHECK(f == PointVerdict::inconclusive);
  }

  SUBCASE("invert_mass recovers branch points from their physical masses") {
    const std::size_t mid = 3;
    const double g = b.points[mid].gamma;
    const double alpha = invert_mass(b, g * 1.0, g * 1.0);
    CHECK(alpha == doctest::Approx(b.points[mid].alpha).epsilon(1e-12));

    const double gt = 0.5 * (b.points[3].gamma + b.points[4].gamma);
    const double between = invert_mass(b, gt, gt);
    CHECK(between > b.points[3].alpha);
    CHECK(between < b.points[4].alpha);

    CHECK_THROWS_AS(invert_mass(b, g, 1.1 * g), InfeasibleConstraint);
    CHECK_THROWS_AS(invert_mass(b, 10.0 * b.points.back().gamma,
                                10.0 * b.points.back().gamma),
                    OutOfRange);
  }

  SUBCASE("M is continuous: refinement shrinks the largest jump") {
    BranchCurve coarse = sweep(m, 1.0, 1.0, linspace(T + 0.1, T + 1.1, 5), opts, eigs);
    BranchCurve fine = sweep(m, 1.0, 1.0, linspace(T + 0.1, T + 1.1, 9), opts, eigs);
    auto max_jump = [](const BranchCurve& c) {
      double j = 0.0;
      for (std::size_t k = 1; k < c.points.size(); ++k)
        j = std::max(j, std::abs(c.points[k].m_value - c.points[k - 1].m_value));
      return j;
    };
    CHECK(max_jump(fine) < max_jump(coarse));
  }
}

TEST_CASE("sweep: cross-validation finds no discontinuity on the unique branch") {
  ModelParams m = harmonic_model({-1.0, -1.0, 0.5}, 256);
  EigenPairs eigs = principal_eigenpairs(m);
  const double T = feasibility_threshold(eigs, 1.0, 1.0);
  SweepOptions opts;
  opts.cross_validate = true;
  BranchCurve b = sweep(m, 1.0, 1.0, linspace(T + 0.3, T + 1.3, 3), opts, eigs);
  REQUIRE(b.discontinuity.size() == 3);
  for (char f : b.discontinuity) CHECK(f == 0);
}

TEST_CASE("sweep: input validation") {
  ModelParams m = harmonic_model({-1.0, -1.0, 0.5}, 128);
  EigenPairs eigs = principal_eigenpairs(m);
  CHECK_THROWS_AS(sweep(m, 1.0, 1.0, {}, {}, eigs), ConfigError);
  CHECK_THROWS_AS(sweep(m, 1.0, 1.0, {3.0, 2.5}, {}, eigs), ConfigError);
  const double T = feasibility_threshold(eigs, 1.0, 1.0);
  CHECK_THROWS_AS(sweep(m, 1.0, 1.0, {T - 0.5, T + 0.5}, {}, eigs), InfeasibleConstraint);
  ModelParams bad = harmonic_model({1.0, 1.0, -1.0}, 128);
  CHECK_THROWS_AS(sweep(bad, 1.0, 1.0, {3.0}, {}, eigs), DegenerateRegime);
}

TEST_CASE("e_curve: injected constant gamma makes e flat to roundoff") {
  const std::vector<double> alphas = {2.0, 2.3, 2.6, 2.9, 3.2};
  const double gstar = 0.7, c0 = 0.25;
  std::vector<double> gammas(alphas.size(), gstar), ms(alphas.size());
  for (std::size_t k = 0; k < alphas.size(); ++k) ms[k] = alphas[k] / (2.0 * gstar) + c0;
  BranchCurve b = synthetic_branch(alphas, gammas, ms);
  ECurve ec = e_curve(b, 2.6);
  CHECK(ec.gamma_star == gstar);
  // e_k = alpha_k/2 - gstar*M_k is constant up to one rounding of gstar*M_k,
  // so the divided differences sit at the ulp scale, not exactly at zero
  for (double ep : ec.e_prime) CHECK(std::abs(ep) < 1e-14);
}

TEST_CASE("stability_verdict: decreasing gamma is inconclusive everywhere") {
  const std::vector<double> alphas = {2.0, 2.5, 3.0, 3.5};
  const std::vector<double> gammas = {1.0, 0.8, 0.5, 0.1};
  BranchCurve b = synthetic_branch(alphas, gammas, {0, 0, 0, 0});
  StabilityVerdict v = stability_verdict(b, 1e-8);
  for (auto f : v.flags) CHECK(f == PointVerdict::inconclusive);
  CHECK(std::isnan(v.window_lo));
  CHECK(std::isnan(v.window_hi));
  CHECK_THROWS_AS(invert_mass(b, 0.5, 0.5), OutOfRange);

  BranchCurve two = synthetic_branch({2.0, 2.5}, {0.1, 0.2}, {0, 0});
  CHECK_THROWS_AS(stability_verdict(two, 1e-8), OutOfRange);
}
