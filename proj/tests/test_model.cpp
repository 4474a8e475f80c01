#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "gpmass/eigen.hpp"
#include "gpmass/model.hpp"
#include "gpmass/rng.hpp"

using namespace gpmass;

namespace {

RealPair random_pair(const Grid& g, uint64_t seed) {
  Rng rng(seed);
  RealPair p{RealField(g), RealField(g)};
  for (auto& x : p.u1.v) x = rng.symmetric();
  for (auto& x : p.u2.v) x = rng.symmetric();
  return p;
}

}  // namespace

TEST_CASE("classify: regime table") {
  auto r = classify({1.0, -1.0, 0.7});
  CHECK(r.nondeg);
  CHECK(r.label == RegimeLabel::mixed_sign);

  r = classify({1.0, 1.0, -1.0});  // beta = -sqrt(mu1 mu2)
  CHECK_FALSE(r.nondeg);
  CHECK(r.label == RegimeLabel::degenerate);
  CHECK(r.diagnostic.find("beta") != std::string::npos);

  r = classify({-2.0, -2.0, 1.0});  // beta^2 = 1 < 4 = mu1 mu2
  CHECK(r.nondeg);
  CHECK(r.label == RegimeLabel::defocusing_weak_interaction);

  r = classify({1.0, 1.0, 0.2});
  CHECK(r.nondeg);
  CHECK(r.label == RegimeLabel::focusing_coop_or_comp);

  r = classify({-1.0, -1.0, 0.5});
  CHECK(r.nondeg);
  CHECK(r.label == RegimeLabel::defocusing_weak_interaction);

  r = classify({-1.0, -1.0, 2.0});  // beta^2 > mu1 mu2, beta != sqrt
  CHECK(r.nondeg);
  CHECK(r.label == RegimeLabel::defocusing);

  r = classify({-1.0, -1.0, 1.0});  // beta = sqrt(mu1 mu2)
  CHECK_FALSE(r.nondeg);

  r = classify({0.0, 0.0, 0.3});
  CHECK_FALSE(r.nondeg);
  CHECK(r.diagnostic.find("mu1 = mu2 = 0") != std::string::npos);

  CHECK_THROWS_AS(require_nondegenerate({1.0, 1.0, -1.0}), DegenerateRegime);
  CHECK_NOTHROW(require_nondegenerate({1.0, -1.0, 0.0}));
}

TEST_CASE("potentials: catalog evaluation and trapping checks") {
  Grid g = Grid::make(2, 33, 4.0);

  RealField h = evaluate_potential(g, {PotentialKind::harmonic, {}, {}});
  RealField a = evaluate_potential(g, {PotentialKind::anisotropic_harmonic, {1.0, 1.0}, {}});
  CHECK(h.v == a.v);  // same formula, same order of operations

  RealField q = evaluate_potential(g, {PotentialKind::quartic, {}, {}});
  for (std::size_t k = 0; k < q.size(); ++k)
    CHECK(q.v[k] == doctest::Approx(h.v[k] * h.v[k]).epsilon(1e-14));

  // confinement floor: harmonic boundary ring sits at V >= L-ish; a floor
  // above that must be rejected, a floor below accepted
  CHECK_NOTHROW(evaluate_potential(g, {PotentialKind::harmonic, {}, {}}, 10.0));
  CHECK_THROWS_AS(evaluate_potential(g, {PotentialKind::harmonic, {}, {}}, 1e6), ConfigError);

  CHECK_THROWS_AS(evaluate_potential(g, {PotentialKind::anisotropic_harmonic, {1.0}, {}}),
                  ConfigError);
}

TEST_CASE("custom potential file round-trip and negativity rejection") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gpmass_model_test";
  fs::create_directories(dir);
  Grid g = Grid::make(1, 64, 5.0);

  RealField V(g);
  for (int i = 0; i < g.n; ++i) V.v[i] = std::abs(g.coord(i));
  const fs::path p = dir / "V.gpfield";
  write_field(p, V);
  RealField back = evaluate_potential(g, {PotentialKind::custom_file, {}, p});
  CHECK(back.v == V.v);

  V.v[10] = -0.5;
  write_field(p, V);
  CHECK_THROWS_AS(evaluate_potential(g, {PotentialKind::custom_file, {}, p}), ConfigError);

  Grid g2 = Grid::make(1, 65, 5.0);
  CHECK_THROWS_AS(evaluate_potential(g2, {PotentialKind::custom_file, {}, p}), ConfigError);
}

TEST_CASE("eval_F: anchor Gaussian value and symmetry properties") {
  Grid g = Grid::make(1, 1024, 10.0);
  // 1D harmonic ground state via the eigen module (L2-normalized)
  RealField V = evaluate_potential(g, {PotentialKind::harmonic, {}, {}});
  Eigenpair ep = principal_eigenpair(V);

  // F(phi, phi) with (-1,-1,0) = -1/2 int phi^4 = -1/(2 sqrt(2 pi))
  RealPair p{ep.phi, ep.phi};
  const double F = eval_F(p, {-1.0, -1.0, 0.0});
  CHECK(F == doctest::Approx(-0.5 / std::sqrt(2 * std::numbers::pi)).epsilon(5e-4));
  // frozen discrete value (independent Lanczos + dense eigensolver agree)
  CHECK(F == doctest::Approx(-0.5 * 0.3989529609039).epsilon(1e-9));

  // sign flips leave F unchanged
  RealPair flipped{ep.phi, ep.phi};
  scale_field(flipped.u1, -1.0);
  CHECK(eval_F(flipped, {-1.0, -1.0, 0.0}) == F);

  // zero pair
  CHECK(eval_F(RealPair{RealField(g), RealField(g)}, {1.0, 1.0, 0.5}) == 0.0);
}

TEST_CASE("eval_F on complex pairs equals eval_F on modulus pairs exactly") {
  Grid g = Grid::make(1, 500, 5.0);
  Rng rng(3);
  ComplexPair z{ComplexField(g), ComplexField(g)};
  for (auto& v : z.p1.v) v = cxd(rng.symmetric(), rng.symmetric());
  for (auto& v : z.p2.v) v = cxd(rng.symmetric(), rng.symmetric());
  const ScatteringParams s{0.7, -1.3, 0.4};
  RealPair mod{modulus_field(z.p1), modulus_field(z.p2)};
  CHECK(eval_F(z, s) == eval_F(mod, s));  // identical quadrature path
}

TEST_CASE("defocusing-weak-interaction: F < 0 on nonzero pairs") {
  Grid g = Grid::make(1, 200, 5.0);
  const ScatteringParams s{-2.0, -2.0, 1.0};
  REQUIRE(classify(s).label == RegimeLabel::defocusing_weak_interaction);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    RealPair p = random_pair(g, seed);
    CHECK(eval_F(p, s) < 0.0);
  }
  CHECK(eval_F(RealPair{RealField(g), RealField(g)}, s) == 0.0);
}

TEST_CASE("eval_energy and eval_action identities") {
  Grid g = Grid::make(1, 1024, 10.0);
  ModelParams m = make_model(g, {PotentialKind::harmonic, {}, {}},
                             {PotentialKind::harmonic, {}, {}}, {0.0, 1.0, 0.0});
  Eigenpair ep = principal_eigenpair(m.V1);

  // (phi, 0) with mu1 = 0: E = lambda/2 regardless of gamma
  RealPair p{ep.phi, RealField(g)};
  CHECK(eval_energy(p, m, 3.7) == doctest::Approx(0.5 * ep.lambda).epsilon(1e-12));

  // gamma = 0: energy is half the H-norm for any pair
  RealPair q = random_pair(g, 17);
  CHECK(eval_energy(q, m, 0.0) ==
        doctest::Approx(0.5 * h_norm_sq(q, m.V1, m.V2)).epsilon(1e-12));

  // anchor action identity: gamma=0, omega_i = -lambda_i, p = (sqrt(rho1) phi, sqrt(rho2) phi)
  RealPair anchor{ep.phi, ep.phi};
  scale_field(anchor.u1, std::sqrt(2.0));
  scale_field(anchor.u2, std::sqrt(0.5));
  const double A = eval_action(anchor, m, -ep.lambda, -ep.lambda, 0.0);
  CHECK(A == doctest::Approx(0.0).epsilon(1e-10));

  // zero pair
  CHECK(eval_action(RealPair{RealField(g), RealField(g)}, m, 1.0, -1.0, 2.0) == 0.0);
}
