#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "gpmass/kernels.hpp"
#include "gpmass/rng.hpp"

using namespace gpmass;
using kernels::cxd;

namespace {

std::vector<double> random_vec(std::size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.symmetric();
  return v;
}

std::vector<cxd> random_cvec(std::size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<cxd> v(n);
  for (auto& x : v) x = cxd(rng.symmetric(), rng.symmetric());
  return v;
}

}  // namespace

TEST_CASE("reductions agree with the serial reference across the cutoff") {
  // sizes straddle both the chunk size and the parallel cutoff
  for (std::size_t n : {std::size_t{1}, std::size_t{1000}, std::size_t{1024},
                        std::size_t{1025}, std::size_t{40000}}) {
    auto a = random_vec(n, 11 + n);
    auto b = random_vec(n, 23 + n);
    auto c = random_vec(n, 37 + n);

    CHECK(kernels::sum(a.data(), n) ==
          doctest::Approx(kernels::serial::sum(a.data(), n)).epsilon(1e-12));
    CHECK(kernels::dot(a.data(), b.data(), n) ==
          doctest::Approx(kernels::serial::dot(a.data(), b.data(), n)).epsilon(1e-12));
    CHECK(kernels::dot3(a.data(), b.data(), c.data(), n) ==
          doctest::Approx(kernels::serial::dot3(a.data(), b.data(), c.data(), n))
              .epsilon(1e-12));
    CHECK(kernels::sum_sq(a.data(), n) ==
          doctest::Approx(kernels::serial::sum_sq(a.data(), n)).epsilon(1e-12));
    CHECK(kernels::quartic_sum(a.data(), b.data(), -1.0, 2.0, 0.3, n) ==
          doctest::Approx(kernels::serial::quartic_sum(a.data(), b.data(), -1.0, 2.0, 0.3, n))
              .epsilon(1e-12));

    auto z = random_cvec(n, 51 + n);
    auto w = random_cvec(n, 77 + n);
    const cxd d1 = kernels::dot_cr(z.data(), a.data(), n);
    const cxd d2 = kernels::serial::dot_cr(z.data(), a.data(), n);
    CHECK(std::abs(d1 - d2) <= 1e-12 * (1.0 + std::abs(d2)));
    CHECK(kernels::sum_abs2(z.data(), n) ==
          doctest::Approx(kernels::serial::sum_abs2(z.data(), n)).epsilon(1e-12));
    CHECK(kernels::dot_w_abs2(a.data(), z.data(), n) ==
          doctest::Approx(kernels::serial::dot_w_abs2(a.data(), z.data(), n)).epsilon(1e-12));
    CHECK(kernels::dot_re(z.data(), w.data(), n) ==
          doctest::Approx(kernels::serial::dot_re(z.data(), w.data(), n)).epsilon(1e-12));
  }
}

TEST_CASE("reductions are deterministic: chunked result is exactly reproducible") {
  const std::size_t n = 100000;  // above the parallel cutoff
  auto a = random_vec(n, 5);
  auto b = random_vec(n, 6);
  const double first = kernels::dot(a.data(), b.data(), n);
  for (int rep = 0; rep < 5; ++rep)
    CHECK(kernels::dot(a.data(), b.data(), n) == first);  // bitwise equal
}

TEST_CASE("pointwise kernels match the serial reference exactly") {
  const std::size_t n = 70000;
  auto a = random_vec(n, 1);
  auto b = random_vec(n, 2);

  auto y1 = random_vec(n, 3);
  auto y2 = y1;
  kernels::axpy(0.37, a.data(), y1.data(), n);
  kernels::serial::axpy(0.37, a.data(), y2.data(), n);
  CHECK(y1 == y2);

  y2 = y1;
  kernels::xpay(a.data(), -1.25, y1.data(), n);
  kernels::serial::xpay(a.data(), -1.25, y2.data(), n);
  CHECK(y1 == y2);

  y2 = y1;
  kernels::scale(3.5, y1.data(), n);
  kernels::serial::scale(3.5, y2.data(), n);
  CHECK(y1 == y2);

  std::vector<double> c1(n), c2(n);
  kernels::cubic_term(a.data(), b.data(), -1.0, 0.5, c1.data(), n);
  kernels::serial::cubic_term(a.data(), b.data(), -1.0, 0.5, c2.data(), n);
  CHECK(c1 == c2);

  auto z = random_cvec(n, 4);
  std::vector<double> m1(n), m2(n);
  kernels::abs_value(z.data(), m1.data(), n);
  kernels::serial::abs_value(z.data(), m2.data(), n);
  CHECK(m1 == m2);
}

TEST_CASE("laplacian stencils match the serial reference exactly") {
  SUBCASE("1d") {
    const int n = 5000;
    auto f = random_vec(n, 9);
    std::vector<double> o1(n), o2(n);
    kernels::laplacian_1d(f.data(), o1.data(), n, 0.01);
    kernels::serial::laplacian_1d(f.data(), o2.data(), n, 0.01);
    CHECK(o1 == o2);
  }
  SUBCASE("2d") {
    const int n = 301;
    auto f = random_vec(static_cast<std::size_t>(n) * n, 10);
    std::vector<double> o1(f.size()), o2(f.size());
    kernels::laplacian_2d(f.data(), o1.data(), n, 0.01);
    kernels::serial::laplacian_2d(f.data(), o2.data(), n, 0.01);
    CHECK(o1 == o2);
  }
  SUBCASE("2d complex") {
    const int n = 173;
    auto f = random_cvec(static_cast<std::size_t>(n) * n, 12);
    std::vector<cxd> o1(f.size()), o2(f.size());
    kernels::laplacian_2d(f.data(), o1.data(), n, 0.05);
    kernels::serial::laplacian_2d(f.data(), o2.data(), n, 0.05);
    CHECK(o1 == o2);
  }
}

TEST_CASE("phase_rotate matches serial and preserves modulus") {
  const std::size_t n = 40000;
  auto p1 = random_cvec(n, 21);
  auto p2 = random_cvec(n, 22);
  auto q1 = p1;
  auto q2 = p2;
  auto V1 = random_vec(n, 23);
  auto V2 = random_vec(n, 24);
  for (auto& v : V1) v = std::abs(v);
  for (auto& v : V2) v = std::abs(v);

  std::vector<double> abs_before(n);
  kernels::abs_value(p1.data(), abs_before.data(), n);

  kernels::phase_rotate(p1.data(), p2.data(), V1.data(), V2.data(), -1.0, -1.0, 0.5, 0.8, 0.01,
                        n);
  kernels::serial::phase_rotate(q1.data(), q2.data(), V1.data(), V2.data(), -1.0, -1.0, 0.5,
                                0.8, 0.01, n);
  CHECK(p1 == q1);
  CHECK(p2 == q2);

  std::vector<double> abs_after(n);
  kernels::abs_value(p1.data(), abs_after.data(), n);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    worst = std::max(worst, std::abs(abs_after[i] - abs_before[i]));
  CHECK(worst < 1e-14);
}

TEST_CASE("rng produces uniform values in [0,1) deterministically") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  Rng c(43);
  CHECK(c.uniform() != Rng(42).uniform());
}
