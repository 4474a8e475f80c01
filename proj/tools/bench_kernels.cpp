// Timing comparison between the OpenMP kernels and the serial reference
// implementation. Prints one table row per kernel and size; values are the
// best of `reps` runs to damp scheduler noise.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "gpmass/kernels.hpp"
#include "gpmass/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using clock_type = std::chrono::steady_clock;

double time_best(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clock_type::now();
    fn();
    const auto t1 = clock_type::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

volatile double sink;  // defeat dead-code elimination

void row(const char* name, std::size_t n, double t_serial, double t_par) {
  std::printf("%-14s %10zu %12.3f %12.3f %8.2fx\n", name, n, t_serial * 1e6, t_par * 1e6,
              t_serial / t_par);
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 7;
#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: not enabled in this build\n");
#endif
  std::printf("%-14s %10s %12s %12s %9s\n", "kernel", "n", "serial(us)", "parallel(us)",
              "speedup");

  gpmass::Rng rng(7);
  for (std::size_t n : {std::size_t{1} << 14, std::size_t{1} << 18, std::size_t{1} << 22}) {
    std::vector<double> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.symmetric();
      b[i] = rng.symmetric();
    }

    row("dot", n,
        time_best(reps, [&] { sink = gpmass::kernels::serial::dot(a.data(), b.data(), n); }),
        time_best(reps, [&] { sink = gpmass::kernels::dot(a.data(), b.data(), n); }));
    row("quartic_sum", n,
        time_best(reps,
                  [&] {
                    sink = gpmass::kernels::serial::quartic_sum(a.data(), b.data(), -1.0, -1.0,
                                                                0.5, n);
                  }),
        time_best(reps, [&] {
          sink = gpmass::kernels::quartic_sum(a.data(), b.data(), -1.0, -1.0, 0.5, n);
        }));
    row("axpy", n,
        time_best(reps, [&] { gpmass::kernels::serial::axpy(1.0001, a.data(), c.data(), n); }),
        time_best(reps, [&] { gpmass::kernels::axpy(1.0001, a.data(), c.data(), n); }));
    row("cubic_term", n,
        time_best(reps,
                  [&] {
                    gpmass::kernels::serial::cubic_term(a.data(), b.data(), -1.0, 0.5, c.data(),
                                                        n);
                  }),
        time_best(reps, [&] {
          gpmass::kernels::cubic_term(a.data(), b.data(), -1.0, 0.5, c.data(), n);
        }));

    const int side = static_cast<int>(std::sqrt(static_cast<double>(n)));
    std::vector<double> lap(static_cast<std::size_t>(side) * side);
    row("laplacian_2d", static_cast<std::size_t>(side) * side,
        time_best(reps,
                  [&] {
                    gpmass::kernels::serial::laplacian_2d(a.data(), lap.data(), side, 1e-2);
                  }),
        time_best(reps,
                  [&] { gpmass::kernels::laplacian_2d(a.data(), lap.data(), side, 1e-2); }));
    std::printf("\n");
  }
  return 0;
}
