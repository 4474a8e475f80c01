#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "gpmass/errors.hpp"
#include "gpmass/kernels.hpp"

namespace gpmass {

struct CgResult {
  int iterations = 0;
  double rel_residual = 0.0;  // true residual recomputed at exit
};

// Conjugate gradients for an SPD operator given as apply(x, out). Works on raw
// vectors; the caller owns grids and boundary handling. Terminates on the
// recurrence residual, then recomputes the true residual so the caller can
// judge the solve honestly. Breaks out early when the residual stagnates (CG
// on nearly singular systems can stall without diverging).
inline CgResult cg_solve(const std::function<void(const double*, double*)>& apply,
                         const double* b, double* x, std::size_t n, double rel_tol,
                         int max_iters) {
  std::vector<double> r(n), p(n), ap(n);
  apply(x, ap.data());
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  p = r;
  double rr = kernels::dot(r.data(), r.data(), n);
  const double bnorm = std::sqrt(kernels::dot(b, b, n));
  const double stop = rel_tol * (bnorm > 0.0 ? bnorm : 1.0);

  CgResult res;
  double best = std::sqrt(rr);
  int since_best = 0;
  for (int it = 0; it < max_iters && std::sqrt(rr) > stop; ++it) {
    apply(p.data(), ap.data());
    const double pap = kernels::dot(p.data(), ap.data(), n);
    if (!(pap > 0.0)) throw LinearSolveFailure("cg: operator not positive definite");
    const double alpha = rr / pap;
    kernels::axpy(alpha, p.data(), x, n);
    kernels::axpy(-alpha, ap.data(), r.data(), n);
    const double rr_new = kernels::dot(r.data(), r.data(), n);
    kernels::xpay(r.data(), rr_new / rr, p.data(), n);
    rr = rr_new;
    res.iterations = it + 1;
    // The residual norm is allowed long plateaus (only the A-norm error is
    // monotone); break only after a window far wider than any plateau an SPD
    // system of this conditioning produces.
    const double rn = std::sqrt(rr);
    if (rn < best * (1.0 - 1e-12)) {
      best = rn;
      since_best = 0;
    } else if (++since_best > 1000) {
      break;  // genuinely stagnated; report the residual we actually reached
    }
  }
  apply(x, ap.data());
  double tr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = b[i] - ap[i];
    tr += d * d;
  }
  res.rel_residual = std::sqrt(tr) / (bnorm > 0.0 ? bnorm : 1.0);
  return res;
}

// CG restricted to the orthogonal complement of a unit-l2 vector q (deflated
// solve for operators singular exactly along q). Both b and the iterates are
// reprojected every iteration so roundoff cannot reintroduce the kernel
// direction.
inline CgResult cg_projected(const std::function<void(const double*, double*)>& apply,
                             const double* b, double* x, const double* q, std::size_t n,
                             double rel_tol, int max_iters) {
  auto project = [&](double* v) {
    const double c = kernels::dot(q, v, n);
    kernels::axpy(-c, q, v, n);
  };
  std::vector<double> bp(b, b + n);
  project(bp.data());
  project(x);
  auto apply_proj = [&](const double* in, double* out) {
    apply(in, out);
    project(out);
  };
  CgResult res = cg_solve(apply_proj, bp.data(), x, n, rel_tol, max_iters);
  project(x);
  return res;
}

}  // namespace gpmass
