#include "gpmass/kernels.hpp"

#include <cmath>
#include <vector>

namespace gpmass::kernels {

namespace {

// Sum fixed-size chunks in index order. Each chunk partial is a pure function of
// its slice, so the result does not depend on how chunks are assigned to threads.
template <class ChunkSum>
double reduce_chunked(std::size_t n, ChunkSum&& chunk_sum) {
  if (n == 0) return 0.0;
  const std::size_t nc = (n + reduce_chunk - 1) / reduce_chunk;
  if (n < parallel_cutoff) {
    double s = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      const std::size_t i0 = c * reduce_chunk;
      s += chunk_sum(i0, std::min(i0 + reduce_chunk, n));
    }
    return s;
  }
  std::vector<double> part(nc);
#pragma omp parallel for schedule(static)
  for (long long c = 0; c < static_cast<long long>(nc); ++c) {
    const std::size_t i0 = static_cast<std::size_t>(c) * reduce_chunk;
    part[static_cast<std::size_t>(c)] = chunk_sum(i0, std::min(i0 + reduce_chunk, n));
  }
  double s = 0.0;
  for (double p : part) s += p;
  return s;
}

}  // namespace

double sum(const double* a, std::size_t n) {
  return reduce_chunked(n, [a](std::size_t i0, std::size_t i1) {
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i) s += a[i];
    return s;
  });
}

double dot(const double* a, const double* b, std::size_t n) {
  return reduce_chunked(n, [a, b](std::size_t i0, std::size_t i1) {
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i) s += a[i] * b[i];
    return s;
  });
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  return reduce_chunked(n, [a, b, c](std::size_t i0, std::size_t i1) {
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i) s += a[i] * b[i] * c[i];
    return s;
  });
}

double sum_sq(const double* a, std::size_t n) { return dot(a, a, n); }

double quartic_sum(const double* a, const double* b, double mu1, double mu2,
                   double beta, std::size_t n) {
  return reduce_chunked(n, [=](std::size_t i0, std::size_t i1) {
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i) {
      const double a2 = a[i] * a[i];
      const double b2 = b[i] * b[i];
      s += mu1 * a2 * a2 + 2.0 * beta * a2 * b2 + mu2 * b2 * b2;
    }
    return s;
  });
}

cxd dot_cr(const cxd* a, const double* b, std::size_t n) {
  const double re = reduce_chunked(n, [a, b](std::size_t i0, std::size_t i1) {
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i) s += a[i].real() * b[i];
    return s;
  });
  const double im = reduce_chunked(n, [a, b](std::size_t i0, std::size_t i1) {
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i) s += a[i].imag() * b[i];
    return s;
  });
  return {re, im};
}

double sum_abs2(const cxd* a, std::size_t n) {
  return reduce_chunked(n, [a](std::size_t i0, std::size_t i1) {
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i) s += std::norm(a[i]);
    return s;
  });
}

double dot_w_abs2(const double* w, const cxd* a, std::size_t n) {
  return reduce_chunked(n, [w, a](std::size_t i0, std::size_t i1) {
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i) s += w[i] * std::norm(a[i]);
    return s;
  });
}

double dot_re(const cxd* a, const cxd* b, std::size_t n) {
  return reduce_chunked(n, [a, b](std::size_t i0, std::size_t i1) {
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i)
      s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return s;
  });
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
#pragma omp parallel for schedule(static) if (n >= parallel_cutoff)
  for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] += alpha * x[i];
}

void axpy(cxd alpha, const cxd* x, cxd* y, std::size_t n) {
#pragma omp parallel for schedule(static) if (n >= parallel_cutoff)
  for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] += alpha * x[i];
}

void xpay(const double* x, double alpha, double* y, std::size_t n) {
#pragma omp parallel for schedule(static) if (n >= parallel_cutoff)
  for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] = x[i] + alpha * y[i];
}

void xpay(const cxd* x, double alpha, cxd* y, std::size_t n) {
#pragma omp parallel for schedule(static) if (n >= parallel_cutoff)
  for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] = x[i] + alpha * y[i];
}

void scale(double s, double* a, std::size_t n) {
#pragma omp parallel for schedule(static) if (n >= parallel_cutoff)
  for (long long i = 0; i < static_cast<long long>(n); ++i) a[i] *= s;
}

void abs_value(double* a, std::size_t n) {
#pragma omp parallel for schedule(static) if (n >= parallel_cutoff)
  for (long long i = 0; i < static_cast<long long>(n); ++i) a[i] = std::fabs(a[i]);
}

void abs_value(const cxd* a, double* out, std::size_t n) {
#pragma omp parallel for schedule(static) if (n >= parallel_cutoff)
  for (long long i = 0; i < static_cast<long long>(n); ++i) out[i] = std::abs(a[i]);
}

void cubic_term(const double* a, const double* b, double mu, double beta,
                double* out, std::size_t n) {
#pragma omp parallel for schedule(static) if (n >= parallel_cutoff)
  for (long long i = 0; i < static_cast<long long>(n); ++i)
    out[i] = a[i] * (mu * a[i] * a[i] + beta * b[i] * b[i]);
}

namespace {

template <class T>
void lap1(const T* u, T* out, int n, double inv_h2) {
  if (n == 1) {
    out[0] = -2.0 * u[0] * inv_h2;
    return;
  }
  out[0] = (u[1] - 2.0 * u[0]) * inv_h2;
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n) >= parallel_cutoff)
  for (long long i = 1; i < n - 1; ++i)
    out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_h2;
  out[n - 1] = (u[n - 2] - 2.0 * u[n - 1]) * inv_h2;
}

template <class T>
void lap2_row(const T* um, const T* u0, const T* up, T* out, int n, double inv_h2) {
  // um/up are the neighbor rows (nullptr at the Dirichlet boundary).
  auto vert = [&](int j) { return (um ? um[j] : T{}) + (up ? up[j] : T{}); };
  if (n == 1) {
    out[0] = (vert(0) - 4.0 * u0[0]) * inv_h2;
    return;
  }
  out[0] = (vert(0) + u0[1] - 4.0 * u0[0]) * inv_h2;
  for (int j = 1; j < n - 1; ++j)
    out[j] = (vert(j) + u0[j - 1] + u0[j + 1] - 4.0 * u0[j]) * inv_h2;
  out[n - 1] = (vert(n - 1) + u0[n - 2] - 4.0 * u0[n - 1]) * inv_h2;
}

template <class T>
void lap2(const T* u, T* out, int n, double inv_h2) {
  const std::size_t total = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
#pragma omp parallel for schedule(static) if (total >= parallel_cutoff)
  for (long long i = 0; i < n; ++i) {
    const T* um = (i > 0) ? u + (i - 1) * n : nullptr;
    const T* up = (i < n - 1) ? u + (i + 1) * n : nullptr;
    lap2_row(um, u + i * n, up, out + i * n, n, inv_h2);
  }
}

}  // namespace

void laplacian_1d(const double* u, double* out, int n, double inv_h2) { lap1(u, out, n, inv_h2); }
void laplacian_1d(const cxd* u, cxd* out, int n, double inv_h2) { lap1(u, out, n, inv_h2); }
void laplacian_2d(const double* u, double* out, int n, double inv_h2) { lap2(u, out, n, inv_h2); }
void laplacian_2d(const cxd* u, cxd* out, int n, double inv_h2) { lap2(u, out, n, inv_h2); }

void phase_rotate(cxd* p1, cxd* p2, const double* v1, const double* v2,
                  double mu1, double mu2, double beta, double g, double c,
                  std::size_t n) {
#pragma omp parallel for schedule(static) if (n >= parallel_cutoff)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    const double a1 = std::norm(p1[i]);
    const double a2 = std::norm(p2[i]);
    p1[i] *= std::polar(1.0, c * (g * (mu1 * a1 + beta * a2) - v1[i]));
    p2[i] *= std::polar(1.0, c * (g * (mu2 * a2 + beta * a1) - v2[i]));
  }
}

namespace serial {

double sum(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i] * c[i];
  return s;
}

double sum_sq(const double* a, std::size_t n) { return dot(a, a, n); }

double quartic_sum(const double* a, const double* b, double mu1, double mu2,
                   double beta, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a2 = a[i] * a[i];
    const double b2 = b[i] * b[i];
    s += mu1 * a2 * a2 + 2.0 * beta * a2 * b2 + mu2 * b2 * b2;
  }
  return s;
}

cxd dot_cr(const cxd* a, const double* b, std::size_t n) {
  cxd s{};
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_abs2(const cxd* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::norm(a[i]);
  return s;
}

double dot_w_abs2(const double* w, const cxd* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * std::norm(a[i]);
  return s;
}

double dot_re(const cxd* a, const cxd* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void axpy(cxd alpha, const cxd* x, cxd* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpay(const double* x, double alpha, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + alpha * y[i];
}

void xpay(const cxd* x, double alpha, cxd* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + alpha * y[i];
}

void scale(double s, double* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] *= s;
}

void abs_value(double* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] = std::fabs(a[i]);
}

void abs_value(const cxd* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::abs(a[i]);
}

void cubic_term(const double* a, const double* b, double mu, double beta,
                double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = a[i] * (mu * a[i] * a[i] + beta * b[i] * b[i]);
}

void laplacian_1d(const double* u, double* out, int n, double inv_h2) {
  for (int i = 0; i < n; ++i) {
    const double left = (i > 0) ? u[i - 1] : 0.0;
    const double right = (i < n - 1) ? u[i + 1] : 0.0;
    out[i] = (left - 2.0 * u[i] + right) * inv_h2;
  }
}

void laplacian_1d(const cxd* u, cxd* out, int n, double inv_h2) {
  for (int i = 0; i < n; ++i) {
    const cxd left = (i > 0) ? u[i - 1] : cxd{};
    const cxd right = (i < n - 1) ? u[i + 1] : cxd{};
    out[i] = (left - 2.0 * u[i] + right) * inv_h2;
  }
}

// Same association order as the parallel stencil (vertical pair first, then
// horizontal neighbors, then the diagonal term) so results match bitwise.
template <class T>
static void lap2_serial(const T* u, T* out, int n, double inv_h2) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const T* u0 = u + static_cast<std::size_t>(i) * n;
      T s = (i > 0 ? u0[-n + j] : T{}) + (i < n - 1 ? u0[n + j] : T{});
      if (j > 0) s += u0[j - 1];
      if (j < n - 1) s += u0[j + 1];
      out[static_cast<std::size_t>(i) * n + j] = (s - 4.0 * u0[j]) * inv_h2;
    }
}

void laplacian_2d(const double* u, double* out, int n, double inv_h2) {
  lap2_serial(u, out, n, inv_h2);
}

void laplacian_2d(const cxd* u, cxd* out, int n, double inv_h2) {
  lap2_serial(u, out, n, inv_h2);
}

void phase_rotate(cxd* p1, cxd* p2, const double* v1, const double* v2,
                  double mu1, double mu2, double beta, double g, double c,
                  std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a1 = std::norm(p1[i]);
    const double a2 = std::norm(p2[i]);
    p1[i] *= std::polar(1.0, c * (g * (mu1 * a1 + beta * a2) - v1[i]));
    p2[i] *= std::polar(1.0, c * (g * (mu2 * a2 + beta * a1) - v2[i]));
  }
}

}  // namespace serial

}  // namespace gpmass::kernels
