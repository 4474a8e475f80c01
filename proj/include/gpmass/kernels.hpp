#pragma once

#include <complex>
#include <cstddef>

// Low-level array kernels. The production versions parallelize with OpenMP above
// a size cutoff; reductions accumulate fixed-size chunks that are combined in
// chunk order, so results are bit-identical for any thread count (including 1).
// gpmass::kernels::serial holds plain-loop reference implementations used by the
// unit tests and the bench_kernels comparison target.

namespace gpmass::kernels {

using cxd = std::complex<double>;

// Reduction chunk length and the size below which loops stay serial.
inline constexpr std::size_t reduce_chunk = 1024;
inline constexpr std::size_t parallel_cutoff = std::size_t{1} << 15;

// ---- reductions ----
double sum(const double* a, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
// sum a_i b_i c_i
double dot3(const double* a, const double* b, const double* c, std::size_t n);
double sum_sq(const double* a, std::size_t n);
// sum mu1 a^4 + 2 beta a^2 b^2 + mu2 b^4
double quartic_sum(const double* a, const double* b, double mu1, double mu2,
                   double beta, std::size_t n);
// sum a_i b_i with complex a, real b (no conjugation)
cxd dot_cr(const cxd* a, const double* b, std::size_t n);
double sum_abs2(const cxd* a, std::size_t n);
// sum w_i |a_i|^2
double dot_w_abs2(const double* w, const cxd* a, std::size_t n);
// Re sum conj(a_i) b_i
double dot_re(const cxd* a, const cxd* b, std::size_t n);

// ---- pointwise ----
void axpy(double alpha, const double* x, double* y, std::size_t n);       // y += alpha x
void axpy(cxd alpha, const cxd* x, cxd* y, std::size_t n);
void xpay(const double* x, double alpha, double* y, std::size_t n);       // y = x + alpha y
void xpay(const cxd* x, double alpha, cxd* y, std::size_t n);
void scale(double s, double* a, std::size_t n);
void abs_value(double* a, std::size_t n);
void abs_value(const cxd* a, double* out, std::size_t n);  // out = |a|
// out = a (mu a^2 + beta b^2)
void cubic_term(const double* a, const double* b, double mu, double beta,
                double* out, std::size_t n);

// ---- stencils (Dirichlet: ghost values are zero) ----
void laplacian_1d(const double* u, double* out, int n, double inv_h2);
void laplacian_1d(const cxd* u, cxd* out, int n, double inv_h2);
void laplacian_2d(const double* u, double* out, int n, double inv_h2);
void laplacian_2d(const cxd* u, cxd* out, int n, double inv_h2);

// p_i *= exp(i c (g (mu_i |p_i|^2 + beta |p_j|^2) - V_i)), both components at once;
// moduli are read before either component is rotated.
void phase_rotate(cxd* p1, cxd* p2, const double* v1, const double* v2,
                  double mu1, double mu2, double beta, double g, double c,
                  std::size_t n);

namespace serial {

double sum(const double* a, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* a, const double* b, const double* c, std::size_t n);
double sum_sq(const double* a, std::size_t n);
double quartic_sum(const double* a, const double* b, double mu1, double mu2,
                   double beta, std::size_t n);
cxd dot_cr(const cxd* a, const double* b, std::size_t n);
double sum_abs2(const cxd* a, std::size_t n);
double dot_w_abs2(const double* w, const cxd* a, std::size_t n);
double dot_re(const cxd* a, const cxd* b, std::size_t n);

void axpy(double alpha, const double* x, double* y, std::size_t n);
void axpy(cxd alpha, const cxd* x, cxd* y, std::size_t n);
void xpay(const double* x, double alpha, double* y, std::size_t n);
void xpay(const cxd* x, double alpha, cxd* y, std::size_t n);
void scale(double s, double* a, std::size_t n);
void abs_value(double* a, std::size_t n);
void abs_value(const cxd* a, double* out, std::size_t n);
void cubic_term(const double* a, const double* b, double mu, double beta,
                double* out, std::size_t n);

void laplacian_1d(const double* u, double* out, int n, double inv_h2);
void laplacian_1d(const cxd* u, cxd* out, int n, double inv_h2);
void laplacian_2d(const double* u, double* out, int n, double inv_h2);
void laplacian_2d(const cxd* u, cxd* out, int n, double inv_h2);

void phase_rotate(cxd* p1, cxd* p2, const double* v1, const double* v2,
                  double mu1, double mu2, double beta, double g, double c,
                  std::size_t n);

}  // namespace serial

}  // namespace gpmass::kernels
