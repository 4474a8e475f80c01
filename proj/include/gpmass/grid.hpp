#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "gpmass/errors.hpp"

namespace gpmass {

using cxd = std::complex<double>;

// Uniform grid on [-L,L]^dim with Dirichlet boundary; only interior nodes are
// stored, h = 2L/(n+1). 2D fields are row-major with the x index outermost.
struct Grid {
  int dim = 1;
  int n = 0;        // interior points per axis
  double extent = 0.0;  // half-width L
  double h = 0.0;

  static Grid make(int dim, int n, double extent);

  std::size_t size() const {
    return dim == 1 ? static_cast<std::size_t>(n)
                    : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  }
  // axis coordinate of interior index k in [0, n)
  double coord(int k) const { return -extent + h * (k + 1); }

  friend bool operator==(const Grid&, const Grid&) = default;
};

struct RealField {
  Grid grid;
  std::vector<double> v;

  RealField() = default;
  explicit RealField(const Grid& g) : grid(g), v(g.size(), 0.0) {}

  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
  std::size_t size() const { return v.size(); }
};

struct ComplexField {
  Grid grid;
  std::vector<cxd> v;

  ComplexField() = default;
  explicit ComplexField(const Grid& g) : grid(g), v(g.size(), cxd{}) {}
  explicit ComplexField(const RealField& re);

  cxd* data() { return v.data(); }
  const cxd* data() const { return v.data(); }
  std::size_t size() const { return v.size(); }
};

struct RealPair {
  RealField u1, u2;
};

struct ComplexPair {
  ComplexField p1, p2;
};

void require_same_grid(const Grid& a, const Grid& b);

// ---- calculus ----
RealField laplacian_apply(const RealField& f);
ComplexField laplacian_apply(const ComplexField& f);

double integrate(const RealField& f);               // sum f h^dim
double l2_inner(const RealField& f, const RealField& g);
double l2_norm_sq(const RealField& f);
double l2_norm(const RealField& f);
cxd l2_inner(const ComplexField& f, const RealField& g);   // int f g, no conjugation
double l2_norm_sq(const ComplexField& f);

RealField modulus_field(const ComplexField& f);

// int |grad u|^2 + V u^2, gradient term as <-lap u, u> so the quadratic form and
// the stencil are exactly consistent.
double h_norm_sq_component(const RealField& u, const RealField& V);
double h_norm_sq_component(const ComplexField& u, const RealField& V);
double h_norm_sq(const RealPair& p, const RealField& V1, const RealField& V2);
double h_norm_sq(const ComplexPair& p, const RealField& V1, const RealField& V2);
// complex H-inner product int (grad psi . grad u + V psi u) with u real
cxd h_inner(const ComplexField& psi, const RealField& u, const RealField& V);

// ---- small field arithmetic ----
void axpy(double a, const RealField& x, RealField& y);  // y += a x
void scale_field(RealField& f, double s);
RealField lincomb(double a, const RealField& x, double b, const RealField& y);
double pair_l2_dist(const RealPair& a, const RealPair& b);

// ---- gpfield dump format ----
// header: `gpfield v1 <dim> <n> <L> real|complex`, then one node per line
// (row-major), `%.17g` so round-trips are bit-exact.
void write_field(const std::filesystem::path& path, const RealField& f);
void write_field(const std::filesystem::path& path, const ComplexField& f);
RealField read_real_field(const std::filesystem::path& path);
ComplexField read_complex_field(const std::filesystem::path& path);

}  // namespace gpmass
