#include "gpmass/grid.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

#include "gpmass/kernels.hpp"

namespace gpmass {

Grid Grid::make(int dim, int n, double extent) {
  if (dim != 1 && dim != 2)
    throw ConfigError("grid: dim must be 1 or 2, got " + std::to_string(dim));
  if (n < 3) throw ConfigError("grid: need at least 3 interior points per axis");
  if (!(extent > 0.0)) throw ConfigError("grid: extent must be positive");
  Grid g;
  g.dim = dim;
  g.n = n;
  g.extent = extent;
  g.h = 2.0 * extent / (n + 1);
  return g;
}

ComplexField::ComplexField(const RealField& re) : grid(re.grid), v(re.size()) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = cxd(re.v[i], 0.0);
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw MismatchedGrid("fields live on different grids");
}

RealField laplacian_apply(const RealField& f) {
  RealField out(f.grid);
  const double inv_h2 = 1.0 / (f.grid.h * f.grid.h);
  if (f.grid.dim == 1)
    kernels::laplacian_1d(f.data(), out.data(), f.grid.n, inv_h2);
  else
    kernels::laplacian_2d(f.data(), out.data(), f.grid.n, inv_h2);
  return out;
}

ComplexField laplacian_apply(const ComplexField& f) {
  ComplexField out(f.grid);
  const double inv_h2 = 1.0 / (f.grid.h * f.grid.h);
  if (f.grid.dim == 1)
    kernels::laplacian_1d(f.data(), out.data(), f.grid.n, inv_h2);
  else
    kernels::laplacian_2d(f.data(), out.data(), f.grid.n, inv_h2);
  return out;
}

static double cell(const Grid& g) { return g.dim == 1 ? g.h : g.h * g.h; }

double integrate(const RealField& f) { return cell(f.grid) * kernels::sum(f.data(), f.size()); }

double l2_inner(const RealField& f, const RealField& g) {
  require_same_grid(f.grid, g.grid);
  return cell(f.grid) * kernels::dot(f.data(), g.data(), f.size());
}

double l2_norm_sq(const RealField& f) {
  return cell(f.grid) * kernels::sum_sq(f.data(), f.size());
}

double l2_norm(const RealField& f) { return std::sqrt(l2_norm_sq(f)); }

cxd l2_inner(const ComplexField& f, const RealField& g) {
  require_same_grid(f.grid, g.grid);
  return cell(f.grid) * kernels::dot_cr(f.data(), g.data(), f.size());
}

double l2_norm_sq(const ComplexField& f) {
  return cell(f.grid) * kernels::sum_abs2(f.data(), f.size());
}

RealField modulus_field(const ComplexField& f) {
  RealField out(f.grid);
  kernels::abs_value(f.data(), out.data(), f.size());
  return out;
}

double h_norm_sq_component(const RealField& u, const RealField& V) {
  require_same_grid(u.grid, V.grid);
  RealField lap = laplacian_apply(u);
  const double c = cell(u.grid);
  const double grad = -c * kernels::dot(lap.data(), u.data(), u.size());
  const double pot = c * kernels::dot3(V.data(), u.data(), u.data(), u.size());
  return grad + pot;
}

double h_norm_sq_component(const ComplexField& u, const RealField& V) {
  require_same_grid(u.grid, V.grid);
  ComplexField lap = laplacian_apply(u);
  const double c = cell(u.grid);
  const double grad = -c * kernels::dot_re(lap.data(), u.data(), u.size());
  const double pot = c * kernels::dot_w_abs2(V.data(), u.data(), u.size());
  return grad + pot;
}

double h_norm_sq(const RealPair& p, const RealField& V1, const RealField& V2) {
  return h_norm_sq_component(p.u1, V1) + h_norm_sq_component(p.u2, V2);
}

double h_norm_sq(const ComplexPair& p, const RealField& V1, const RealField& V2) {
  return h_norm_sq_component(p.p1, V1) + h_norm_sq_component(p.p2, V2);
}

cxd h_inner(const ComplexField& psi, const RealField& u, const RealField& V) {
  require_same_grid(psi.grid, u.grid);
  require_same_grid(psi.grid, V.grid);
  // <A psi, u> with A = -lap + V; integration by parts is exact for the stencil.
  ComplexField lap = laplacian_apply(psi);
  const std::size_t m = psi.size();
  std::vector<cxd> a(m);
  for (std::size_t i = 0; i < m; ++i) a[i] = -lap.v[i] + V.v[i] * psi.v[i];
  return cell(psi.grid) * kernels::dot_cr(a.data(), u.data(), m);
}

void axpy(double a, const RealField& x, RealField& y) {
  require_same_grid(x.grid, y.grid);
  kernels::axpy(a, x.data(), y.data(), x.size());
}

void scale_field(RealField& f, double s) { kernels::scale(s, f.data(), f.size()); }

RealField lincomb(double a, const RealField& x, double b, const RealField& y) {
  require_same_grid(x.grid, y.grid);
  RealField out(x.grid);
  for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = a * x.v[i] + b * y.v[i];
  return out;
}

double pair_l2_dist(const RealPair& a, const RealPair& b) {
  require_same_grid(a.u1.grid, b.u1.grid);
  require_same_grid(a.u2.grid, b.u2.grid);
  double s = 0.0;
  const double c1 = cell(a.u1.grid);
  for (std::size_t i = 0; i < a.u1.size(); ++i) {
    const double d = a.u1.v[i] - b.u1.v[i];
    s += c1 * d * d;
  }
  for (std::size_t i = 0; i < a.u2.size(); ++i) {
    const double d = a.u2.v[i] - b.u2.v[i];
    s += c1 * d * d;
  }
  return std::sqrt(s);
}

// ---- gpfield io ----

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_or_throw(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return f;
}

void write_header(std::FILE* f, const Grid& g, const char* kind) {
  std::fprintf(f, "gpfield v1 %d %d %.17g %s\n", g.dim, g.n, g.extent, kind);
}

Grid read_header(std::FILE* f, const std::filesystem::path& path, std::string& kind_out) {
  char magic[16] = {0};
  char version[8] = {0};
  char kind[16] = {0};
  int dim = 0, n = 0;
  double extent = 0.0;
  if (std::fscanf(f, "%15s %7s %d %d %lg %15s", magic, version, &dim, &n, &extent, kind) != 6 ||
      std::strcmp(magic, "gpfield") != 0 || std::strcmp(version, "v1") != 0)
    throw IoError("'" + path.string() + "' is not a gpfield v1 file");
  kind_out = kind;
  return Grid::make(dim, n, extent);
}

}  // namespace

void write_field(const std::filesystem::path& path, const RealField& f) {
  FilePtr fp = open_or_throw(path, "w");
  write_header(fp.get(), f.grid, "real");
  for (std::size_t i = 0; i < f.size(); ++i) std::fprintf(fp.get(), "%.17g\n", f.v[i]);
  if (std::ferror(fp.get())) throw IoError("write failed for '" + path.string() + "'");
}

void write_field(const std::filesystem::path& path, const ComplexField& f) {
  FilePtr fp = open_or_throw(path, "w");
  write_header(fp.get(), f.grid, "complex");
  for (std::size_t i = 0; i < f.size(); ++i)
    std::fprintf(fp.get(), "%.17g %.17g\n", f.v[i].real(), f.v[i].imag());
  if (std::ferror(fp.get())) throw IoError("write failed for '" + path.string() + "'");
}

RealField read_real_field(const std::filesystem::path& path) {
  FilePtr fp = open_or_throw(path, "r");
  std::string kind;
  Grid g = read_header(fp.get(), path, kind);
  if (kind != "real") throw IoError("'" + path.string() + "' holds a " + kind + " field, expected real");
  RealField f(g);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (std::fscanf(fp.get(), "%lg", &f.v[i]) != 1)
      throw IoError("'" + path.string() + "' truncated at node " + std::to_string(i));
  return f;
}

ComplexField read_complex_field(const std::filesystem::path& path) {
  FilePtr fp = open_or_throw(path, "r");
  std::string kind;
  Grid g = read_header(fp.get(), path, kind);
  if (kind != "complex")
    throw IoError("'" + path.string() + "' holds a " + kind + " field, expected complex");
  ComplexField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    double re = 0.0, im = 0.0;
    if (std::fscanf(fp.get(), "%lg %lg", &re, &im) != 2)
      throw IoError("'" + path.string() + "' truncated at node " + std::to_string(i));
    f.v[i] = cxd(re, im);
  }
  return f;
}

}  // namespace gpmass
