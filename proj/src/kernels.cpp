#include "nanomag/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nanomag::kernels {

namespace {

using idx_t = std::int64_t;

inline idx_t ssize(std::size_t n) { return static_cast<idx_t>(n); }

// Ladder map shared by both variants: returns the output index for input
// state c, or npos when the ladder annihilates it.
inline std::size_t ladder_target(const SectorBasis& in, const SectorBasis& out, std::size_t c,
                                 std::size_t site, int dir, std::uint8_t* scratch, double& coef) {
  const auto dev = in.deviations(c);
  const int two_s = in.cluster().two_s(site);
  const int k = dev[site];
  const int k_new = k - dir;  // raising m lowers the deviation
  if (k_new < 0 || k_new > two_s) return SectorBasis::npos;
  for (std::size_t i = 0; i < dev.size(); ++i) scratch[i] = dev[i];
  scratch[site] = static_cast<std::uint8_t>(k_new);
  coef = ladder_coefficient(two_s, two_s - 2 * k, dir);
  return out.rank_unchecked({scratch, dev.size()});
}

inline double weight(const SectorBasis& b, std::size_t c, int site) {
  return site < 0 ? 1.0 : b.m(c, static_cast<std::size_t>(site));
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// ---------------------------------------------------------------- serial

namespace serial {

void csr_matvec(const CsrView& a, std::span<const cplx> x, std::span<cplx> y) {
  const std::size_t rows = a.row_ptr.size() - 1;
  const bool has_im = !a.im.empty();
  for (std::size_t r = 0; r < rows; ++r) {
    cplx acc{0.0, 0.0};
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      const cplx v{a.re[p], has_im ? a.im[p] : 0.0};
      acc += v * x[a.cols[p]];
    }
    y[r] = acc;
  }
}

void csr_matvec(const CsrView& a, std::span<const double> x, std::span<double> y) {
  const std::size_t rows = a.row_ptr.size() - 1;
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) acc += a.re[p] * x[a.cols[p]];
    y[r] = acc;
  }
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void apply_ladder(const SectorBasis& in, const SectorBasis& out, std::size_t site, int dir,
                  std::span<const cplx> x, std::span<cplx> y) {
  std::fill(y.begin(), y.end(), cplx{});
  std::vector<std::uint8_t> scratch(in.n_sites());
  for (std::size_t c = 0; c < in.dimension(); ++c) {
    double coef = 0.0;
    const std::size_t t = ladder_target(in, out, c, site, dir, scratch.data(), coef);
    if (t != SectorBasis::npos) y[t] = coef * x[c];
  }
}

cplx weighted_dot(const SectorBasis& basis, std::span<const cplx> u, std::span<const cplx> v,
                  int site_u, int site_v) {
  cplx acc{0.0, 0.0};
  for (std::size_t c = 0; c < basis.dimension(); ++c) {
    acc += std::conj(u[c]) * v[c] * (weight(basis, c, site_u) * weight(basis, c, site_v));
  }
  return acc;
}

}  // namespace serial

// ---------------------------------------------------------------- OpenMP

namespace omp {

void csr_matvec(const CsrView& a, std::span<const cplx> x, std::span<cplx> y) {
  const idx_t rows = ssize(a.row_ptr.size() - 1);
  const bool has_im = !a.im.empty();
#pragma omp parallel for schedule(static)
  for (idx_t r = 0; r < rows; ++r) {
    double acc_re = 0.0;
    double acc_im = 0.0;
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      const cplx xv = x[a.cols[p]];
      const double vr = a.re[p];
      const double vi = has_im ? a.im[p] : 0.0;
      acc_re += vr * xv.real() - vi * xv.imag();
      acc_im += vr * xv.imag() + vi * xv.real();
    }
    y[r] = {acc_re, acc_im};
  }
}

void csr_matvec(const CsrView& a, std::span<const double> x, std::span<double> y) {
  const idx_t rows = ssize(a.row_ptr.size() - 1);
#pragma omp parallel for schedule(static)
  for (idx_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) acc += a.re[p] * x[a.cols[p]];
    y[r] = acc;
  }
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  double re = 0.0;
  double im = 0.0;
  const idx_t n = ssize(a.size());
#pragma omp parallel for reduction(+ : re, im) schedule(static)
  for (idx_t i = 0; i < n; ++i) {
    const cplx p = std::conj(a[i]) * b[i];
    re += p.real();
    im += p.imag();
  }
  return {re, im};
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  const idx_t n = ssize(a.size());
#pragma omp parallel for reduction(+ : acc) schedule(static)
  for (idx_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  const idx_t n = ssize(x.size());
#pragma omp parallel for schedule(static)
  for (idx_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const idx_t n = ssize(x.size());
#pragma omp parallel for schedule(static)
  for (idx_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void apply_ladder(const SectorBasis& in, const SectorBasis& out, std::size_t site, int dir,
                  std::span<const cplx> x, std::span<cplx> y) {
  std::fill(y.begin(), y.end(), cplx{});
  const idx_t dim = ssize(in.dimension());
#pragma omp parallel
  {
    std::vector<std::uint8_t> scratch(in.n_sites());
    // Single-site ladders are injective, so writes never collide.
#pragma omp for schedule(static)
    for (idx_t c = 0; c < dim; ++c) {
      double coef = 0.0;
      const std::size_t t = ladder_target(in, out, static_cast<std::size_t>(c), site, dir, scratch.data(), coef);
      if (t != SectorBasis::npos) y[t] = coef * x[c];
    }
  }
}

cplx weighted_dot(const SectorBasis& basis, std::span<const cplx> u, std::span<const cplx> v,
                  int site_u, int site_v) {
  double re = 0.0;
  double im = 0.0;
  const idx_t dim = ssize(basis.dimension());
#pragma omp parallel for reduction(+ : re, im) schedule(static)
  for (idx_t c = 0; c < dim; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    const cplx p = std::conj(u[cc]) * v[cc] * (weight(basis, cc, site_u) * weight(basis, cc, site_v));
    re += p.real();
    im += p.imag();
  }
  return {re, im};
}

}  // namespace omp

}  // namespace nanomag::kernels
