#pragma once

// Data-parallel inner loops. Every kernel exists twice: `serial::` is the
// straightforward reference used by tests, `omp::` is the OpenMP version the
// library calls. Both produce the same numbers up to summation order.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nanomag/spin_basis.hpp"

namespace nanomag {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

/// Compressed-row storage. `im` is empty for real matrices.
struct CsrView {
  std::span<const std::size_t> row_ptr;
  std::span<const std::uint32_t> cols;
  std::span<const double> re;
  std::span<const double> im;
};

namespace kernels {

namespace serial {

void csr_matvec(const CsrView& a, std::span<const cplx> x, std::span<cplx> y);
void csr_matvec(const CsrView& a, std::span<const double> x, std::span<double> y);

cplx dot(std::span<const cplx> a, std::span<const cplx> b);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// y = s_{site,dir} x, mapping sector `in` to sector `out` (dir = +1 or -1).
void apply_ladder(const SectorBasis& in, const SectorBasis& out, std::size_t site, int dir,
                  std::span<const cplx> x, std::span<cplx> y);

/// sum_c conj(u_c) v_c w_u(c) w_v(c) with w(c) = m_site(c), or 1 when site < 0.
cplx weighted_dot(const SectorBasis& basis, std::span<const cplx> u, std::span<const cplx> v,
                  int site_u, int site_v);

}  // namespace serial

namespace omp {

void csr_matvec(const CsrView& a, std::span<const cplx> x, std::span<cplx> y);
void csr_matvec(const CsrView& a, std::span<const double> x, std::span<double> y);

cplx dot(std::span<const cplx> a, std::span<const cplx> b);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

void apply_ladder(const SectorBasis& in, const SectorBasis& out, std::size_t site, int dir,
                  std::span<const cplx> x, std::span<cplx> y);

cplx weighted_dot(const SectorBasis& basis, std::span<const cplx> u, std::span<const cplx> v,
                  int site_u, int site_v);

}  // namespace omp

template <class T>
double norm2(std::span<const T> a) {
  return std::sqrt(std::real(omp::dot(a, a)));
}

/// Number of OpenMP threads the omp:: kernels will use (1 without OpenMP).
int max_threads();

}  // namespace kernels
}  // namespace nanomag
