#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nanomag/kernels.hpp"
#include "nanomag/spin_basis.hpp"

namespace nanomag {

/// J s_i . s_j in Kelvin; J > 0 is antiferromagnetic.
struct ExchangeCoupling {
  int i = 0;
  int j = 0;
  double J = 0.0;
  bool operator==(const ExchangeCoupling&) const = default;
};

/// Dz z.(s_i x s_j) in Kelvin. Only the z component is supported.
struct DMCoupling {
  int i = 0;
  int j = 0;
  double Dz = 0.0;
  bool operator==(const DMCoupling&) const = default;
};

struct SpinModel {
  ClusterPtr cluster;
  std::vector<ExchangeCoupling> exchange;
  std::vector<DMCoupling> dm;
  std::string source;

  /// Throws InvalidInput when a coupling references an invalid site or i == j.
  void validate() const;
  const SpinCluster& sites() const { return *cluster; }
};

enum class Component { x, y, z, plus, minus };

/// Change of S_z produced by a component; x and y have no single value.
int component_shift(Component c);

/// Sector-to-sector sparse matrix in compressed-row layout. Rows index the
/// output basis, columns the input basis.
class SparseOperator {
 public:
  SparseOperator(BasisPtr basis_in, BasisPtr basis_out, std::vector<std::size_t> row_ptr,
                 std::vector<std::uint32_t> cols, std::vector<double> re, std::vector<double> im,
                 bool hermitian);

  const BasisPtr& basis_in() const { return in_; }
  const BasisPtr& basis_out() const { return out_; }
  std::size_t rows() const { return row_ptr_.size() - 1; }
  std::size_t cols() const { return in_->dimension(); }
  std::size_t nnz() const { return cols_.size(); }
  bool hermitian() const { return hermitian_; }
  bool is_real() const { return im_.empty(); }

  CsrView view() const { return {row_ptr_, cols_, re_, im_}; }
  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::uint32_t> col_indices() const { return cols_; }
  std::complex<double> value(std::size_t p) const { return {re_[p], im_.empty() ? 0.0 : im_[p]}; }

  /// y = A x with the OpenMP kernel.
  void apply(std::span<const cplx> x, std::span<cplx> y) const;
  /// Real matvec; only valid when is_real().
  void apply(std::span<const double> x, std::span<double> y) const;
  /// Reference matvec with the serial kernel.
  void apply_serial(std::span<const cplx> x, std::span<cplx> y) const;

  Eigen::MatrixXcd to_dense() const;
  /// Largest absolute row sum, an upper bound on the spectral norm.
  double norm_bound() const;

 private:
  BasisPtr in_;
  BasisPtr out_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> cols_;
  std::vector<double> re_;
  std::vector<double> im_;
  bool hermitian_ = false;
};

/// sum J s_i.s_j + sum Dz z.(s_i x s_j) restricted to one S_z sector.
SparseOperator build_exchange_hamiltonian(const SpinModel& model, const BasisPtr& basis);

/// Exact matrix of one spin component between two sectors. x and y are
/// accepted only for sector pairs differing by +-1, where they reduce to
/// s_+/2 (resp. s_+/2i) and s_-/2 (resp. -s_-/2i).
SparseOperator single_spin_operator(const BasisPtr& basis_in, const BasisPtr& basis_out, std::size_t site,
                                    Component component);

/// S^2 = sum_i s_i(s_i+1) + 2 sum_{i<j} s_i.s_j within a sector.
SparseOperator total_spin_squared(const BasisPtr& basis);

/// <psi|S^2|psi> computed matrix-free as M(M+1) + |S_+ psi|^2.
double expectation_s_squared(const BasisPtr& basis, std::span<const cplx> psi);

/// S_+ psi as a vector in the M+1 sector (empty if that sector does not exist).
CVec apply_total_raising(const BasisPtr& basis, std::span<const cplx> psi, BasisPtr& raised_basis);

}  // namespace nanomag
