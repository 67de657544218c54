#include "nanomag/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nanomag/errors.hpp"

namespace nanomag {

void SpinModel::validate() const {
  if (!cluster) throw InvalidInput("model has no cluster");
  const int n = static_cast<int>(cluster->size());
  auto check = [&](int i, int j, const char* what) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw InvalidInput(std::string(what) + " coupling (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") references a site outside 0.." + std::to_string(n - 1));
    }
    if (i == j) throw InvalidInput(std::string(what) + " coupling on a single site " + std::to_string(i));
  };
  for (const auto& c : exchange) check(c.i, c.j, "exchange");
  for (const auto& c : dm) check(c.i, c.j, "DM");
}

int component_shift(Component c) {
  switch (c) {
    case Component::z: return 0;
    case Component::plus: return 1;
    case Component::minus: return -1;
    default: throw InvalidInput("x and y components do not have a definite S_z shift");
  }
}

SparseOperator::SparseOperator(BasisPtr basis_in, BasisPtr basis_out, std::vector<std::size_t> row_ptr,
                               std::vector<std::uint32_t> cols, std::vector<double> re, std::vector<double> im,
                               bool hermitian)
    : in_(std::move(basis_in)),
      out_(std::move(basis_out)),
      row_ptr_(std::move(row_ptr)),
      cols_(std::move(cols)),
      re_(std::move(re)),
      im_(std::move(im)),
      hermitian_(hermitian) {
  if (row_ptr_.size() != out_->dimension() + 1 || row_ptr_.back() != cols_.size() || re_.size() != cols_.size() ||
      (!im_.empty() && im_.size() != cols_.size())) {
    throw Error("internal: inconsistent sparse layout");
  }
}

void SparseOperator::apply(std::span<const cplx> x, std::span<cplx> y) const {
  kernels::omp::csr_matvec(view(), x, y);
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (!is_real()) throw Error("real matvec on a complex operator");
  kernels::omp::csr_matvec(view(), x, y);
}

void SparseOperator::apply_serial(std::span<const cplx> x, std::span<cplx> y) const {
  kernels::serial::csr_matvec(view(), x, y);
}

Eigen::MatrixXcd SparseOperator::to_dense() const {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
      d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cols_[p])) += value(p);
  return d;
}

double SparseOperator::norm_bound() const {
  double best = 0.0;
  for (std::size_t r = 0; r < rows(); ++r) {
    double s = 0.0;
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += std::abs(value(p));
    best = std::max(best, s);
  }
  return best;
}

namespace {

struct Entry {
  std::uint32_t col;
  cplx val;
};

struct PairTerm {
  std::size_t i;
  std::size_t j;
  double J;
  double Dz;
};

// Row r of sum_{pairs} [J s_i.s_j + Dz z.(s_i x s_j)] + diag_shift.
//
// H[r][c] = conj(<c|H|r>); the ket side is the one we can enumerate, by
// applying s_i+ s_j- and s_i- s_j+ to configuration r.
void row_entries(const SectorBasis& basis, const std::vector<PairTerm>& terms, double diag_shift, std::size_t r,
                 std::vector<std::uint8_t>& scratch, std::vector<Entry>& out) {
  out.clear();
  const auto dev = basis.deviations(r);
  const auto& cl = basis.cluster();
  double diag = diag_shift;
  for (const auto& t : terms) {
    const int ts_i = cl.two_s(t.i);
    const int ts_j = cl.two_s(t.j);
    const int ki = dev[t.i];
    const int kj = dev[t.j];
    const int tm_i = ts_i - 2 * ki;
    const int tm_j = ts_j - 2 * kj;
    diag += t.J * 0.25 * tm_i * tm_j;
    // s_i+ s_j- |r>: raises i (k_i - 1), lowers j (k_j + 1).
    // <c|H|r> = (J/2 + i Dz/2) a, so H[r][c] = (J/2 - i Dz/2) a.
    if (ki > 0 && kj < ts_j) {
      const double a = ladder_coefficient(ts_i, tm_i, +1) * ladder_coefficient(ts_j, tm_j, -1);
      std::copy(dev.begin(), dev.end(), scratch.begin());
      scratch[t.i] = static_cast<std::uint8_t>(ki - 1);
      scratch[t.j] = static_cast<std::uint8_t>(kj + 1);
      const auto c = static_cast<std::uint32_t>(basis.rank_unchecked(scratch));
      out.push_back({c, cplx{0.5 * t.J * a, -0.5 * t.Dz * a}});
    }
    if (ki < ts_i && kj > 0) {
      const double a = ladder_coefficient(ts_i, tm_i, -1) * ladder_coefficient(ts_j, tm_j, +1);
      std::copy(dev.begin(), dev.end(), scratch.begin());
      scratch[t.i] = static_cast<std::uint8_t>(ki + 1);
      scratch[t.j] = static_cast<std::uint8_t>(kj - 1);
      const auto c = static_cast<std::uint32_t>(basis.rank_unchecked(scratch));
      out.push_back({c, cplx{0.5 * t.J * a, 0.5 * t.Dz * a}});
    }
  }
  out.push_back({static_cast<std::uint32_t>(r), cplx{diag, 0.0}});
  std::stable_sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
  std::size_t w = 0;
  for (std::size_t q = 0; q < out.size(); ++q) {
    if (w > 0 && out[w - 1].col == out[q].col) {
      out[w - 1].val += out[q].val;
    } else {
      out[w++] = out[q];
    }
  }
  out.resize(w);
}

SparseOperator build_pair_operator(const BasisPtr& basis, const std::vector<PairTerm>& terms, double diag_shift) {
  const std::size_t dim = basis->dimension();
  if (dim > std::numeric_limits<std::uint32_t>::max()) throw BudgetExceeded("sector too large for 32-bit columns");
  const bool complex_values = std::any_of(terms.begin(), terms.end(), [](const PairTerm& t) { return t.Dz != 0.0; });
  const std::size_t n = basis->n_sites();
  const auto sdim = static_cast<std::int64_t>(dim);

  std::vector<std::size_t> row_ptr(dim + 1, 0);
#pragma omp parallel
  {
    std::vector<std::uint8_t> scratch(n);
    std::vector<Entry> buf;
#pragma omp for schedule(dynamic, 1024)
    for (std::int64_t r = 0; r < sdim; ++r) {
      row_entries(*basis, terms, diag_shift, static_cast<std::size_t>(r), scratch, buf);
      row_ptr[static_cast<std::size_t>(r) + 1] = buf.size();
    }
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());

  const std::size_t nnz = row_ptr.back();
  std::vector<std::uint32_t> cols(nnz);
  std::vector<double> re(nnz);
  std::vector<double> im(complex_values ? nnz : 0);
#pragma omp parallel
  {
    std::vector<std::uint8_t> scratch(n);
    std::vector<Entry> buf;
#pragma omp for schedule(dynamic, 1024)
    for (std::int64_t r = 0; r < sdim; ++r) {
      row_entries(*basis, terms, diag_shift, static_cast<std::size_t>(r), scratch, buf);
      std::size_t p = row_ptr[static_cast<std::size_t>(r)];
      for (const auto& e : buf) {
        cols[p] = e.col;
        re[p] = e.val.real();
        if (complex_values) im[p] = e.val.imag();
        ++p;
      }
    }
  }
  return SparseOperator(basis, basis, std::move(row_ptr), std::move(cols), std::move(re), std::move(im), true);
}

}  // namespace

SparseOperator build_exchange_hamiltonian(const SpinModel& model, const BasisPtr& basis) {
  model.validate();
  if (!basis || !(basis->cluster() == *model.cluster)) {
    throw SectorMismatch("basis does not belong to the model's cluster");
  }
  std::vector<PairTerm> terms;
  terms.reserve(model.exchange.size() + model.dm.size());
  for (const auto& c : model.exchange) {
    terms.push_back({static_cast<std::size_t>(c.i), static_cast<std::size_t>(c.j), c.J, 0.0});
  }
  for (const auto& c : model.dm) {
    terms.push_back({static_cast<std::size_t>(c.i), static_cast<std::size_t>(c.j), 0.0, c.Dz});
  }
  return build_pair_operator(basis, terms, 0.0);
}

SparseOperator total_spin_squared(const BasisPtr& basis) {
  const auto& cl = basis->cluster();
  std::vector<PairTerm> terms;
  double casimir = 0.0;
  for (std::size_t i = 0; i < cl.size(); ++i) {
    casimir += spin_casimir(cl.site(i).s);
    for (std::size_t j = i + 1; j < cl.size(); ++j) terms.push_back({i, j, 2.0, 0.0});
  }
  return build_pair_operator(basis, terms, casimir);
}

SparseOperator single_spin_operator(const BasisPtr& basis_in, const BasisPtr& basis_out, std::size_t site,
                                    Component component) {
  if (!basis_in || !basis_out || !(basis_in->cluster() == basis_out->cluster())) {
    throw SectorMismatch("single-spin operator between different clusters");
  }
  if (site >= basis_in->n_sites()) throw InvalidInput("site index out of range");
  const int shift2 = basis_out->magnetization().twice - basis_in->magnetization().twice;

  int dir = 0;
  cplx scale{1.0, 0.0};
  switch (component) {
    case Component::z:
      if (shift2 != 0) throw SectorMismatch("s_z requires equal sectors");
      break;
    case Component::plus:
    case Component::minus:
      dir = component == Component::plus ? 1 : -1;
      if (shift2 != 2 * dir) throw SectorMismatch("ladder operator requires sectors differing by one");
      break;
    case Component::x:
    case Component::y:
      if (shift2 != 2 && shift2 != -2) throw SectorMismatch("s_x, s_y are only built between adjacent sectors");
      dir = shift2 / 2;
      // s_x = (s_+ + s_-)/2, s_y = (s_+ - s_-)/(2i)
      if (component == Component::x) {
        scale = {0.5, 0.0};
      } else {
        scale = dir > 0 ? cplx{0.0, -0.5} : cplx{0.0, 0.5};
      }
      break;
  }

  const auto& in = *basis_in;
  const auto& out = *basis_out;
  const std::size_t n = in.n_sites();
  const int two_s = in.cluster().two_s(site);

  // Each column maps to at most one row, and the map is injective.
  std::vector<std::uint32_t> src(out.dimension(), std::numeric_limits<std::uint32_t>::max());
  std::vector<double> coef(out.dimension(), 0.0);
  std::vector<std::uint8_t> scratch(n);
  for (std::size_t c = 0; c < in.dimension(); ++c) {
    const auto dev = in.deviations(c);
    const int k = dev[site];
    if (dir == 0) {
      src[c] = static_cast<std::uint32_t>(c);
      coef[c] = 0.5 * (two_s - 2 * k);
      continue;
    }
    const int k_new = k - dir;
    if (k_new < 0 || k_new > two_s) continue;
    std::copy(dev.begin(), dev.end(), scratch.begin());
    scratch[site] = static_cast<std::uint8_t>(k_new);
    const std::size_t t = out.rank_unchecked(scratch);
    src[t] = static_cast<std::uint32_t>(c);
    coef[t] = ladder_coefficient(two_s, two_s - 2 * k, dir);
  }

  std::vector<std::size_t> row_ptr(out.dimension() + 1, 0);
  std::vector<std::uint32_t> cols;
  std::vector<double> re;
  std::vector<double> im;
  const bool complex_values = scale.imag() != 0.0;
  for (std::size_t r = 0; r < out.dimension(); ++r) {
    if (src[r] != std::numeric_limits<std::uint32_t>::max() && coef[r] != 0.0) {
      cols.push_back(src[r]);
      const cplx v = scale * coef[r];
      re.push_back(v.real());
      if (complex_values) im.push_back(v.imag());
    }
    row_ptr[r + 1] = cols.size();
  }
  return SparseOperator(basis_in, basis_out, std::move(row_ptr), std::move(cols), std::move(re), std::move(im),
                        dir == 0);
}

CVec apply_total_raising(const BasisPtr& basis, std::span<const cplx> psi, BasisPtr& raised_basis) {
  const auto& cl = basis->cluster();
  const HalfInt up = basis->magnetization() + HalfInt{2};
  if (up.twice > cl.total_spin_max().twice) {
    raised_basis.reset();
    return {};
  }
  if (!raised_basis || raised_basis->magnetization() != up || !(raised_basis->cluster() == cl)) {
    raised_basis = SectorBasis::enumerate(basis->cluster_ptr(), up);
  }
  CVec acc(raised_basis->dimension(), cplx{});
  CVec tmp(raised_basis->dimension());
  for (std::size_t i = 0; i < cl.size(); ++i) {
    kernels::omp::apply_ladder(*basis, *raised_basis, i, +1, psi, tmp);
    kernels::omp::axpy(cplx{1.0, 0.0}, std::span<const cplx>(tmp), std::span<cplx>(acc));
  }
  return acc;
}

double expectation_s_squared(const BasisPtr& basis, std::span<const cplx> psi) {
  const double M = basis->magnetization().value();
  const double nrm = std::real(kernels::omp::dot(psi, psi));
  BasisPtr raised;
  const CVec up = apply_total_raising(basis, psi, raised);
  const double plus = up.empty() ? 0.0 : std::real(kernels::omp::dot(std::span<const cplx>(up), std::span<const cplx>(up)));
  return (M * (M + 1.0) * nrm + plus) / nrm;
}

}  // namespace nanomag
