#include "nanomag/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <type_traits>

#include <Eigen/Eigenvalues>

#include "nanomag/errors.hpp"

namespace nanomag {

namespace {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
T conj_of(T x) {
  if constexpr (std::is_same_v<T, double>) {
    return x;
  } else {
    return std::conj(x);
  }
}

template <class T>
void fill_random(Eigen::Ref<Vec<T>> v, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if constexpr (std::is_same_v<T, double>) {
      v[i] = g(rng);
    } else {
      const double re = g(rng);
      v[i] = T{re, g(rng)};
    }
  }
}

template <class T>
void matvec(const SparseOperator& H, const T* x, T* y) {
  const std::size_t n = H.rows();
  H.apply(std::span<const T>(x, n), std::span<T>(y, n));
}

template <class T>
CVec to_cvec(const Eigen::Ref<const Vec<T>>& v) {
  CVec out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = cplx(v[i]);
  return out;
}

EigenResult dense_eigenpairs(const SparseOperator& H, std::size_t k) {
  EigenResult res;
  res.dense = true;
  const Eigen::MatrixXcd D = H.to_dense();
  const auto n = D.rows();
  auto finish = [&](const auto& vals, const auto& vecs) {
    for (std::size_t i = 0; i < k; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      res.values.push_back(vals[ii]);
      CVec v(static_cast<std::size_t>(n));
      for (Eigen::Index r = 0; r < n; ++r) v[static_cast<std::size_t>(r)] = cplx(vecs(r, ii));
      const Eigen::VectorXcd ev = Eigen::Map<const Eigen::VectorXcd>(v.data(), n);
      res.residuals.push_back((D * ev - vals[ii] * ev).norm());
      res.vectors.push_back(std::move(v));
    }
  };
  if (H.is_real()) {
    const Eigen::MatrixXd R = D.real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
    if (es.info() != Eigen::Success) throw NoConvergence("dense eigensolver failed", 0, NAN);
    finish(es.eigenvalues(), es.eigenvectors());
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D);
    if (es.info() != Eigen::Success) throw NoConvergence("dense eigensolver failed", 0, NAN);
    finish(es.eigenvalues(), es.eigenvectors());
  }
  return res;
}

// Thick-restart Lanczos with two-pass classical Gram-Schmidt against the whole
// basis. All projections are kept in T, so after a restart the arrow block is
// carried along without special casing.
// Columns of `lock` (orthonormal, possibly empty) are shifted above the
// spectrum: the run works with H + 3|H| lock lock^H. Projecting them out
// instead leaves an exact zero eigenvalue that roundoff eventually finds.
template <class T>
EigenResult lanczos(const SparseOperator& H, std::size_t k, const SolverOptions& o, std::size_t m,
                    const Mat<T>& lock) {
  const auto n = static_cast<Eigen::Index>(H.rows());
  const auto mm = static_cast<Eigen::Index>(m);
  const double scale = std::max(H.norm_bound(), 1e-300);
  const double target = o.tol * scale;
  const double shift = 3.0 * scale;

  Mat<T> V(n, mm + 1);
  Mat<T> Tm = Mat<T>::Zero(mm, mm);
  Vec<T> w(n);
  Vec<T> h;

  std::mt19937_64 rng(o.seed);
  {
    Vec<T> v0(n);
    fill_random<T>(v0, rng);
    for (int pass = 0; pass < 2 && lock.cols() > 0; ++pass) v0 -= lock * (lock.adjoint() * v0).eval();
    V.col(0) = v0 / v0.norm();
  }

  EigenResult res;
  Eigen::Index start = 0;
  double best_resid = INFINITY;
  const Eigen::Index keep = std::min<Eigen::Index>(mm - 2, std::max<Eigen::Index>(static_cast<Eigen::Index>(k) + 8, mm / 2));

  while (true) {
    double beta = 0.0;
    for (Eigen::Index j = start; j < mm; ++j) {
      matvec<T>(H, V.col(j).data(), w.data());
      ++res.matvecs;
      if (lock.cols() > 0) w.noalias() += lock * (shift * (lock.adjoint() * V.col(j)).eval());
      const auto basis = V.leftCols(j + 1);
      h = basis.adjoint() * w;
      w.noalias() -= basis * h;
      Vec<T> h2 = basis.adjoint() * w;
      w.noalias() -= basis * h2;
      h += h2;
      for (Eigen::Index i = 0; i <= j; ++i) {
        Tm(i, j) = h[i];
        Tm(j, i) = conj_of(h[i]);
      }
      Tm(j, j) = std::real(h[j]);
      beta = w.norm();
      if (beta <= 1e-14 * scale) {
        // Invariant subspace: continue with a fresh direction.
        Vec<T> r(n);
        fill_random<T>(r, rng);
        for (int pass = 0; pass < 2; ++pass) r -= basis * (basis.adjoint() * r).eval();
        V.col(j + 1) = r / r.norm();
        beta = 0.0;
      } else {
        V.col(j + 1) = w / beta;
      }
      if (j + 1 < mm) {
        Tm(j + 1, j) = beta;
        Tm(j, j + 1) = beta;
      }
    }

    const Mat<T> Th = (Tm + Tm.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Mat<T>> es(Th);
    if (es.info() != Eigen::Success) throw NoConvergence("projected eigenproblem failed", res.matvecs, best_resid);
    const auto& theta = es.eigenvalues();
    const auto& Y = es.eigenvectors();

    double worst = 0.0;
    for (std::size_t i = 0; i < k; ++i) worst = std::max(worst, beta * std::abs(Y(mm - 1, static_cast<Eigen::Index>(i))));
    best_resid = std::min(best_resid, worst);

    if (worst <= target) {
      // Confirm with explicit residuals before returning.
      Mat<T> X = V.leftCols(mm) * Y.leftCols(static_cast<Eigen::Index>(k));
      bool ok = true;
      std::vector<double> resid(k);
      for (std::size_t i = 0; i < k; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        X.col(ii).normalize();
        matvec<T>(H, X.col(ii).data(), w.data());
        ++res.matvecs;
        if (lock.cols() > 0) w.noalias() += lock * (shift * (lock.adjoint() * X.col(ii)).eval());
        resid[i] = (w - theta[ii] * X.col(ii)).norm();
        if (resid[i] > target) ok = false;
      }
      if (ok) {
        for (std::size_t i = 0; i < k; ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          res.values.push_back(theta[ii]);
          res.vectors.push_back(to_cvec<T>(X.col(ii)));
          res.residuals.push_back(resid[i]);
        }
        return res;
      }
    }
    if (res.matvecs >= o.max_iter) {
      throw NoConvergence("Lanczos did not converge within " + std::to_string(o.max_iter) + " matrix-vector products",
                          res.matvecs, best_resid / scale);
    }

    // Restart with the `keep` lowest Ritz vectors plus the residual direction.
    const Mat<T> kept = V.leftCols(mm) * Y.leftCols(keep);
    V.leftCols(keep) = kept;
    V.col(keep) = V.col(mm);
    Tm.setZero();
    for (Eigen::Index i = 0; i < keep; ++i) {
      Tm(i, i) = theta[i];
      const T c = beta * Y(mm - 1, i);
      Tm(keep, i) = c;
      Tm(i, keep) = conj_of(c);
    }
    start = keep;
    ++res.restarts;
  }
}

// A single start vector only reaches one direction of each degenerate
// eigenspace. Search the complement of the converged vectors until it holds
// nothing below the k-th value.
template <class T>
EigenResult lanczos_complete(const SparseOperator& H, std::size_t k, const SolverOptions& o, std::size_t m) {
  const auto n = static_cast<Eigen::Index>(H.rows());
  EigenResult res = lanczos<T>(H, k, o, m, Mat<T>(n, 0));
  const double margin = 100.0 * o.tol * std::max(H.norm_bound(), 1e-300);
  SolverOptions oc = o;
  for (std::size_t round = 1;; ++round) {
    Mat<T> lock(n, static_cast<Eigen::Index>(res.vectors.size()));
    for (std::size_t i = 0; i < res.vectors.size(); ++i)
      for (Eigen::Index r = 0; r < n; ++r) {
        if constexpr (std::is_same_v<T, double>) {
          lock(r, static_cast<Eigen::Index>(i)) = res.vectors[i][static_cast<std::size_t>(r)].real();
        } else {
          lock(r, static_cast<Eigen::Index>(i)) = res.vectors[i][static_cast<std::size_t>(r)];
        }
      }
    oc.seed = o.seed + round;
    const EigenResult c = lanczos<T>(H, 1, oc, m, lock);
    res.matvecs += c.matvecs;
    res.restarts += c.restarts;
    if (!(c.values[0] < res.values.back() - margin)) return res;
    // Insert the missed pair and drop the highest.
    auto pos = static_cast<std::size_t>(std::upper_bound(res.values.begin(), res.values.end(), c.values[0]) -
                                        res.values.begin());
    const auto at = static_cast<std::ptrdiff_t>(pos);
    Eigen::VectorXcd x = Eigen::Map<const Eigen::VectorXcd>(c.vectors[0].data(), n);
    for (const auto& v : res.vectors) {
      const Eigen::Map<const Eigen::VectorXcd> u(v.data(), n);
      x -= u * u.dot(x);
    }
    x.normalize();
    res.values.insert(res.values.begin() + at, c.values[0]);
    res.vectors.insert(res.vectors.begin() + at, CVec(x.data(), x.data() + n));
    res.residuals.insert(res.residuals.begin() + at, c.residuals[0]);
    res.values.pop_back();
    res.vectors.pop_back();
    res.residuals.pop_back();
  }
}

}  // namespace

EigenResult lowest_eigenpairs(const SparseOperator& H, std::size_t k, const SolverOptions& opts) {
  if (H.rows() != H.cols() || !H.hermitian()) throw InvalidInput("eigensolver needs a square Hermitian operator");
  const std::size_t n = H.rows();
  if (k == 0) throw InvalidInput("k must be positive");
  k = std::min(k, n);
  std::size_t m = opts.krylov_dim ? opts.krylov_dim : std::max<std::size_t>(2 * k + 30, 48);
  if (m < k + 4) m = k + 4;
  // The completeness pass runs in a complement of dimension n - k.
  if (n <= opts.dense_threshold || n <= m + k + 1) return dense_eigenpairs(H, k);
  if (H.is_real()) return lanczos_complete<double>(H, k, opts, m);
  return lanczos_complete<cplx>(H, k, opts, m);
}

std::size_t phase_anchor_index(std::span<const cplx> amps) {
  double top = 0.0;
  for (const auto& a : amps) top = std::max(top, std::abs(a));
  for (std::size_t i = 0; i < amps.size(); ++i)
    if (std::abs(amps[i]) >= top * (1.0 - 1e-9)) return i;
  return 0;
}

double QuantumState::effective_S() const { return 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * std::max(0.0, s_squared))); }

QuantumState make_state(BasisPtr basis, CVec amplitudes, double energy) {
  if (!basis || amplitudes.size() != basis->dimension()) throw InvalidInput("amplitude vector does not match basis");
  const double nrm = kernels::norm2<cplx>(amplitudes);
  if (!(nrm > 0.0)) throw InvalidInput("zero state vector");
  QuantumState st;
  st.basis = std::move(basis);
  st.energy = energy;
  st.phase_anchor = phase_anchor_index(amplitudes);
  const cplx a = amplitudes[st.phase_anchor];
  const cplx fix = std::abs(a) > 0.0 ? std::conj(a) / std::abs(a) / nrm : cplx{1.0 / nrm, 0.0};
  for (auto& x : amplitudes) x *= fix;
  amplitudes[st.phase_anchor] = {std::real(amplitudes[st.phase_anchor]), 0.0};
  st.amplitudes = std::move(amplitudes);
  st.s_squared = expectation_s_squared(st.basis, st.amplitudes);
  return st;
}

QuantumState ground_state(const SparseOperator& H, const GroundStateOptions& opts) {
  const auto& basis = H.basis_in();
  const double scale = std::max(H.norm_bound(), 1e-300);
  const double gap_tol = opts.solver.degeneracy_tol * scale;
  std::size_t k = std::min<std::size_t>(2, basis->dimension());
  EigenResult er = lowest_eigenpairs(H, k, opts.solver);
  // Widen until the degenerate bottom block is fully resolved.
  while (er.values.size() < basis->dimension() && er.values.back() - er.values.front() < gap_tol) {
    k = std::min(basis->dimension(), k + 2);
    er = lowest_eigenpairs(H, k, opts.solver);
  }
  std::size_t deg = 1;
  while (deg < er.values.size() && er.values[deg] - er.values.front() < gap_tol) ++deg;
  if (deg == 1) return make_state(basis, std::move(er.vectors[0]), er.values[0]);

  if (!opts.target_S) {
    throw AmbiguousMultiplet("sector M = " + basis->magnetization().str() + " has a " + std::to_string(deg) +
                             "-fold degenerate ground level; pass a target multiplet S");
  }
  // Diagonalize S^2 inside the degenerate block, matrix-free:
  // <a|S^2|b> = M(M+1)<a|b> + <S+ a|S+ b>.
  const double M = basis->magnetization().value();
  std::vector<CVec> raised(deg);
  BasisPtr up;
  for (std::size_t i = 0; i < deg; ++i) raised[i] = apply_total_raising(basis, er.vectors[i], up);
  Eigen::MatrixXcd S2(static_cast<Eigen::Index>(deg), static_cast<Eigen::Index>(deg));
  for (std::size_t a = 0; a < deg; ++a)
    for (std::size_t b = 0; b < deg; ++b) {
      cplx v = M * (M + 1.0) * kernels::omp::dot(std::span<const cplx>(er.vectors[a]), std::span<const cplx>(er.vectors[b]));
      if (!raised[a].empty()) v += kernels::omp::dot(std::span<const cplx>(raised[a]), std::span<const cplx>(raised[b]));
      S2(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(S2);
  const double S = opts.target_S->value();
  const double want = S * (S + 1.0);
  std::vector<double> dist(deg);
  for (std::size_t i = 0; i < deg; ++i) dist[i] = std::abs(es.eigenvalues()[static_cast<Eigen::Index>(i)] - want);
  const auto best = static_cast<std::size_t>(std::min_element(dist.begin(), dist.end()) - dist.begin());
  for (std::size_t i = 0; i < deg; ++i) {
    if (i != best && std::abs(dist[i] - dist[best]) < 1e-6) {
      throw AmbiguousMultiplet("degenerate ground states of sector M = " + basis->magnetization().str() +
                               " share the same <S^2>");
    }
  }
  CVec v(basis->dimension(), cplx{});
  for (std::size_t a = 0; a < deg; ++a) {
    kernels::omp::axpy(es.eigenvectors()(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(best)),
                       std::span<const cplx>(er.vectors[a]), std::span<cplx>(v));
  }
  return make_state(basis, std::move(v), er.values[0]);
}

QuantumState ground_state_in_sector(const SpinModel& model, HalfInt M, const GroundStateOptions& opts) {
  auto basis = SectorBasis::enumerate(model.cluster, M, opts.limits);
  const SparseOperator H = build_exchange_hamiltonian(model, basis);
  return ground_state(H, opts);
}

QuantumState tensor_product(const std::vector<QuantumState>& parts, ClusterPtr combined) {
  if (parts.empty()) throw InvalidInput("empty tensor product");
  std::size_t offset = 0;
  int twoM = 0;
  for (const auto& p : parts) {
    const auto& cl = p.basis->cluster();
    for (std::size_t i = 0; i < cl.size(); ++i) {
      if (offset + i >= combined->size() || combined->two_s(offset + i) != cl.two_s(i)) {
        throw SectorMismatch("tensor factor does not match the combined cluster at site " +
                             std::to_string(offset + i));
      }
    }
    offset += cl.size();
    twoM += p.M().twice;
  }
  if (offset != combined->size()) throw SectorMismatch("tensor factors do not cover the combined cluster");

  auto basis = SectorBasis::enumerate(combined, HalfInt{twoM});
  CVec amps(basis->dimension(), cplx{});
  std::vector<std::uint8_t> dev(combined->size());
  // Odometer over the factor bases.
  std::vector<std::size_t> idx(parts.size(), 0);
  while (true) {
    cplx a{1.0, 0.0};
    std::size_t pos = 0;
    for (std::size_t f = 0; f < parts.size(); ++f) {
      a *= parts[f].amplitudes[idx[f]];
      const auto d = parts[f].basis->deviations(idx[f]);
      std::copy(d.begin(), d.end(), dev.begin() + static_cast<std::ptrdiff_t>(pos));
      pos += d.size();
    }
    if (a != cplx{}) amps[basis->rank_unchecked(dev)] += a;
    std::size_t f = parts.size();
    while (f-- > 0) {
      if (++idx[f] < parts[f].basis->dimension()) break;
      idx[f] = 0;
    }
    if (f == static_cast<std::size_t>(-1)) break;
  }
  double e = 0.0;
  for (const auto& p : parts) e += p.energy;
  return make_state(basis, std::move(amps), e);
}

double overlap(const QuantumState& a, const QuantumState& b) {
  if (a.M() != b.M() || !(a.basis->cluster() == b.basis->cluster())) return 0.0;
  return std::abs(kernels::omp::dot(std::span<const cplx>(a.amplitudes), std::span<const cplx>(b.amplitudes)));
}

}  // namespace nanomag
