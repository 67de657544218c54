#include "nanomag/correlations.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "nanomag/errors.hpp"

namespace nanomag {

Superposition::Superposition(QuantumState psi1, QuantumState psi2, double relative_phase)
    : psi1_(std::move(psi1)), psi2_(std::move(psi2)), phase_(relative_phase) {
  if (!(psi1_.basis->cluster() == psi2_.basis->cluster())) {
    throw SectorMismatch("superposition components live on different clusters");
  }
  if (psi1_.M() == psi2_.M() && overlap(psi1_, psi2_) >= 1e-10) {
    throw InvalidInput("superposition components in the same sector must be orthogonal");
  }
}

namespace {

// Per-state ladder images s_i+ psi and s_i- psi.
struct Ladders {
  const QuantumState* psi = nullptr;
  BasisPtr up;
  BasisPtr down;
  std::vector<CVec> plus;
  std::vector<CVec> minus;
};

BasisPtr neighbor_sector(const QuantumState& psi, int shift) {
  const auto& cl = psi.basis->cluster();
  const HalfInt M = psi.M() + HalfInt{2 * shift};
  if (std::abs(M.twice) > cl.total_spin_max().twice) return nullptr;
  return SectorBasis::enumerate(psi.basis->cluster_ptr(), M);
}

Ladders make_ladders(const QuantumState& psi) {
  Ladders L;
  L.psi = &psi;
  L.up = neighbor_sector(psi, +1);
  L.down = neighbor_sector(psi, -1);
  const std::size_t n = psi.basis->n_sites();
  L.plus.resize(n);
  L.minus.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (L.up) {
      L.plus[i].resize(L.up->dimension());
      kernels::omp::apply_ladder(*psi.basis, *L.up, i, +1, psi.amplitudes, L.plus[i]);
    }
    if (L.down) {
      L.minus[i].resize(L.down->dimension());
      kernels::omp::apply_ladder(*psi.basis, *L.down, i, -1, psi.amplitudes, L.minus[i]);
    }
  }
  return L;
}

// Spherical index: 0 = plus, 1 = minus, 2 = z.
constexpr int kPlus = 0;
constexpr int kMinus = 1;
constexpr int kZ = 2;

// s_a = sum_mu T[a][mu] s_mu with a in {x, y, z}.
const std::array<std::array<cplx, 3>, 3> kT{{
    {cplx{0.5, 0.0}, cplx{0.5, 0.0}, cplx{0.0, 0.0}},
    {cplx{0.0, -0.5}, cplx{0.0, 0.5}, cplx{0.0, 0.0}},
    {cplx{0.0, 0.0}, cplx{0.0, 0.0}, cplx{1.0, 0.0}},
}};

struct Raw {
  Eigen::VectorXcd one;  // <a|s_ia|b>
  Eigen::MatrixXcd two;  // <a|s_ia s_jb|b>, not symmetrized
};

// Vector and basis holding O psi for O in {s_i+, s_i-, 1} (z handled as a weight).
struct Image {
  const SectorBasis* basis;
  const CVec* vec;
};

Image image_of(const Ladders& L, std::size_t i, int mu) {
  if (mu == kPlus) return {L.up.get(), L.up ? &L.plus[i] : nullptr};
  if (mu == kMinus) return {L.down.get(), L.down ? &L.minus[i] : nullptr};
  return {L.psi->basis.get(), &L.psi->amplitudes};
}

bool same_sector(const SectorBasis* a, const SectorBasis* b) {
  return a && b && a->magnetization() == b->magnetization();
}

Raw raw_terms(const Ladders& A, const Ladders& B) {
  const std::size_t n = A.psi->basis->n_sites();
  const int dM2 = A.psi->M().twice - B.psi->M().twice;  // twice (Ma - Mb)
  Raw r;
  r.one = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(3 * n));
  r.two = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(3 * n), static_cast<Eigen::Index>(3 * n));

  // One-spin: <a|s_i mu|b> is nonzero only for the shift matching Ma - Mb.
  if (std::abs(dM2) <= 2) {
    for (std::size_t i = 0; i < n; ++i) {
      std::array<cplx, 3> g{};
      if (dM2 == 0) {
        g[kZ] = kernels::omp::weighted_dot(*A.psi->basis, A.psi->amplitudes, B.psi->amplitudes, static_cast<int>(i), -1);
      } else {
        const int mu = dM2 > 0 ? kPlus : kMinus;
        const Image im = image_of(B, i, mu);
        if (im.vec) g[mu] = kernels::omp::dot(std::span<const cplx>(A.psi->amplitudes), std::span<const cplx>(*im.vec));
      }
      for (int a = 0; a < 3; ++a) {
        cplx v{};
        for (int mu = 0; mu < 3; ++mu) v += kT[a][mu] * g[mu];
        r.one[static_cast<Eigen::Index>(3 * i + a)] = v;
      }
    }
  }
  if (std::abs(dM2) > 4) return r;

  // Two-spin: <a|s_i mu s_j nu|b> = <s_i mu^dag a | s_j nu b>.
  // The bra image of s_i mu^dag: plus -> minus ladder of a, minus -> plus.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::array<std::array<cplx, 3>, 3> G{};
      for (int mu = 0; mu < 3; ++mu) {
        const int mu_dag = mu == kPlus ? kMinus : (mu == kMinus ? kPlus : kZ);
        const Image left = image_of(A, i, mu_dag);
        if (!left.vec) continue;
        for (int nu = 0; nu < 3; ++nu) {
          const Image right = image_of(B, j, nu);
          if (!right.vec || !same_sector(left.basis, right.basis)) continue;
          const int wl = mu == kZ ? static_cast<int>(i) : -1;
          const int wr = nu == kZ ? static_cast<int>(j) : -1;
          if (wl < 0 && wr < 0) {
            G[mu][nu] = kernels::omp::dot(std::span<const cplx>(*left.vec), std::span<const cplx>(*right.vec));
          } else {
            G[mu][nu] = kernels::omp::weighted_dot(*left.basis, *left.vec, *right.vec, wl, wr);
          }
        }
      }
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          cplx v{};
          for (int mu = 0; mu < 3; ++mu)
            for (int nu = 0; nu < 3; ++nu) v += kT[a][mu] * kT[b][nu] * G[mu][nu];
          r.two(static_cast<Eigen::Index>(3 * i + a), static_cast<Eigen::Index>(3 * j + b)) = v;
        }
    }
  }
  return r;
}

Eigen::MatrixXcd symmetrize(const Eigen::MatrixXcd& m) { return 0.5 * (m + m.transpose()); }

CorrelationData from_raw(const Raw& r, ClusterPtr cluster, std::string subject) {
  CorrelationData d;
  d.cluster = std::move(cluster);
  d.b = r.one.real();
  d.C = symmetrize(r.two).real();
  d.subject = std::move(subject);
  return d;
}

}  // namespace

CorrelationData correlations_of_state(const QuantumState& psi) {
  const Ladders L = make_ladders(psi);
  CorrelationData d = from_raw(raw_terms(L, L), psi.basis->cluster_ptr(), "state M=" + psi.M().str());
  // An S_z eigenstate has no transverse moment; zero it structurally.
  for (std::size_t i = 0; i < d.n_sites(); ++i) {
    d.b[static_cast<Eigen::Index>(3 * i)] = 0.0;
    d.b[static_cast<Eigen::Index>(3 * i + 1)] = 0.0;
  }
  return d;
}

SuperpositionTerms superposition_terms(const QuantumState& psi1, const QuantumState& psi2) {
  const Ladders L1 = make_ladders(psi1);
  const Ladders L2 = make_ladders(psi2);
  SuperpositionTerms t;
  const auto cl = psi1.basis->cluster_ptr();
  t.comp1 = from_raw(raw_terms(L1, L1), cl, "component M=" + psi1.M().str());
  t.comp2 = from_raw(raw_terms(L2, L2), cl, "component M=" + psi2.M().str());
  for (auto* c : {&t.comp1, &t.comp2})
    for (std::size_t i = 0; i < c->n_sites(); ++i) {
      c->b[static_cast<Eigen::Index>(3 * i)] = 0.0;
      c->b[static_cast<Eigen::Index>(3 * i + 1)] = 0.0;
    }
  const Raw x = raw_terms(L1, L2);
  t.b12 = x.one;
  t.C12 = symmetrize(x.two);
  return t;
}

CorrelationData SuperpositionTerms::combine(double phase) const {
  const cplx e = std::polar(1.0, phase);
  CorrelationData d;
  d.cluster = comp1.cluster;
  d.b = 0.5 * (comp1.b + comp2.b) + (e * b12).real();
  d.C = 0.5 * (comp1.C + comp2.C) + (e * C12).real();
  d.subject = "superposition phase=" + std::to_string(phase);
  return d;
}

CorrelationData correlations_of_superposition(const Superposition& sup) {
  return superposition_terms(sup.psi1(), sup.psi2()).combine(sup.relative_phase());
}

StaggeredStats staggered_magnetization_stats(const CorrelationData& data) {
  const std::size_t n = data.n_sites();
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * n));
  for (std::size_t i = 0; i < n; ++i) {
    sigma[static_cast<Eigen::Index>(3 * i + 2)] = data.cluster->site(i).sublattice == Sublattice::A ? 1.0 : -1.0;
  }
  StaggeredStats s;
  s.mean = sigma.dot(data.b);
  s.variance = sigma.dot(data.C * sigma) - s.mean * s.mean;
  return s;
}

StaggeredStats staggered_magnetization_stats(const QuantumState& psi) {
  return staggered_magnetization_stats(correlations_of_state(psi));
}

std::string correlations_csv(const CorrelationData& data) {
  static const char* axis = "xyz";
  std::ostringstream out;
  out.precision(17);
  out << "kind,i,a,j,b,value\n";
  const auto n = static_cast<Eigen::Index>(data.n_sites());
  for (Eigen::Index p = 0; p < 3 * n; ++p) out << "b," << p / 3 << ',' << axis[p % 3] << ",,," << data.b[p] << '\n';
  for (Eigen::Index p = 0; p < 3 * n; ++p)
    for (Eigen::Index q = 0; q < 3 * n; ++q)
      out << "C," << p / 3 << ',' << axis[p % 3] << ',' << q / 3 << ',' << axis[q % 3] << ',' << data.C(p, q) << '\n';
  return out.str();
}

}  // namespace nanomag
