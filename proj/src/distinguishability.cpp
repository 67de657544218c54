#include "nanomag/distinguishability.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "nanomag/errors.hpp"

namespace nanomag {

std::vector<std::size_t> mask_sites(SubsetMask mask) {
  std::vector<std::size_t> out;
  while (mask) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return out;
}

SubsetMask mask_of(std::initializer_list<std::size_t> sites) {
  SubsetMask m = 0;
  for (auto s : sites) m |= SubsetMask{1} << s;
  return m;
}

namespace {

struct Split {
  int block;            // total deviation inside the subset
  std::uint64_t local;  // mixed-radix code of the subset deviations
  std::uint64_t env;    // mixed-radix code of the complement deviations
  cplx amp;
};

void check_subset(const SpinCluster& cl, SubsetMask subset) {
  if (subset == 0) throw InvalidInput("empty subset");
  if (cl.size() < 64 && (subset >> cl.size()) != 0) throw InvalidInput("subset contains sites outside the cluster");
}

std::vector<Split> split_state(const QuantumState& psi, SubsetMask subset) {
  const auto& b = *psi.basis;
  const auto& cl = b.cluster();
  std::vector<Split> out;
  out.reserve(b.dimension());
  for (std::size_t c = 0; c < b.dimension(); ++c) {
    const cplx a = psi.amplitudes[c];
    if (a == cplx{}) continue;
    Split s{0, 0, 0, a};
    const auto dev = b.deviations(c);
    for (std::size_t i = 0; i < cl.size(); ++i) {
      const std::uint64_t radix = static_cast<std::uint64_t>(cl.two_s(i)) + 1;
      if ((subset >> i) & 1U) {
        s.block += dev[i];
        s.local = s.local * radix + dev[i];
      } else {
        s.env = s.env * radix + dev[i];
      }
    }
    out.push_back(s);
  }
  return out;
}

std::uint64_t local_dimension(const SpinCluster& cl, SubsetMask subset) {
  std::uint64_t d = 1;
  for (auto i : mask_sites(subset)) d *= static_cast<std::uint64_t>(cl.two_s(i)) + 1;
  return d;
}

// Sum of |eigenvalues| of U U^H - W W^H.
double block_trace_norm(const Eigen::MatrixXcd& U, const Eigen::MatrixXcd& W) {
  const Eigen::Index d = U.rows();
  const Eigen::Index c = U.cols() + W.cols();
  Eigen::VectorXd ev;
  if (d <= c) {
    Eigen::MatrixXcd D = U * U.adjoint() - W * W.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D, Eigen::EigenvaluesOnly);
    ev = es.eigenvalues();
  } else {
    // U U^H - W W^H = K G K^H with K = [U W], G = diag(I, -I); the nonzero
    // spectrum equals that of R G R^H for K = Q R.
    Eigen::MatrixXcd K(d, c);
    K << U, W;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(K);
    const Eigen::MatrixXcd R = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
    Eigen::MatrixXcd RG = R;
    RG.rightCols(W.cols()) *= -1.0;
    const Eigen::MatrixXcd Mx = RG * R.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (Mx + Mx.adjoint()), Eigen::EigenvaluesOnly);
    ev = es.eigenvalues();
  }
  return ev.cwiseAbs().sum();
}

}  // namespace

Eigen::MatrixXcd reduced_density_matrix(const QuantumState& psi, SubsetMask subset, std::size_t cap) {
  const auto& cl = psi.basis->cluster();
  check_subset(cl, subset);
  const std::uint64_t d = local_dimension(cl, subset);
  if (d > cap) {
    throw SubsetTooLarge("subset dimension " + std::to_string(d) + " exceeds the cap " + std::to_string(cap));
  }
  auto parts = split_state(psi, subset);
  std::sort(parts.begin(), parts.end(), [](const Split& a, const Split& b) { return a.env < b.env; });
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t lo = 0; lo < parts.size();) {
    std::size_t hi = lo;
    while (hi < parts.size() && parts[hi].env == parts[lo].env) ++hi;
    for (std::size_t p = lo; p < hi; ++p)
      for (std::size_t q = lo; q < hi; ++q) {
        rho(static_cast<Eigen::Index>(parts[p].local), static_cast<Eigen::Index>(parts[q].local)) +=
            parts[p].amp * std::conj(parts[q].amp);
      }
    lo = hi;
  }
  return rho;
}

double discrimination_probability(const QuantumState& psi1, const QuantumState& psi2, SubsetMask subset,
                                  const DistinguishOptions& opts) {
  const auto& cl = psi1.basis->cluster();
  if (!(cl == psi2.basis->cluster())) throw SectorMismatch("states live on different clusters");
  check_subset(cl, subset);

  auto s1 = split_state(psi1, subset);
  auto s2 = split_state(psi2, subset);
  auto order = [](const Split& a, const Split& b) {
    return std::tie(a.block, a.env, a.local) < std::tie(b.block, b.env, b.local);
  };
  std::sort(s1.begin(), s1.end(), order);
  std::sort(s2.begin(), s2.end(), order);

  int max_block = 0;
  for (const auto& s : s1) max_block = std::max(max_block, s.block);
  for (const auto& s : s2) max_block = std::max(max_block, s.block);

  struct Range {
    std::size_t lo;
    std::size_t hi;
  };
  auto block_range = [](const std::vector<Split>& v, int blk) {
    auto lo = std::lower_bound(v.begin(), v.end(), blk, [](const Split& s, int b) { return s.block < b; });
    auto hi = std::upper_bound(v.begin(), v.end(), blk, [](int b, const Split& s) { return b < s.block; });
    return Range{static_cast<std::size_t>(lo - v.begin()), static_cast<std::size_t>(hi - v.begin())};
  };

  // Collect blocks first so the size cap is checked before any heavy work.
  struct Block {
    Range r1;
    Range r2;
    std::vector<std::uint64_t> locals;
    std::size_t e1 = 0;
    std::size_t e2 = 0;
  };
  std::vector<Block> blocks;
  auto count_envs = [](const std::vector<Split>& v, Range r) {
    std::size_t e = 0;
    for (std::size_t p = r.lo; p < r.hi; ++p)
      if (p == r.lo || v[p].env != v[p - 1].env) ++e;
    return e;
  };
  for (int blk = 0; blk <= max_block; ++blk) {
    Block B{block_range(s1, blk), block_range(s2, blk), {}, 0, 0};
    if (B.r1.lo == B.r1.hi && B.r2.lo == B.r2.hi) continue;
    for (std::size_t p = B.r1.lo; p < B.r1.hi; ++p) B.locals.push_back(s1[p].local);
    for (std::size_t p = B.r2.lo; p < B.r2.hi; ++p) B.locals.push_back(s2[p].local);
    std::sort(B.locals.begin(), B.locals.end());
    B.locals.erase(std::unique(B.locals.begin(), B.locals.end()), B.locals.end());
    B.e1 = count_envs(s1, B.r1);
    B.e2 = count_envs(s2, B.r2);
    const std::size_t size = std::min(B.locals.size(), B.e1 + B.e2);
    if (size > opts.max_block_dim) {
      throw SubsetTooLarge("discrimination block of size " + std::to_string(size) + " exceeds the cap " +
                           std::to_string(opts.max_block_dim));
    }
    blocks.push_back(std::move(B));
  }

  double tn = 0.0;
  for (const auto& B : blocks) {
    const auto d = static_cast<Eigen::Index>(B.locals.size());
    auto fill = [&](const std::vector<Split>& v, Range r, std::size_t e) {
      Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(d, static_cast<Eigen::Index>(e));
      Eigen::Index col = -1;
      for (std::size_t p = r.lo; p < r.hi; ++p) {
        if (p == r.lo || v[p].env != v[p - 1].env) ++col;
        const auto row = std::lower_bound(B.locals.begin(), B.locals.end(), v[p].local) - B.locals.begin();
        M(row, col) = v[p].amp;
      }
      return M;
    };
    tn += block_trace_norm(fill(s1, B.r1, B.e1), fill(s2, B.r2, B.e2));
  }
  return std::clamp(0.5 + 0.25 * tn, 0.5, 1.0);
}

double discrimination_probability_dense(const QuantumState& psi1, const QuantumState& psi2, SubsetMask subset,
                                        std::size_t cap) {
  const Eigen::MatrixXcd D = reduced_density_matrix(psi1, subset, cap) - reduced_density_matrix(psi2, subset, cap);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D, Eigen::EigenvaluesOnly);
  return std::clamp(0.5 + 0.25 * es.eigenvalues().cwiseAbs().sum(), 0.5, 1.0);
}

PartitionResult partition_search(std::size_t n, const std::function<double(SubsetMask)>& prob, double delta,
                                 bool parallel) {
  if (n == 0 || n > 24) throw InvalidInput("partition search supports 1..24 sites");
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidInput("delta must lie in (0, 1/2)");
  const SubsetMask full = (SubsetMask{1} << n) - 1;
  const double threshold = 1.0 - delta;

  PartitionResult res;
  res.delta = delta;
  res.full_cluster_probability = prob(full);
  res.evaluations = 1;
  if (!(res.full_cluster_probability > threshold)) return res;

  const std::size_t total = std::size_t{1} << n;
  std::vector<std::uint8_t> good(total, 0);
  std::vector<double> pv(total, std::numeric_limits<double>::quiet_NaN());
  pv[full] = res.full_cluster_probability;

  std::vector<std::vector<SubsetMask>> by_size(n + 1);
  for (SubsetMask m = 1; m < full; ++m) by_size[static_cast<std::size_t>(std::popcount(m))].push_back(m);

  std::vector<SubsetMask> minimal;
  for (std::size_t k = 1; k < n; ++k) {
    std::vector<SubsetMask> todo;
    for (SubsetMask m : by_size[k]) {
      bool known = false;
      for (SubsetMask rest = m; rest && !known; rest &= rest - 1) {
        const SubsetMask sub = m & ~(rest & (~rest + 1));
        if (sub && good[sub]) known = true;
      }
      if (known) {
        good[m] = 1;
      } else {
        todo.push_back(m);
      }
    }
    const auto cnt = static_cast<std::int64_t>(todo.size());
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (std::int64_t t = 0; t < cnt; ++t) pv[todo[static_cast<std::size_t>(t)]] = prob(todo[static_cast<std::size_t>(t)]);
    res.evaluations += todo.size();
    for (SubsetMask m : todo) {
      if (pv[m] > threshold) {
        good[m] = 1;
        minimal.push_back(m);
      }
    }
  }
  {
    bool known = false;
    for (std::size_t i = 0; i < n && !known; ++i) known = good[full & ~(SubsetMask{1} << i)] != 0;
    if (!known || n == 1) minimal.push_back(full);
  }
  res.minimal_good = minimal;

  // Maximum packing of disjoint minimal good subsets.
  std::vector<std::vector<SubsetMask>> by_low(n);
  for (SubsetMask g : minimal) by_low[static_cast<std::size_t>(std::countr_zero(g))].push_back(g);
  std::vector<std::int8_t> memo(total, -1);
  std::vector<SubsetMask> choice(total, 0);
  auto f = [&](auto&& self, SubsetMask mask) -> int {
    if (mask == 0) return 0;
    if (memo[mask] >= 0) return memo[mask];
    const SubsetMask low = mask & (~mask + 1);
    int best = self(self, mask & ~low);
    SubsetMask pick = 0;
    for (SubsetMask g : by_low[static_cast<std::size_t>(std::countr_zero(low))]) {
      if ((g & ~mask) != 0) continue;
      const int v = 1 + self(self, mask & ~g);
      if (v > best) {
        best = v;
        pick = g;
      }
    }
    memo[mask] = static_cast<std::int8_t>(best);
    choice[mask] = pick;
    return best;
  };
  f(f, full);

  std::vector<SubsetMask> parts;
  SubsetMask leftover = 0;
  for (SubsetMask mask = full; mask;) {
    const SubsetMask g = choice[mask];
    if (g) {
      parts.push_back(g);
      mask &= ~g;
    } else {
      const SubsetMask low = mask & (~mask + 1);
      leftover |= low;
      mask &= ~low;
    }
  }
  std::sort(parts.begin(), parts.end(), [](SubsetMask a, SubsetMask b) { return std::countr_zero(a) < std::countr_zero(b); });
  for (auto site : mask_sites(leftover)) {
    std::size_t target = 0;
    for (std::size_t p = 0; p < parts.size(); ++p)
      if (static_cast<std::size_t>(std::countr_zero(parts[p])) < site) target = p;
    parts[target] |= SubsetMask{1} << site;
  }
  res.parts = parts;
  res.n_parts = parts.size();
  for (SubsetMask p : parts) {
    if (std::isnan(pv[p])) {
      pv[p] = prob(p);
      ++res.evaluations;
    }
    res.per_part_probability.push_back(pv[p]);
  }
  return res;
}

PartitionResult d_lm(const QuantumState& psi1, const QuantumState& psi2, double delta, const DistinguishOptions& opts) {
  const std::size_t n = psi1.basis->n_sites();
  if (n > opts.max_sites) {
    throw BudgetExceeded("partition search is limited to " + std::to_string(opts.max_sites) + " sites");
  }
  return partition_search(
      n, [&](SubsetMask m) { return discrimination_probability(psi1, psi2, m, opts); }, delta, opts.parallel);
}

std::size_t d_lm_bruteforce(std::size_t n, const std::function<double(SubsetMask)>& prob, double delta) {
  if (n == 0 || n > 10) throw InvalidInput("brute-force partition enumeration supports 1..10 sites");
  const double threshold = 1.0 - delta;
  std::unordered_map<SubsetMask, bool> cache;
  auto good = [&](SubsetMask m) {
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    const bool g = prob(m) > threshold;
    cache.emplace(m, g);
    return g;
  };
  std::size_t best = 0;
  std::vector<SubsetMask> blocks;
  // Restricted growth: site i joins an existing block or opens a new one.
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == n) {
      for (SubsetMask b : blocks)
        if (!good(b)) return;
      best = std::max(best, blocks.size());
      return;
    }
    // Index, not reference: the recursion grows `blocks`.
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      blocks[k] |= SubsetMask{1} << i;
      self(self, i + 1);
      blocks[k] &= ~(SubsetMask{1} << i);
    }
    blocks.push_back(SubsetMask{1} << i);
    self(self, i + 1);
    blocks.pop_back();
  };
  rec(rec, 0);
  return best;
}

}  // namespace nanomag
