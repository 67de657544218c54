#include "nanomag/spin_basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nanomag/errors.hpp"

namespace nanomag {

std::string to_string(Sublattice s) { return s == Sublattice::A ? "A" : "B"; }

Sublattice parse_sublattice(std::string_view text) {
  if (text == "A" || text == "a") return Sublattice::A;
  if (text == "B" || text == "b") return Sublattice::B;
  throw InvalidInput("sublattice must be 'A' or 'B', got '" + std::string(text) + "'");
}

SpinCluster::SpinCluster(std::string name, std::vector<SpinSite> sites, BasisLimits limits)
    : name_(std::move(name)), sites_(std::move(sites)) {
  if (sites_.empty()) throw InvalidInput("cluster '" + name_ + "' has no sites");
  if (sites_.size() > 64) throw InvalidInput("clusters are limited to 64 sites");
  int total = 0;
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const auto& site = sites_[i];
    if (site.index != static_cast<int>(i)) {
      throw InvalidInput("site indices must be contiguous from 0 (site " + std::to_string(i) +
                         " has index " + std::to_string(site.index) + ")");
    }
    if (site.s.twice <= 0) throw InvalidInput("site " + std::to_string(i) + " has spin <= 0");
    if (site.s.twice > 255) throw InvalidInput("site spin too large");
    total += site.s.twice;
  }
  total_ = HalfInt{total};
  if (total_dimension() > limits.max_states) {
    // The full product space is never materialized; only sectors are. The cap
    // still applies to the full space, matching the configured budget.
    throw BudgetExceeded("cluster '" + name_ + "' has product dimension " +
                         std::to_string(total_dimension()) + " above the cap " +
                         std::to_string(limits.max_states));
  }
}

HalfInt SpinCluster::sublattice_spin_max(Sublattice which) const {
  int t = 0;
  for (const auto& s : sites_)
    if (s.sublattice == which) t += s.s.twice;
  return HalfInt{t};
}

std::size_t SpinCluster::sublattice_count(Sublattice which) const {
  return static_cast<std::size_t>(
      std::count_if(sites_.begin(), sites_.end(), [&](const SpinSite& s) { return s.sublattice == which; }));
}

std::uint64_t SpinCluster::total_dimension() const {
  std::uint64_t d = 1;
  for (const auto& s : sites_) {
    const std::uint64_t f = static_cast<std::uint64_t>(s.s.twice) + 1;
    if (d > std::numeric_limits<std::uint64_t>::max() / f) return std::numeric_limits<std::uint64_t>::max();
    d *= f;
  }
  return d;
}

void check_sector(const SpinCluster& cluster, HalfInt M) {
  const int smax = cluster.total_spin_max().twice;
  if (std::abs(M.twice) > smax) {
    throw EmptySector("M = " + M.str() + " is outside [-" + cluster.total_spin_max().str() + ", " +
                      cluster.total_spin_max().str() + "] for cluster '" + cluster.name() + "'");
  }
  if ((smax - M.twice) % 2 != 0) {
    throw EmptySector("M = " + M.str() + " has the wrong parity for cluster '" + cluster.name() + "'");
  }
}

std::vector<HalfInt> valid_magnetizations(const SpinCluster& cluster) {
  std::vector<HalfInt> out;
  const int smax = cluster.total_spin_max().twice;
  for (int t = smax; t >= -smax; t -= 2) out.emplace_back(t);
  return out;
}

std::uint64_t sector_dimension(const SpinCluster& cluster, HalfInt M) {
  check_sector(cluster, M);
  const int R = (cluster.total_spin_max().twice - M.twice) / 2;
  // Coefficient of x^R in prod_i (1 + x + ... + x^{2 s_i}); higher powers are
  // never needed.
  std::vector<std::uint64_t> poly(static_cast<std::size_t>(R) + 1, 0);
  poly[0] = 1;
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    const int width = cluster.two_s(i);
    std::vector<std::uint64_t> next(poly.size(), 0);
    for (int r = 0; r <= R; ++r) {
      if (poly[r] == 0) continue;
      for (int k = 0; k <= width && r + k <= R; ++k) next[r + k] += poly[r];
    }
    poly.swap(next);
  }
  return poly[R];
}

double ladder_coefficient(int two_s, int two_m, int direction) {
  // 4 [s(s+1) - m(m +- 1)] = 2s(2s+2) - 2m(2m +- 2), an exact integer.
  const long v = static_cast<long>(two_s) * (two_s + 2) - static_cast<long>(two_m) * (two_m + 2 * direction);
  if (v <= 0) return 0.0;
  return 0.5 * std::sqrt(static_cast<double>(v));
}

std::shared_ptr<const SectorBasis> SectorBasis::enumerate(ClusterPtr cluster, HalfInt M, BasisLimits limits) {
  if (!cluster) throw InvalidInput("null cluster");
  check_sector(*cluster, M);
  const std::uint64_t dim = sector_dimension(*cluster, M);
  if (dim > limits.max_states) {
    throw BudgetExceeded("sector M = " + M.str() + " of '" + cluster->name() + "' has dimension " +
                         std::to_string(dim) + " above the cap " + std::to_string(limits.max_states));
  }

  auto basis = std::shared_ptr<SectorBasis>(new SectorBasis());
  auto& b = *basis;
  b.cluster_ = cluster;
  b.M_ = M;
  b.n_ = cluster->size();
  b.total_dev_ = (cluster->total_spin_max().twice - M.twice) / 2;
  b.two_s_.resize(b.n_);
  for (std::size_t i = 0; i < b.n_; ++i) b.two_s_[i] = cluster->two_s(i);

  const int R = b.total_dev_;
  const std::size_t n = b.n_;
  // count[i][r]: completions of sites i..n-1 with total deviation r.
  std::vector<std::vector<std::uint64_t>> count(n + 1, std::vector<std::uint64_t>(R + 1, 0));
  count[n][0] = 1;
  for (std::size_t i = n; i-- > 0;) {
    for (int r = 0; r <= R; ++r) {
      std::uint64_t c = 0;
      for (int k = 0; k <= b.two_s_[i] && k <= r; ++k) c += count[i + 1][r - k];
      count[i][r] = c;
    }
  }
  b.offset_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    b.offset_[i].assign(R + 1, std::vector<std::uint64_t>(b.two_s_[i] + 2, 0));
    for (int r = 0; r <= R; ++r) {
      std::uint64_t acc = 0;
      for (int k = 0; k <= b.two_s_[i] + 1; ++k) {
        b.offset_[i][r][k] = acc;
        if (k <= b.two_s_[i] && k <= r) acc += count[i + 1][r - k];
      }
    }
  }

  b.dim_ = static_cast<std::size_t>(count[0][R]);
  b.dev_.assign(b.dim_ * n, 0);

  // Depth-first generation in rank order; branches without completions are
  // skipped, so every leaf is a member.
  std::vector<std::uint8_t> cur(n, 0);
  std::size_t pos = 0;
  auto descend = [&](auto&& self, std::size_t site, int r) -> void {
    if (site == n) {
      std::copy(cur.begin(), cur.end(), b.dev_.begin() + static_cast<std::ptrdiff_t>(pos * n));
      ++pos;
      return;
    }
    for (int k = 0; k <= b.two_s_[site] && k <= r; ++k) {
      if (count[site + 1][r - k] == 0) continue;
      cur[site] = static_cast<std::uint8_t>(k);
      self(self, site + 1, r - k);
    }
  };
  descend(descend, 0, R);
  if (pos != b.dim_) throw Error("internal: sector enumeration count mismatch");
  return basis;
}

std::size_t SectorBasis::rank_unchecked(std::span<const std::uint8_t> d) const {
  std::uint64_t rank = 0;
  int r = total_dev_;
  for (std::size_t i = 0; i < n_; ++i) {
    rank += offset_[i][r][d[i]];
    r -= d[i];
  }
  return static_cast<std::size_t>(rank);
}

std::size_t SectorBasis::index_of(std::span<const std::uint8_t> d) const {
  if (d.size() != n_) return npos;
  int total = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    if (d[i] > two_s_[i]) return npos;
    total += d[i];
  }
  if (total != total_dev_) return npos;
  return rank_unchecked(d);
}

std::vector<int> SectorBasis::two_m_tuple(std::size_t idx) const {
  std::vector<int> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = two_m(idx, i);
  return out;
}

}  // namespace nanomag
