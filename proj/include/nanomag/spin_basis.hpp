#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nanomag/half_int.hpp"

namespace nanomag {

enum class Sublattice { A, B };

std::string to_string(Sublattice s);
Sublattice parse_sublattice(std::string_view text);

struct SpinSite {
  int index = 0;
  HalfInt s{1};
  Sublattice sublattice = Sublattice::A;
  std::string label;

  bool operator==(const SpinSite&) const = default;
};

/// Hard caps on basis sizes; construction fails loudly instead of thrashing.
struct BasisLimits {
  std::uint64_t max_states = 200'000'000;
};

/// An ordered set of spins with sublattice labels. Immutable after construction.
class SpinCluster {
 public:
  SpinCluster(std::string name, std::vector<SpinSite> sites, BasisLimits limits = {});

  const std::string& name() const { return name_; }
  const std::vector<SpinSite>& sites() const { return sites_; }
  const SpinSite& site(std::size_t i) const { return sites_.at(i); }
  std::size_t size() const { return sites_.size(); }

  /// Twice the spin of site i.
  int two_s(std::size_t i) const { return sites_[i].s.twice; }

  /// Sum of s_i over all sites.
  HalfInt total_spin_max() const { return total_; }
  /// Sum of s_i over the sites of one sublattice.
  HalfInt sublattice_spin_max(Sublattice which) const;
  std::size_t sublattice_count(Sublattice which) const;

  /// Product of (2 s_i + 1); saturates at UINT64_MAX.
  std::uint64_t total_dimension() const;

  bool operator==(const SpinCluster& o) const { return name_ == o.name_ && sites_ == o.sites_; }

 private:
  std::string name_;
  std::vector<SpinSite> sites_;
  HalfInt total_{0};
};

using ClusterPtr = std::shared_ptr<const SpinCluster>;

/// Product configurations with fixed total S_z = M.
///
/// Each configuration is stored as the per-site deviations k_i = s_i - m_i,
/// 0 <= k_i <= 2 s_i. States are ordered lexicographically by descending
/// (2m_0, 2m_1, ...), i.e. ascending deviation tuples, so the first state is the
/// one with the leading sites as high as possible. Lookup is a combinatorial
/// rank, O(N) per configuration.
class SectorBasis {
 public:
  static std::shared_ptr<const SectorBasis> enumerate(ClusterPtr cluster, HalfInt M,
                                                      BasisLimits limits = {});

  const SpinCluster& cluster() const { return *cluster_; }
  const ClusterPtr& cluster_ptr() const { return cluster_; }
  HalfInt magnetization() const { return M_; }
  std::size_t dimension() const { return dim_; }
  std::size_t n_sites() const { return n_; }

  /// Deviations (s_i - m_i) of state idx.
  std::span<const std::uint8_t> deviations(std::size_t idx) const {
    return {dev_.data() + idx * n_, n_};
  }
  int deviation(std::size_t idx, std::size_t site) const { return dev_[idx * n_ + site]; }
  /// Twice m_i for state idx.
  int two_m(std::size_t idx, std::size_t site) const {
    return two_s_[site] - 2 * dev_[idx * n_ + site];
  }
  double m(std::size_t idx, std::size_t site) const { return 0.5 * two_m(idx, site); }

  /// Position of a configuration, or npos when it is not a member of this
  /// sector (wrong total or out-of-range deviation).
  std::size_t index_of(std::span<const std::uint8_t> deviations) const;
  /// Rank of a configuration that is known to be a member.
  std::size_t rank_unchecked(std::span<const std::uint8_t> deviations) const;

  /// Doubled m-tuples of state idx, for display and golden hashes.
  std::vector<int> two_m_tuple(std::size_t idx) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  SectorBasis() = default;

  ClusterPtr cluster_;
  HalfInt M_{0};
  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  int total_dev_ = 0;
  std::vector<int> two_s_;
  std::vector<std::uint8_t> dev_;
  // offset_[site][r][k]: number of states, among completions that start at
  // `site` with remaining deviation r, whose deviation at `site` is below k.
  std::vector<std::vector<std::vector<std::uint64_t>>> offset_;
};

using BasisPtr = std::shared_ptr<const SectorBasis>;

/// Number of product states with total S_z = M, computed by convolving the
/// per-site multiplicity polynomials without building the basis.
std::uint64_t sector_dimension(const SpinCluster& cluster, HalfInt M);

/// All valid magnetizations of the cluster, from S_max down to -S_max.
std::vector<HalfInt> valid_magnetizations(const SpinCluster& cluster);

/// Throws EmptySector if M is out of range or has the wrong parity.
void check_sector(const SpinCluster& cluster, HalfInt M);

/// Ladder matrix element <m +- 1| s_+- |m>, sqrt(s(s+1) - m(m +- 1)).
double ladder_coefficient(int two_s, int two_m, int direction);

}  // namespace nanomag
