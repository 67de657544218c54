#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "nanomag/eigensolver.hpp"

namespace nanomag {

using SubsetMask = std::uint64_t;

std::vector<std::size_t> mask_sites(SubsetMask mask);
SubsetMask mask_of(std::initializer_list<std::size_t> sites);

struct DistinguishOptions {
  /// Cap on the dense problem size per magnetization block.
  std::size_t max_block_dim = 4096;
  /// Largest cluster the partition search accepts.
  std::size_t max_sites = 20;
  /// Evaluate the subsets of one size in parallel.
  bool parallel = true;
};

/// Partial trace onto `subset`, in the local product basis ordered by
/// ascending deviations (site order inside the subset, first site slowest).
Eigen::MatrixXcd reduced_density_matrix(const QuantumState& psi, SubsetMask subset, std::size_t cap = 4096);

/// Helstrom success probability 1/2 + 1/4 ||rho1 - rho2||_1 on `subset`.
/// Works block by block in the subset magnetization and never forms the full
/// reduced matrices.
double discrimination_probability(const QuantumState& psi1, const QuantumState& psi2, SubsetMask subset,
                                  const DistinguishOptions& opts = {});

/// Reference: dense reduced matrices and a full Hermitian eigensolve.
double discrimination_probability_dense(const QuantumState& psi1, const QuantumState& psi2, SubsetMask subset,
                                        std::size_t cap = 4096);

struct PartitionResult {
  std::vector<SubsetMask> parts;
  std::size_t n_parts = 0;
  std::vector<double> per_part_probability;
  double delta = 0.0;
  double full_cluster_probability = 0.0;
  std::vector<SubsetMask> minimal_good;
  std::size_t evaluations = 0;
};

/// Maximum number of disjoint parts with prob(part) > 1 - delta, for a
/// probability that does not decrease when sites are added. Leftover sites
/// join the part whose smallest site is the nearest one below them.
PartitionResult partition_search(std::size_t n_sites, const std::function<double(SubsetMask)>& prob, double delta,
                                 bool parallel = true);

PartitionResult d_lm(const QuantumState& psi1, const QuantumState& psi2, double delta = 1e-2,
                     const DistinguishOptions& opts = {});

/// Exhaustive reference over all set partitions (Bell-number many); n <= 10.
std::size_t d_lm_bruteforce(std::size_t n_sites, const std::function<double(SubsetMask)>& prob, double delta);

}  // namespace nanomag
