#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nanomag/correlations.hpp"

namespace nanomag {

struct DirectionField {
  std::vector<Eigen::Vector3d> n;

  /// The 3N vector (n_0x, n_0y, n_0z, n_1x, ...).
  Eigen::VectorXd stacked() const;
  static DirectionField from_stacked(const Eigen::VectorXd& v);
  /// +z on sublattice A, -z on sublattice B.
  static DirectionField staggered_z(const SpinCluster& cluster);
};

struct FisherOptions {
  double tol = 1e-12;
  std::size_t max_sweeps = 500;
  std::size_t random_starts = 8;
  std::uint64_t seed = 7;
  std::vector<DirectionField> extra_starts;
  /// Among (near-)degenerate maximizers prefer the one with the smallest mean
  /// component variance; needs both component covariances.
  const Eigen::MatrixXd* component_cov1 = nullptr;
  const Eigen::MatrixXd* component_cov2 = nullptr;
  double tie_rel_tol = 1e-6;
};

struct FisherResult {
  DirectionField field;
  double variance = 0.0;       // <X^2> - <X>^2
  double second_moment = 0.0;  // <X^2>
  double mean = 0.0;           // <X>
  double F = 0.0;              // 4 * variance
  double d_fi = 0.0;
  bool converged = false;
  std::size_t restarts_used = 0;
  std::size_t sweeps = 0;
  bool tie_break_applied = false;
};

/// n^T C n - (b.n)^2.
double variance_of_field(const CorrelationData& data, const DirectionField& field);

/// Fills the result fields for a given direction field.
FisherResult evaluate_field(const CorrelationData& data, const DirectionField& field);

/// Block-coordinate ascent over the per-site unit spheres with multiple starts.
FisherResult maximize_fisher(const CorrelationData& data, const FisherOptions& opts = {});

/// One ascent run from `start` on the quadratic form n^T K n. Returns the
/// final field; `values` receives the objective after every sweep.
DirectionField ascend(const Eigen::MatrixXd& K, DirectionField start, double tol, std::size_t max_sweeps,
                      std::vector<double>* values = nullptr, bool* converged = nullptr);

/// Exact maximizer of n^T Q n + 2 p^T n over the unit sphere. `incumbent`
/// decides ties when the problem is degenerate.
Eigen::Vector3d solve_site(const Eigen::Matrix3d& Q, const Eigen::Vector3d& p, const Eigen::Vector3d& incumbent);

/// 4 (sum_i s_i)^2.
double fisher_max(const SpinCluster& cluster);

/// Collinear product states: A up / B down and the reverse.
std::pair<QuantumState, QuantumState> psi_max_states(ClusterPtr cluster);

struct RfiResult {
  double value = 0.0;
  bool divergent = false;
  double v_psi = 0.0;
  double v_comp1 = 0.0;
  double v_comp2 = 0.0;
  /// Mean component size at the same field, (V1 + V2) / (2 sum s).
  double d_fi_components = 0.0;
};

/// Superposition variance over mean component variance, all at `field`.
RfiResult d_rfi(const CorrelationData& psi, const CorrelationData& comp1, const CorrelationData& comp2,
                const DirectionField& field);

/// |S_A = S_A^max, S_B = S_B^max, S = |S_A - S_B|, M = sign * S>, built from
/// the highest-weight recursion and the symmetric sublattice states.
QuantumState ideal_ferrimagnet_state(ClusterPtr cluster, int sign);

struct IdealSizes {
  HalfInt S;
  double d_fi = 0.0;
  double d_rfi = 0.0;
  bool d_rfi_divergent = false;
  /// N: every site can in principle discriminate on its own.
  int d_lm_bound = 0;
};

/// Closed-form sizes of the superposition of the two ideal states, measured
/// with the staggered magnetization.
IdealSizes ideal_ferrimagnet_sizes(const SpinCluster& cluster);

}  // namespace nanomag
