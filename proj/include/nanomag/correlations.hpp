#pragma once

#include <string>

#include <Eigen/Dense>

#include "nanomag/eigensolver.hpp"

namespace nanomag {

/// (|psi1> + e^{i phase} |psi2>)/sqrt(2).
class Superposition {
 public:
  Superposition(QuantumState psi1, QuantumState psi2, double relative_phase = 0.0);

  const QuantumState& psi1() const { return psi1_; }
  const QuantumState& psi2() const { return psi2_; }
  double relative_phase() const { return phase_; }
  const SpinCluster& cluster() const { return psi1_.basis->cluster(); }

 private:
  QuantumState psi1_;
  QuantumState psi2_;
  double phase_;
};

/// One-spin expectations b[3i + a] and the symmetrized two-spin matrix
/// C[3i + a, 3j + b] = Re <(s_ia s_jb + s_jb s_ia)/2>, a, b in {x, y, z}.
struct CorrelationData {
  ClusterPtr cluster;
  Eigen::VectorXd b;
  Eigen::MatrixXd C;
  std::string subject;

  std::size_t n_sites() const { return cluster->size(); }
  /// C - b b^T, the covariance matrix whose quadratic form is the variance.
  Eigen::MatrixXd covariance() const { return C - b * b.transpose(); }
};

CorrelationData correlations_of_state(const QuantumState& psi);

/// Correlations of both components and the cross terms, from which the
/// superposition can be assembled for any relative phase.
struct SuperpositionTerms {
  CorrelationData comp1;
  CorrelationData comp2;
  Eigen::VectorXcd b12;  // <psi1|s_ia|psi2>
  Eigen::MatrixXcd C12;  // <psi1|(s_ia s_jb + s_jb s_ia)/2|psi2>

  CorrelationData combine(double phase) const;
};

SuperpositionTerms superposition_terms(const QuantumState& psi1, const QuantumState& psi2);

CorrelationData correlations_of_superposition(const Superposition& sup);

struct StaggeredStats {
  double mean = 0.0;
  double variance = 0.0;
};

/// Moments of S_z^A - S_z^B.
StaggeredStats staggered_magnetization_stats(const CorrelationData& data);
StaggeredStats staggered_magnetization_stats(const QuantumState& psi);

/// Rows "i,a,j,b,C" plus "i,a,b" for the one-spin vector, as CSV text.
std::string correlations_csv(const CorrelationData& data);

}  // namespace nanomag
