#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nanomag/hamiltonian.hpp"

namespace nanomag {

struct SolverOptions {
  /// Residual tolerance relative to the operator norm bound.
  double tol = 1e-10;
  /// Budget in matrix-vector products.
  std::size_t max_iter = 20000;
  /// Krylov subspace size between restarts (0 picks a default from k).
  std::size_t krylov_dim = 0;
  /// Sectors up to this size are diagonalized densely.
  std::size_t dense_threshold = 512;
  /// Relative gap below which two eigenvalues count as degenerate.
  double degeneracy_tol = 1e-7;
  std::uint64_t seed = 20140101;
};

struct EigenResult {
  std::vector<double> values;
  std::vector<CVec> vectors;
  std::vector<double> residuals;
  std::size_t matvecs = 0;
  std::size_t restarts = 0;
  bool dense = false;
};

/// k lowest eigenpairs of a Hermitian sector operator, ascending.
EigenResult lowest_eigenpairs(const SparseOperator& H, std::size_t k, const SolverOptions& opts = {});

struct QuantumState {
  BasisPtr basis;
  CVec amplitudes;
  double energy = 0.0;
  double s_squared = 0.0;
  std::size_t phase_anchor = 0;

  HalfInt M() const { return basis->magnetization(); }
  /// S solving S(S+1) = s_squared.
  double effective_S() const;
};

/// Normalizes, fixes the global phase and attaches <S^2>.
QuantumState make_state(BasisPtr basis, CVec amplitudes, double energy = 0.0);

/// Index of the largest-magnitude amplitude; near-ties (relative 1e-9) go to
/// the lowest index.
std::size_t phase_anchor_index(std::span<const cplx> amps);

struct GroundStateOptions {
  SolverOptions solver;
  /// Requested multiplet; used to pick among degenerate sector ground states.
  std::optional<HalfInt> target_S;
  BasisLimits limits;
};

QuantumState ground_state_in_sector(const SpinModel& model, HalfInt M, const GroundStateOptions& opts = {});

/// Ground state of a sector for a Hamiltonian that is already built.
QuantumState ground_state(const SparseOperator& H, const GroundStateOptions& opts = {});

/// Product of states living on consecutive blocks of `combined` (parts in site
/// order). Sublattice labels and spins must agree site by site.
QuantumState tensor_product(const std::vector<QuantumState>& parts, ClusterPtr combined);

/// |<a|b>|, zero across different sectors.
double overlap(const QuantumState& a, const QuantumState& b);

}  // namespace nanomag
