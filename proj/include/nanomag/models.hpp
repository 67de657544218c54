#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nanomag/distinguishability.hpp"
#include "nanomag/fisher.hpp"
#include "nanomag/hamiltonian.hpp"

namespace nanomag {

SpinModel build_mn12(int set);
SpinModel build_fe8();
/// Alternating ring of six s_A and six s = 1/2 spins; A sites first.
SpinModel build_mn6_family(HalfInt s_A);
SpinModel build_fe4();
SpinModel build_cr7ni();

/// Keeps the bond graph; bonds inside a sublattice get j_intra, bonds across
/// get j_inter.
SpinModel ideal_limit_variant(const SpinModel& model, double j_intra = -1000.0, double j_inter = 1.0);

/// Three-layer effective V15 model: triangle sites 0..2, hexagons 3..8 and 9..14.
struct V15Model {
  SpinModel triangle;  // J s.s + Dz z.(s x s) on the triangle
  SpinModel hexagon;   // uniform antiferromagnetic ring
  ClusterPtr full;     // the 15-site cluster the composite states live on
};
V15Model build_v15_effective(double J = 1.0, double Dz = 0.1, double J_hex = 1.0);

/// The triangle states of the two V15 superpositions, M1 first.
/// kind 1: S_T = 1/2 chirality doublet; kind 2: S_T = 3/2 polarized pair.
std::pair<QuantumState, QuantumState> v15_triangle_states(const V15Model& v15, int kind);

/// Embeds triangle states with both hexagons in their singlet ground state.
std::pair<QuantumState, QuantumState> v15_composite_states(const V15Model& v15, int kind,
                                                           const SolverOptions& solver = {});

/// (4 / sqrt 3) s1.(s2 x s3) on a three-site sector.
Eigen::MatrixXcd triangle_chirality(const BasisPtr& basis);

/// Counter-rotating in-plane triangle field with staggered hexagons. Optimal
/// for one relative phase of the doublet; otherwise a start for the ascent.
DirectionField v15_reference_field();

struct ClosedFormSizes {
  std::string key;
  double S = 0.0;
  int n_spins = 0;
  double d_fi = 0.0;
  int d_lm = 0;
  bool d_rfi_divergent = true;
};

/// Ferromagnetic limits: mn10 (S = 23, N = 10) and tb (J = 6, single ion).
ClosedFormSizes closed_form_sizes(const std::string& key);
/// Generic ferromagnet of n spins s.
ClosedFormSizes ferromagnet_sizes(int n_spins, HalfInt s);

struct NamedSubset {
  std::string id;
  SubsetMask mask;
};

struct RegistryEntry {
  std::string key;
  SpinModel model;
  HalfInt ground_S;
  std::string notes;
  std::vector<NamedSubset> probe_subsets;
};

std::vector<std::string> registry_keys();
bool is_closed_form_key(const std::string& key);
RegistryEntry registry_entry(const std::string& key);

}  // namespace nanomag
