#include <doctest.h>

#include "nanomag/errors.hpp"
#include "nanomag/models.hpp"
#include "oracles.hpp"

using namespace nanomag;

namespace {

SolverOptions lanczos_only() {
  SolverOptions o;
  o.dense_threshold = 0;
  o.krylov_dim = 24;
  return o;
}

double residual(const SparseOperator& H, const CVec& v, double e) {
  CVec y(v.size());
  H.apply(v, y);
  double r = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) r += std::norm(y[i] - e * v[i]);
  return std::sqrt(r);
}

}  // namespace

TEST_CASE("2x2 diagonal operator") {
  std::vector<SpinSite> s{{0, HalfInt{1}, Sublattice::A, ""}, {1, HalfInt{1}, Sublattice::B, ""}};
  SpinModel m;
  m.cluster = std::make_shared<const SpinCluster>("pair", s);
  m.dm = {{0, 1, 0.0}};
  m.exchange = {{0, 1, 0.0}};
  auto b = SectorBasis::enumerate(m.cluster, HalfInt{0});
  // Hand-built diag(-1, 1).
  const SparseOperator D(b, b, {0, 1, 2}, {0, 1}, {-1.0, 1.0}, {}, true);
  const auto r = lowest_eigenpairs(D, 1);
  CHECK(r.values[0] == doctest::Approx(-1.0));
  CHECK(std::abs(r.vectors[0][0]) == doctest::Approx(1.0));
}

TEST_CASE("six-site ring: Lanczos matches the dense solver") {
  const auto hex = build_v15_effective().hexagon;
  auto b = SectorBasis::enumerate(hex.cluster, HalfInt{0});
  const auto H = build_exchange_hamiltonian(hex, b);
  SolverOptions o = lanczos_only();
  o.krylov_dim = 12;
  const auto lz = lowest_eigenpairs(H, 1, o);
  const auto dn = lowest_eigenpairs(H, 1);
  CHECK_FALSE(lz.dense);
  CHECK(dn.dense);
  CHECK(std::abs(lz.values[0] - dn.values[0]) < 1e-10);
}

TEST_CASE("dense and Lanczos agree on every registry sector up to 1500") {
  for (const auto& key : {"fe4", "cr7ni", "mn6_sA1", "mn6_sA3/2", "v15_triangle", "v15_hexagon"}) {
    const auto m = registry_entry(key).model;
    for (const auto& M : valid_magnetizations(*m.cluster)) {
      if (M.twice < 0) continue;
      auto b = SectorBasis::enumerate(m.cluster, M);
      if (b->dimension() > 1500 || b->dimension() < 40) continue;
      const auto H = build_exchange_hamiltonian(m, b);
      SolverOptions dense;
      dense.dense_threshold = 1500;
      const auto d = lowest_eigenpairs(H, 2, dense);
      const auto l = lowest_eigenpairs(H, 2, lanczos_only());
      const double scale = std::max(1.0, H.norm_bound());
      for (std::size_t k = 0; k < 2; ++k) {
        CHECK(std::abs(d.values[k] - l.values[k]) <= 1e-8 * scale);
        CHECK(residual(H, l.vectors[k], l.values[k]) <= 1e-8 * scale);
      }
      // Orthonormality of the Lanczos pair.
      cplx ov{};
      double n0 = 0.0;
      for (std::size_t i = 0; i < b->dimension(); ++i) {
        ov += std::conj(l.vectors[0][i]) * l.vectors[1][i];
        n0 += std::norm(l.vectors[0][i]);
      }
      CHECK(std::abs(ov) < 1e-8);
      CHECK(n0 == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("Fe4: S = 5 appears at the bottom of every sector |M| <= 5") {
  const auto m = build_fe4();
  GroundStateOptions go;
  go.target_S = HalfInt{10};
  const double e5 = ground_state_in_sector(m, HalfInt{10}, go).energy;
  for (int t = -10; t <= 10; t += 2) {
    const auto g = ground_state_in_sector(m, HalfInt{t}, go);
    CHECK(std::abs(g.energy - e5) <= 1e-6 * std::abs(e5));
    CHECK(g.s_squared == doctest::Approx(30.0).epsilon(1e-8));
  }
}

TEST_CASE("Cr7Ni ground doublet has S = 1/2") {
  const auto g = ground_state_in_sector(build_cr7ni(), HalfInt{1});
  CHECK(std::abs(g.s_squared - 0.75) < 1e-6);
  CHECK(g.basis->dimension() > 512);
}

TEST_CASE("states are normalized with a real non-negative anchor") {
  const auto g = ground_state_in_sector(build_cr7ni(), HalfInt{-1});
  double n = 0.0;
  for (const auto& a : g.amplitudes) n += std::norm(a);
  CHECK(n == doctest::Approx(1.0).epsilon(1e-12));
  const cplx a = g.amplitudes[g.phase_anchor];
  CHECK(a.imag() == 0.0);
  CHECK(a.real() >= 0.0);
  for (const auto& x : g.amplitudes) CHECK(std::abs(x) <= std::abs(a) * (1.0 + 1e-9));
}

TEST_CASE("degenerate sector ground states need a multiplet hint") {
  // Two decoupled spin-1/2: M = 0 hosts a singlet and a triplet at E = 0.
  std::vector<SpinSite> s{{0, HalfInt{1}, Sublattice::A, ""}, {1, HalfInt{1}, Sublattice::B, ""}};
  SpinModel m;
  m.cluster = std::make_shared<const SpinCluster>("free", s);
  m.exchange = {{0, 1, 0.0}};
  CHECK_THROWS_AS(ground_state_in_sector(m, HalfInt{0}), AmbiguousMultiplet);
  GroundStateOptions go;
  go.target_S = HalfInt{2};
  CHECK(ground_state_in_sector(m, HalfInt{0}, go).s_squared == doctest::Approx(2.0));
  go.target_S = HalfInt{0};
  CHECK(ground_state_in_sector(m, HalfInt{0}, go).s_squared == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("Lanczos reports non-convergence with its budget") {
  const auto m = build_cr7ni();
  auto b = SectorBasis::enumerate(m.cluster, HalfInt{1});
  const auto H = build_exchange_hamiltonian(m, b);
  SolverOptions o = lanczos_only();
  o.max_iter = 30;
  try {
    lowest_eigenpairs(H, 1, o);
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    CHECK(e.iterations() >= 30);
    CHECK(e.best_residual() > 0.0);
  }
}

TEST_CASE("tensor products of sector states") {
  const auto v = build_v15_effective();
  const auto [t1, t2] = v15_triangle_states(v, 1);
  const auto hex = ground_state_in_sector(v.hexagon, HalfInt{0});
  const auto full = tensor_product({t1, hex, hex}, v.full);
  CHECK(full.M() == t1.M());
  double n = 0.0;
  for (const auto& a : full.amplitudes) n += std::norm(a);
  CHECK(n == doctest::Approx(1.0));
  CHECK(full.s_squared == doctest::Approx(0.75));
}

TEST_CASE("Lanczos resolves an exactly degenerate ground pair") {
  // The four-fold symmetric Mn12 wiring gives a doubly degenerate bottom level
  // at M = 19; a single Krylov sequence sees only one of the two.
  const auto m = build_mn12(1);
  const auto b = SectorBasis::enumerate(m.cluster, HalfInt{38});
  const auto H = build_exchange_hamiltonian(m, b);
  const auto dense = lowest_eigenpairs(H, 3, SolverOptions{.dense_threshold = 4096});
  REQUIRE(dense.values[1] - dense.values[0] < 1e-9);
  const auto l = lowest_eigenpairs(H, 3, lanczos_only());
  for (std::size_t k = 0; k < 3; ++k) CHECK(l.values[k] == doctest::Approx(dense.values[k]).epsilon(1e-10));
  cplx ov{};
  for (std::size_t i = 0; i < b->dimension(); ++i) ov += std::conj(l.vectors[0][i]) * l.vectors[1][i];
  CHECK(std::abs(ov) < 1e-8);
}
