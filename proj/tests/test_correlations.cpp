#include <doctest.h>

#include <numbers>
#include <random>

#include "nanomag/errors.hpp"
#include "nanomag/models.hpp"
#include "oracles.hpp"

using namespace nanomag;

namespace {

ClusterPtr mixed_cluster() {
  return std::make_shared<const SpinCluster>(
      "mixed", std::vector<SpinSite>{{0, HalfInt{2}, Sublattice::A, ""},
                                     {1, HalfInt{1}, Sublattice::B, ""},
                                     {2, HalfInt{3}, Sublattice::A, ""},
                                     {3, HalfInt{2}, Sublattice::B, ""},
                                     {4, HalfInt{1}, Sublattice::A, ""}});
}

ClusterPtr single(int two_s) {
  return std::make_shared<const SpinCluster>("one", std::vector<SpinSite>{{0, HalfInt{two_s}, Sublattice::A, ""}});
}

QuantumState basis_state(ClusterPtr c, HalfInt M, std::size_t idx = 0) {
  auto b = SectorBasis::enumerate(std::move(c), M);
  CVec a(b->dimension(), cplx{});
  a[idx] = 1.0;
  return make_state(b, std::move(a));
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

void check_trace_rule(const CorrelationData& d) {
  for (std::size_t i = 0; i < d.n_sites(); ++i) {
    const auto p = static_cast<Eigen::Index>(3 * i);
    const double tr = d.C(p, p) + d.C(p + 1, p + 1) + d.C(p + 2, p + 2);
    CHECK(tr == doctest::Approx(spin_casimir(d.cluster->site(i).s)).epsilon(1e-10));
  }
}

}  // namespace

TEST_CASE("single spin-1/2 states") {
  const auto up = basis_state(single(1), HalfInt{1});
  const auto dn = basis_state(single(1), HalfInt{-1});
  const auto d = correlations_of_state(up);
  CHECK(d.b[0] == 0.0);
  CHECK(d.b[1] == 0.0);
  CHECK(d.b[2] == doctest::Approx(0.5));
  CHECK(max_abs(d.C - 0.25 * Eigen::MatrixXd::Identity(3, 3)) < 1e-15);

  const auto s = correlations_of_superposition(Superposition(up, dn));
  CHECK(s.b[0] == doctest::Approx(0.5));
  CHECK(std::abs(s.b[1]) < 1e-15);
  CHECK(std::abs(s.b[2]) < 1e-15);
  CHECK(max_abs(s.C - 0.25 * Eigen::MatrixXd::Identity(3, 3)) < 1e-15);
}

TEST_CASE("singlet correlations are isotropic") {
  SpinModel m;
  m.cluster = std::make_shared<const SpinCluster>(
      "pair", std::vector<SpinSite>{{0, HalfInt{1}, Sublattice::A, ""}, {1, HalfInt{1}, Sublattice::B, ""}});
  m.exchange = {{0, 1, 1.0}};
  const auto g = ground_state_in_sector(m, HalfInt{0});
  const auto d = correlations_of_state(g);
  for (int a = 0; a < 3; ++a) CHECK(d.C(a, 3 + a) == doctest::Approx(-0.25));
}

TEST_CASE("ladder bookkeeping matches dense Kronecker products") {
  std::mt19937_64 rng(2024);
  const auto cl = mixed_cluster();
  const oracle::FullSpace fs(*cl);
  REQUIRE(fs.dim() <= 1024);
  const auto Ms = valid_magnetizations(*cl);
  for (const auto& M1 : Ms) {
    for (const auto& M2 : Ms) {
      if (M2 > M1) continue;
      auto b1 = SectorBasis::enumerate(cl, M1);
      auto b2 = SectorBasis::enumerate(cl, M2);
      auto p1 = oracle::random_state(b1, rng);
      auto p2 = oracle::random_state(b2, rng);
      if (M1 == M2) {
        if (b1->dimension() < 2) continue;
        // Gram-Schmidt against p1.
        cplx ov{};
        for (std::size_t r = 0; r < b1->dimension(); ++r) ov += std::conj(p1.amplitudes[r]) * p2.amplitudes[r];
        for (std::size_t r = 0; r < b1->dimension(); ++r) p2.amplitudes[r] -= ov * p1.amplitudes[r];
        p2 = make_state(b2, p2.amplitudes);
      }
      const auto terms = superposition_terms(p1, p2);
      Eigen::VectorXd b;
      Eigen::MatrixXd C;
      fs.correlations(fs.embed(p1), b, C);
      CHECK(max_abs(terms.comp1.C - C) < 1e-10);
      CHECK((terms.comp1.b - b).cwiseAbs().maxCoeff() < 1e-10);
      check_trace_rule(terms.comp1);
      for (std::size_t i = 0; i < cl->size(); ++i) {
        CHECK(terms.comp1.b[static_cast<Eigen::Index>(3 * i)] == 0.0);
        CHECK(terms.comp1.b[static_cast<Eigen::Index>(3 * i + 1)] == 0.0);
      }
      for (double phi : {0.0, 0.7, std::numbers::pi}) {
        const Eigen::VectorXcd v =
            (fs.embed(p1) + std::polar(1.0, phi) * fs.embed(p2)) / std::sqrt(2.0);
        fs.correlations(v, b, C);
        const auto d = terms.combine(phi);
        CHECK(max_abs(d.C - C) < 1e-10);
        CHECK((d.b - b).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(max_abs(d.C - d.C.transpose()) == 0.0);
        check_trace_rule(d);
      }
      const int dm = std::abs(M1.twice - M2.twice);
      if (dm > 2) CHECK(terms.b12.cwiseAbs().maxCoeff() == 0.0);
      if (dm > 4) CHECK(terms.C12.cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("Cr7Ni ground doublet: isotropic pair correlations") {
  const auto g = ground_state_in_sector(build_cr7ni(), HalfInt{1});
  const auto d = correlations_of_state(g);
  check_trace_rule(d);
  for (Eigen::Index i = 0; i < 8; ++i) {
    for (Eigen::Index j = 0; j < 8; ++j) {
      CHECK(std::abs(d.C(3 * i, 3 * j) - d.C(3 * i + 2, 3 * j + 2)) < 1e-8);
      CHECK(std::abs(d.C(3 * i + 1, 3 * j + 1) - d.C(3 * i + 2, 3 * j + 2)) < 1e-8);
    }
  }
}

TEST_CASE("distant sectors: superposition C is the component average") {
  const auto m = build_fe4();
  GroundStateOptions go;
  go.target_S = HalfInt{10};
  const auto p1 = ground_state_in_sector(m, HalfInt{10}, go);
  const auto p2 = ground_state_in_sector(m, HalfInt{-10}, go);
  const auto terms = superposition_terms(p1, p2);
  CHECK(terms.b12.cwiseAbs().maxCoeff() == 0.0);
  CHECK(terms.C12.cwiseAbs().maxCoeff() == 0.0);
  const auto d = terms.combine(0.0);
  CHECK(max_abs(d.C - 0.5 * (terms.comp1.C + terms.comp2.C)) < 1e-12);
  CHECK(d.b.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("same-sector components must be orthogonal") {
  const auto g = ground_state_in_sector(build_cr7ni(), HalfInt{1});
  CHECK_THROWS_AS(Superposition(g, g), InvalidInput);
}

TEST_CASE("staggered statistics of collinear states") {
  for (const auto& key : {"fe4", "cr7ni", "fe8", "mn6"}) {
    const auto cl = registry_entry(key).model.cluster;
    const auto [a, b] = psi_max_states(cl);
    const auto s = staggered_magnetization_stats(a);
    CHECK(s.variance == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.mean == doctest::Approx(cl->total_spin_max().value()));
    CHECK(staggered_magnetization_stats(b).mean == doctest::Approx(-cl->total_spin_max().value()));
  }
}

TEST_CASE("correlation CSV layout") {
  const auto up = basis_state(single(1), HalfInt{1});
  const std::string csv = correlations_csv(correlations_of_state(up));
  CHECK(csv.rfind("kind,i,a,j,b,value\n", 0) == 0);
  CHECK(csv.find("b,0,z,,,0.5\n") != std::string::npos);
  CHECK(csv.find("C,0,x,0,x,0.25\n") != std::string::npos);
}
