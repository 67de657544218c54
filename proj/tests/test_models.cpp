#include <doctest.h>

#include "nanomag/analysis.hpp"
#include "nanomag/errors.hpp"
#include "nanomag/models.hpp"

using namespace nanomag;

namespace {

double sector_ground_energy(const SpinModel& m, HalfInt M) {
  return ground_state_in_sector(m, M).energy;
}

}  // namespace

TEST_CASE("registry keys resolve and validate") {
  for (const auto& key : registry_keys()) {
    CAPTURE(key);
    if (is_closed_form_key(key)) {
      CHECK_THROWS_AS(registry_entry(key), InvalidInput);
      CHECK_NOTHROW(closed_form_sizes(key));
      continue;
    }
    const auto e = registry_entry(key);
    CHECK_NOTHROW(e.model.validate());
    CHECK(e.ground_S.twice >= 0);
    CHECK(e.ground_S <= e.model.cluster->total_spin_max());
    for (const auto& p : e.probe_subsets) CHECK((p.mask >> e.model.cluster->size()) == 0);
  }
  CHECK_THROWS_AS(registry_entry("nope"), InvalidInput);
}

TEST_CASE("cluster inventories") {
  const auto mn12 = build_mn12(1);
  CHECK(mn12.cluster->size() == 12);
  CHECK(mn12.cluster->sublattice_spin_max(Sublattice::A).twice == 32);
  CHECK(mn12.cluster->sublattice_spin_max(Sublattice::B).twice == 12);
  CHECK(build_fe8().cluster->sublattice_spin_max(Sublattice::A).twice == 30);
  CHECK(build_fe8().cluster->sublattice_spin_max(Sublattice::B).twice == 10);
  const auto cr = build_cr7ni().cluster;
  CHECK(cr->two_s(0) == 2);
  CHECK(cr->total_spin_max().twice == 23);
  const auto v = build_v15_effective();
  CHECK(v.full->size() == 15);
  CHECK(v.triangle.dm.size() == 3);
}

TEST_CASE("declared ground multiplets are the ground multiplets") {
  for (const auto& key : {"fe4", "cr7ni", "mn6_sA1", "mn6_sA3/2", "v15_hexagon", "v15_triangle"}) {
    CAPTURE(key);
    const auto e = registry_entry(key);
    const HalfInt S = e.ground_S;
    const HalfInt bottom{S.twice % 2};
    const double e0 = sector_ground_energy(e.model, bottom);
    const double eS = sector_ground_energy(e.model, S);
    CHECK(eS == doctest::Approx(e0).epsilon(1e-9));
    if (S + HalfInt{2} <= e.model.cluster->total_spin_max())
      CHECK(sector_ground_energy(e.model, S + HalfInt{2}) > e0 + 1e-6);
    if (e.model.dm.empty()) {
      const auto g = ground_state_in_sector(e.model, S);
      CHECK(g.s_squared == doctest::Approx(spin_casimir(S)).epsilon(1e-8));
    }
  }
}

TEST_CASE("Fe8 ground state in M = 10 has S = 10") {
  const auto g = ground_state_in_sector(build_fe8(), HalfInt{20});
  CHECK(g.s_squared == doctest::Approx(110.0).epsilon(1e-8));
}

TEST_CASE("scaling every coupling scales energies and keeps the state") {
  auto m = build_fe4();
  const auto g = ground_state_in_sector(m, HalfInt{10});
  for (auto& c : m.exchange) c.J *= 3.0;
  const auto h = ground_state_in_sector(m, HalfInt{10});
  CHECK(h.energy == doctest::Approx(3.0 * g.energy).epsilon(1e-10));
  CHECK(overlap(g, h) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("ideal-limit variant") {
  const auto v = ideal_limit_variant(build_fe8());
  CHECK(v.cluster->name() == "fe8_ideal");
  for (const auto& c : v.exchange) {
    const bool same = v.cluster->site(static_cast<std::size_t>(c.i)).sublattice ==
                      v.cluster->site(static_cast<std::size_t>(c.j)).sublattice;
    CHECK(c.J == (same ? -1000.0 : 1.0));
  }
  CHECK(ideal_limit_variant(build_v15_effective().triangle).dm.empty());
  // Strong ferromagnetic sublattices lock the ground state onto the ideal one.
  const auto g = ground_state_in_sector(v, HalfInt{20});
  CHECK(overlap(g, ideal_ferrimagnet_state(v.cluster, +1)) > 0.999);
}

TEST_CASE("V15 triangle states are chiral eigenstates") {
  const auto v = build_v15_effective();
  const auto [a, b] = v15_triangle_states(v, 1);
  CHECK(a.M() == HalfInt{-1});
  CHECK(b.M() == HalfInt{1});
  for (const auto* s : {&a, &b}) {
    const Eigen::MatrixXcd C = triangle_chirality(s->basis);
    const Eigen::MatrixXcd H = build_exchange_hamiltonian(v.triangle, s->basis).to_dense();
    CHECK((C * H - H * C).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::Map<const Eigen::VectorXcd> x(s->amplitudes.data(), static_cast<Eigen::Index>(s->amplitudes.size()));
    const cplx chi = x.dot(C * x);
    CHECK(std::abs(chi.real()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((C * x - chi * x).norm() < 1e-12);
    const cplx e = x.dot(H * x);
    CHECK((H * x - e * x).norm() < 1e-12);
    CHECK(s->s_squared == doctest::Approx(0.75).epsilon(1e-12));
  }
  const auto [p, q] = v15_triangle_states(v, 2);
  CHECK(p.s_squared == doctest::Approx(3.75));
  CHECK(p.M() == HalfInt{3});
  CHECK(q.M() == HalfInt{-3});
}

TEST_CASE("V15 layers add up") {
  const auto v = build_v15_effective();
  const auto [a, b] = v15_composite_states(v, 1);
  const auto data = superposition_terms(a, b).combine(0.0);
  const SubsetMask tri_mask = mask_of({0, 1, 2});
  const SubsetMask h1_mask = mask_of({3, 4, 5, 6, 7, 8});
  const SubsetMask h2_mask = mask_of({9, 10, 11, 12, 13, 14});
  const auto ref = v15_reference_field();
  // Dense 8x8 evaluation with the same component phases (numpy).
  CHECK(subset_variance(data, ref, tri_mask) == doctest::Approx(1.375).epsilon(1e-12));

  FisherOptions fo;
  fo.extra_starts = {ref};
  const auto best = maximize_fisher(data, fo);
  const double tri = subset_variance(data, best.field, tri_mask);
  const double h1 = subset_variance(data, best.field, h1_mask);
  const double h2 = subset_variance(data, best.field, h2_mask);
  CHECK(tri == doctest::Approx(1.75).epsilon(1e-9));
  CHECK(h1 == doctest::Approx(h2).epsilon(1e-8));
  CHECK(tri + h1 + h2 == doctest::Approx(best.variance).epsilon(1e-10));
}

TEST_CASE("closed forms") {
  const auto mn10 = closed_form_sizes("mn10");
  CHECK(mn10.S == 23.0);
  CHECK(mn10.d_fi == 23.0);
  CHECK(mn10.d_lm == 10);
  const auto tb = closed_form_sizes("tb");
  CHECK(tb.S == 6.0);
  CHECK(tb.d_fi == 6.0);
  CHECK(tb.d_lm == 1);
  CHECK(tb.d_rfi_divergent);
  CHECK_THROWS_AS(closed_form_sizes("fe8"), InvalidInput);
}

TEST_CASE("ferromagnet closed form matches the pipeline") {
  const auto f = ferromagnet_sizes(3, HalfInt{2});
  CHECK(f.S == 3.0);
  CHECK(f.d_lm == 3);
  std::vector<SpinSite> sites;
  for (int i = 0; i < 3; ++i) sites.push_back({i, HalfInt{2}, Sublattice::A, ""});
  const auto cl = std::make_shared<const SpinCluster>("fm3", sites);
  const auto [a, b] = psi_max_states(cl);
  const auto terms = superposition_terms(a, b);
  const auto data = terms.combine(0.0);
  const auto field = DirectionField::staggered_z(*cl);
  CHECK(evaluate_field(data, field).d_fi == doctest::Approx(f.d_fi));
  CHECK(maximize_fisher(data).d_fi == doctest::Approx(f.d_fi));
  CHECK(d_rfi(data, terms.comp1, terms.comp2, field).divergent);
  CHECK(static_cast<int>(d_lm(a, b).n_parts) == f.d_lm);
}
