#include "nanomag/models.hpp"

#include <cmath>
#include <numbers>

#include "nanomag/errors.hpp"

namespace nanomag {

namespace {

SpinSite site(int index, HalfInt s, Sublattice sub, std::string label) {
  return SpinSite{index, s, sub, std::move(label)};
}

const HalfInt kHalf{1};
const HalfInt kOne{2};
const HalfInt kThreeHalves{3};
const HalfInt kTwo{4};
const HalfInt kFiveHalves{5};

}  // namespace

SpinModel build_mn12(int set) {
  double JA = 0.0;
  double JB = 0.0;
  double JAB = 0.0;
  double JpAB = 0.0;
  std::string source;
  if (set == 1) {
    JA = -64.5;
    JB = 85.0;
    JAB = 215.0;
    JpAB = 85.0;
    source = "Raghu et al., PRB 64, 064419 (2001)";
  } else if (set == 2) {
    JA = 6.0;
    JB = 8.0;
    JAB = 67.0;
    JpAB = 62.0;
    source = "Chaboussant et al., EPL 66, 423 (2004)";
  } else {
    throw InvalidInput("Mn12 coupling set must be 1 or 2");
  }
  std::vector<SpinSite> sites;
  for (int i = 0; i < 8; ++i) sites.push_back(site(i, kTwo, Sublattice::A, "Mn3+ A" + std::to_string(i + 1)));
  for (int i = 0; i < 4; ++i) sites.push_back(site(8 + i, kThreeHalves, Sublattice::B, "Mn4+ B" + std::to_string(i + 1)));

  SpinModel m;
  m.cluster = std::make_shared<const SpinCluster>("mn12_set" + std::to_string(set), std::move(sites));
  for (int i = 0; i < 8; ++i) m.exchange.push_back({i, (i + 1) % 8, JA});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < i; ++j) m.exchange.push_back({8 + i, 8 + j, JB});
  for (int i = 0; i < 4; ++i) {
    // A_{2i-1} - B_i, A_{2i} - (B_i + B_{i+1}) in 1-based labels.
    m.exchange.push_back({2 * i, 8 + i, JAB});
    m.exchange.push_back({2 * i + 1, 8 + i, JpAB});
    m.exchange.push_back({2 * i + 1, 8 + (i + 1) % 4, JpAB});
  }
  m.source = source;
  return m;
}

SpinModel build_fe8() {
  std::vector<SpinSite> sites;
  for (int i = 0; i < 6; ++i) sites.push_back(site(i, kFiveHalves, Sublattice::A, "Fe3+ A" + std::to_string(i + 1)));
  for (int i = 0; i < 2; ++i) sites.push_back(site(6 + i, kFiveHalves, Sublattice::B, "Fe3+ B" + std::to_string(i + 1)));
  SpinModel m;
  m.cluster = std::make_shared<const SpinCluster>("fe8", std::move(sites));
  const double JA = 26.0;
  const double JpA = 36.0;
  const double JAB = 200.0;
  const double JpAB = 59.0;
  // A5 (4), A6 (5) are the central A spins; B1 (6), B2 (7).
  m.exchange = {
      {4, 0, JA},   {4, 1, JA},   {5, 2, JA},   {5, 3, JA},   {4, 5, JpA},
      {4, 6, JAB},  {4, 7, JAB},  {5, 6, JAB},  {5, 7, JAB},
      {7, 1, JpAB}, {7, 2, JpAB}, {6, 0, JpAB}, {6, 3, JpAB},
  };
  m.source = "Barra et al., EPL 35, 133 (1996)";
  return m;
}

SpinModel build_mn6_family(HalfInt s_A) {
  if (s_A.twice < 1) throw InvalidInput("s_A must be positive");
  std::vector<SpinSite> sites;
  for (int i = 0; i < 6; ++i) sites.push_back(site(i, s_A, Sublattice::A, "A" + std::to_string(i + 1)));
  for (int i = 0; i < 6; ++i) sites.push_back(site(6 + i, kHalf, Sublattice::B, "radical B" + std::to_string(i + 1)));
  SpinModel m;
  m.cluster = std::make_shared<const SpinCluster>("mn6_sA=" + s_A.str(), std::move(sites));
  for (int i = 0; i < 6; ++i) {
    m.exchange.push_back({i, 6 + i, 1.0});
    m.exchange.push_back({i, 6 + (i + 1) % 6, 1.0});
  }
  m.source = "alternating ring, single coupling J_AB = 1 K (Caneschi et al. 1988 for s_A = 5/2)";
  return m;
}

SpinModel build_fe4() {
  std::vector<SpinSite> sites;
  for (int i = 0; i < 3; ++i) sites.push_back(site(i, kFiveHalves, Sublattice::A, "Fe3+ outer" + std::to_string(i + 1)));
  sites.push_back(site(3, kFiveHalves, Sublattice::B, "Fe3+ central"));
  SpinModel m;
  m.cluster = std::make_shared<const SpinCluster>("fe4", std::move(sites));
  for (int i = 0; i < 3; ++i) m.exchange.push_back({i, 3, 1.0});
  m.source = "star, single coupling J_AB = 1 K (Cornia et al. 2004)";
  return m;
}

SpinModel build_cr7ni() {
  std::vector<SpinSite> sites;
  for (int i = 0; i < 8; ++i) {
    const Sublattice sub = i % 2 == 0 ? Sublattice::B : Sublattice::A;
    if (i == 0) {
      sites.push_back(site(i, kOne, sub, "Ni2+"));
    } else {
      sites.push_back(site(i, kThreeHalves, sub, "Cr3+ " + std::to_string(i)));
    }
  }
  SpinModel m;
  m.cluster = std::make_shared<const SpinCluster>("cr7ni", std::move(sites));
  for (int i = 0; i < 8; ++i) m.exchange.push_back({i, (i + 1) % 8, 1.0});
  m.source = "nearest-neighbour ring, single coupling J = 1 K (Ardavan et al. 2007)";
  return m;
}

SpinModel ideal_limit_variant(const SpinModel& model, double j_intra, double j_inter) {
  SpinModel v = model;
  const auto& cl = *model.cluster;
  for (auto& c : v.exchange) {
    const bool same = cl.site(static_cast<std::size_t>(c.i)).sublattice == cl.site(static_cast<std::size_t>(c.j)).sublattice;
    c.J = same ? j_intra : j_inter;
  }
  v.dm.clear();
  v.cluster = std::make_shared<const SpinCluster>(cl.name() + "_ideal", cl.sites());
  v.source = model.source + "; couplings replaced by J_intra = " + std::to_string(j_intra) +
             " K, J_inter = " + std::to_string(j_inter) + " K";
  return v;
}

V15Model build_v15_effective(double J, double Dz, double J_hex) {
  V15Model v;
  {
    std::vector<SpinSite> sites;
    for (int i = 0; i < 3; ++i) sites.push_back(site(i, kHalf, Sublattice::A, "V T" + std::to_string(i + 1)));
    v.triangle.cluster = std::make_shared<const SpinCluster>("v15_triangle", std::move(sites));
    for (int i = 0; i < 3; ++i) {
      v.triangle.exchange.push_back({i, (i + 1) % 3, J});
      v.triangle.dm.push_back({i, (i + 1) % 3, Dz});
    }
    v.triangle.source = "effective triangle model (Bertaina et al. 2008)";
  }
  auto hex_sites = [](int offset, const std::string& tag) {
    std::vector<SpinSite> sites;
    for (int k = 0; k < 6; ++k) {
      // n_i = (-1)^i z with i = k + 1.
      const Sublattice sub = k % 2 == 0 ? Sublattice::B : Sublattice::A;
      sites.push_back(site(offset + k, kHalf, sub, "V " + tag + std::to_string(k + 1)));
    }
    return sites;
  };
  {
    v.hexagon.cluster = std::make_shared<const SpinCluster>("v15_hexagon", hex_sites(0, "H"));
    for (int k = 0; k < 6; ++k) v.hexagon.exchange.push_back({k, (k + 1) % 6, J_hex});
    v.hexagon.source = "uniform antiferromagnetic ring standing in for the hexagon layers";
  }
  {
    std::vector<SpinSite> sites = v.triangle.cluster->sites();
    for (auto& s : hex_sites(3, "H1-")) sites.push_back(s);
    for (auto& s : hex_sites(9, "H2-")) sites.push_back(s);
    v.full = std::make_shared<const SpinCluster>("v15", std::move(sites));
  }
  return v;
}

Eigen::MatrixXcd triangle_chirality(const BasisPtr& basis) {
  if (basis->n_sites() != 3) throw InvalidInput("chirality needs a three-site cluster");
  for (std::size_t i = 0; i < 3; ++i)
    if (basis->cluster().two_s(i) != 1) throw InvalidInput("chirality is defined here for spin-1/2 triangles");
  const cplx I{0.0, 1.0};
  Eigen::Matrix2cd sx;
  Eigen::Matrix2cd sy;
  Eigen::Matrix2cd sz;
  // Basis order (up, down), matching deviation 0, 1.
  sx << 0.0, 0.5, 0.5, 0.0;
  sy << 0.0, -0.5 * I, 0.5 * I, 0.0;
  sz << 0.5, 0.0, 0.0, -0.5;
  auto kron3 = [](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b, const Eigen::Matrix2cd& c) {
    Eigen::MatrixXcd out(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) out(i, j) = a(i >> 2, j >> 2) * b((i >> 1) & 1, (j >> 1) & 1) * c(i & 1, j & 1);
    return out;
  };
  const std::array<Eigen::Matrix2cd, 3> s{sx, sy, sz};
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(8, 8);
  // s1.(s2 x s3) = sum over cyclic (a, b, c) of s1a (s2b s3c - s2c s3b).
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    C += kron3(s[a], s[b], s[c]) - kron3(s[a], s[c], s[b]);
  }
  C *= 4.0 / std::sqrt(3.0);
  const auto d = static_cast<Eigen::Index>(basis->dimension());
  Eigen::MatrixXcd out(d, d);
  auto full = [&](Eigen::Index idx) {
    const auto dev = basis->deviations(static_cast<std::size_t>(idx));
    return (dev[0] << 2) | (dev[1] << 1) | dev[2];
  };
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) out(r, c) = C(full(r), full(c));
  return out;
}

std::pair<QuantumState, QuantumState> v15_triangle_states(const V15Model& v15, int kind) {
  const auto cl = v15.triangle.cluster;
  auto make = [&](HalfInt M, const std::vector<std::pair<std::array<std::uint8_t, 3>, cplx>>& terms) {
    auto basis = SectorBasis::enumerate(cl, M);
    CVec amps(basis->dimension(), cplx{});
    for (const auto& [dev, a] : terms) amps[basis->index_of(dev)] += a;
    return make_state(basis, std::move(amps));
  };
  constexpr std::uint8_t u = 0;
  constexpr std::uint8_t d = 1;
  if (kind == 1) {
    const cplx w = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
    auto p1 = make(HalfInt{-1}, {{{u, d, d}, 1.0}, {{d, u, d}, w}, {{d, d, u}, std::conj(w)}});
    auto p2 = make(HalfInt{1}, {{{d, u, u}, 1.0}, {{u, d, u}, w}, {{u, u, d}, std::conj(w)}});
    return {std::move(p1), std::move(p2)};
  }
  if (kind == 2) {
    auto p1 = make(HalfInt{3}, {{{u, u, u}, 1.0}});
    auto p2 = make(HalfInt{-3}, {{{d, d, d}, 1.0}});
    return {std::move(p1), std::move(p2)};
  }
  throw InvalidInput("V15 superposition kind must be 1 or 2");
}

std::pair<QuantumState, QuantumState> v15_composite_states(const V15Model& v15, int kind, const SolverOptions& solver) {
  auto [t1, t2] = v15_triangle_states(v15, kind);
  GroundStateOptions go;
  go.solver = solver;
  const QuantumState hex = ground_state_in_sector(v15.hexagon, HalfInt{0}, go);
  return {tensor_product({t1, hex, hex}, v15.full), tensor_product({t2, hex, hex}, v15.full)};
}

DirectionField v15_reference_field() {
  DirectionField f;
  for (int i = 1; i <= 3; ++i) {
    const double a = 2.0 * std::numbers::pi * i / 3.0;
    f.n.emplace_back(0.0, std::cos(a), std::sin(a));
  }
  for (int h = 0; h < 2; ++h)
    for (int i = 1; i <= 6; ++i) f.n.emplace_back(0.0, 0.0, i % 2 == 0 ? 1.0 : -1.0);
  return f;
}

ClosedFormSizes ferromagnet_sizes(int n_spins, HalfInt s) {
  ClosedFormSizes c;
  c.key = "ferromagnet";
  c.n_spins = n_spins;
  c.S = n_spins * s.value();
  // The two components are |S, +-S>: the staggered field is uniform, the
  // variance is S^2 and the normalization is sum s_i = S.
  c.d_fi = c.S;
  c.d_lm = n_spins;
  c.d_rfi_divergent = true;
  return c;
}

ClosedFormSizes closed_form_sizes(const std::string& key) {
  if (key == "mn10") {
    // Ten Mn ions adding up to S = 23.
    ClosedFormSizes c;
    c.key = key;
    c.S = 23.0;
    c.n_spins = 10;
    c.d_fi = 23.0;
    c.d_lm = 10;
    return c;
  }
  if (key == "tb") {
    ClosedFormSizes c = ferromagnet_sizes(1, HalfInt::from_int(6));
    c.key = key;
    return c;
  }
  throw InvalidInput("no closed form for '" + key + "' (known: mn10, tb)");
}

std::vector<std::string> registry_keys() {
  return {"mn12_set1", "mn12_set2", "fe8", "mn6", "mn6_sA1", "mn6_sA3/2", "mn6_sA2", "fe4", "cr7ni", "v15_triangle",
          "v15_hexagon", "mn10", "tb"};
}

bool is_closed_form_key(const std::string& key) { return key == "mn10" || key == "tb"; }

RegistryEntry registry_entry(const std::string& key) {
  RegistryEntry e;
  e.key = key;
  if (key == "mn12_set1" || key == "mn12_set2") {
    e.model = build_mn12(key == "mn12_set1" ? 1 : 2);
    e.ground_S = HalfInt::from_int(10);
    e.probe_subsets = {{"A1", mask_of({0})}, {"A2", mask_of({1})}, {"B1", mask_of({8})}, {"A1+B1", mask_of({0, 8})}};
  } else if (key == "fe8") {
    e.model = build_fe8();
    e.ground_S = HalfInt::from_int(10);
    e.probe_subsets = {{"A5", mask_of({4})}, {"B1", mask_of({6})}, {"A1", mask_of({0})}, {"core", mask_of({4, 5, 6, 7})}};
  } else if (key == "mn6" || key.rfind("mn6_sA", 0) == 0) {
    const HalfInt sA = key == "mn6" ? kFiveHalves : HalfInt::parse(key.substr(6));
    e.model = build_mn6_family(sA);
    e.ground_S = HalfInt{6 * (sA.twice - 1)};
    e.probe_subsets = {{"A1", mask_of({0})}, {"B1", mask_of({6})}, {"A1+B1", mask_of({0, 6})}};
  } else if (key == "fe4") {
    e.model = build_fe4();
    e.ground_S = HalfInt::from_int(5);
    e.probe_subsets = {{"A1", mask_of({0})}, {"B1", mask_of({3})}};
  } else if (key == "cr7ni") {
    e.model = build_cr7ni();
    e.ground_S = kHalf;
    e.probe_subsets = {{"Ni", mask_of({0})}, {"Cr1", mask_of({1})}, {"half", mask_of({0, 1, 2, 3})}};
  } else if (key == "v15_triangle") {
    e.model = build_v15_effective().triangle;
    e.ground_S = kHalf;
  } else if (key == "v15_hexagon") {
    e.model = build_v15_effective().hexagon;
    e.ground_S = HalfInt{0};
  } else if (is_closed_form_key(key)) {
    throw InvalidInput("'" + key + "' is a closed-form entry; use closed_form_sizes");
  } else {
    throw InvalidInput("unknown model '" + key + "'");
  }
  e.notes = e.model.source;
  return e;
}

}  // namespace nanomag
