// Acceptance run: one PASS/FAIL line per criterion, details indented above it.
// Exit status 0 only when every selected criterion passes.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nanomag/analysis.hpp"
#include "nanomag/errors.hpp"
#include "oracles.hpp"

using namespace nanomag;

namespace {

class Criterion {
 public:
  Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {}

  void check(bool ok, const std::string& what) {
    ++total_;
    if (ok) ++passed_;
    std::printf("  [%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
  }
  void note(const std::string& what) { std::printf("  [info] %s\n", what.c_str()); }

  void cell(const TableCell& c) {
    char buf[256];
    const char* rel = "";
    char relbuf[48];
    if (!c.divergent && std::isfinite(c.paper) && c.paper != 0.0 && c.check == Check::relative) {
      std::snprintf(relbuf, sizeof relbuf, " (%+.2f%%, tol %.1f%%)", 100.0 * (c.computed - c.paper) / std::abs(c.paper),
                    100.0 * c.tolerance);
      rel = relbuf;
    }
    if (c.divergent) {
      std::snprintf(buf, sizeof buf, "%s %s = inf, paper %g", c.column.c_str(), c.measure.c_str(), c.paper);
    } else {
      std::snprintf(buf, sizeof buf, "%s %s = %.6g, paper %g%s", c.column.c_str(), c.measure.c_str(), c.computed,
                    c.paper, rel);
    }
    if (c.check == Check::info) {
      note(buf);
    } else {
      check(cell_passes(c), buf);
    }
  }

  bool finish(double seconds) const {
    const bool ok = total_ > 0 && passed_ == total_;
    std::printf("%s criterion %d: %s (%d/%d checks, %.1f s)\n", ok ? "PASS" : "FAIL", id_, title_.c_str(), passed_,
                total_, seconds);
    std::fflush(stdout);
    return ok;
  }

 private:
  int id_;
  std::string title_;
  int passed_ = 0;
  int total_ = 0;
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

bool rel_ok(double x, double ref, double tol) { return std::abs(x - ref) <= tol * std::abs(ref); }

struct Table {
  std::vector<TableCell> cells;
  std::map<std::string, AnalysisReport> reports;
};

void table_cells(Criterion& c, const Table& t, const std::set<std::string>& columns) {
  for (const auto& cell : t.cells)
    if (columns.count(cell.column)) c.cell(cell);
}

std::pair<QuantumState, QuantumState> doublet(const SpinModel& m, HalfInt S) {
  GroundStateOptions go;
  go.target_S = S;
  return {ground_state_in_sector(m, S, go), ground_state_in_sector(m, -S, go)};
}

// ---------------------------------------------------------------------------

void criterion1(Criterion& c, const Table& t) {
  table_cells(c, t, {"Cr7Ni", "Fe4(1)", "Fe4(2)", "Fe4(2)-optimized", "V15(1)", "V15(2)", "Mn10", "Tb"});
}

void criterion2(Criterion& c, const Table& t) {
  table_cells(c, t, {"Mn6"});
  const auto e = registry_entry("mn6");
  const auto g = ground_state_in_sector(e.model, e.ground_S);
  const auto ps = partial_spin_sums(correlations_of_state(g));
  c.check(rel_ok(ps.S_A, 14.7, 0.01), fmt("<S_A> = %.4f, paper 14.7 (tol 1%%)", ps.S_A));
  c.check(rel_ok(ps.S_B, 2.68, 0.01), fmt("<S_B> = %.4f, paper 2.68 (tol 1%%)", ps.S_B));

  AnalysisConfig cfg;
  const auto ring = ring_scaling({HalfInt{2}, HalfInt{3}, HalfInt{4}, HalfInt{5}}, cfg);
  for (const auto& p : ring.points)
    c.note("s_A = " + p.s_A.str() + ": D_FI " + fmt("%.4f, D_RFI %.4f", p.d_fi, p.d_rfi));
  c.check(ring.lin_rel_rms < 0.05, fmt("D_FI vs s_A linear fit relative RMS = %.4f (< 0.05)", ring.lin_rel_rms));
  c.check(ring.ratio_spread <= 2.0,
          fmt("D_RFI successive ratios max/min = %.4f (<= 2)", ring.ratio_spread));
}

void criterion3(Criterion& c, const Table& t) {
  table_cells(c, t, {"Fe8"});
  const auto e = registry_entry("fe8");
  const auto [a, b] = doublet(e.model, e.ground_S);
  const double p = discrimination_probability(a, b, mask_of({4, 5, 6, 7}));
  c.check(p > 0.99, fmt("central core {A5, A6, B1, B2}: P = %.6f (> 0.99)", p));
}

void criterion4(Criterion& c, const Table& t) { table_cells(c, t, {"Mn12(1)", "Mn12(2)"}); }

// ---------------------------------------------------------------------------

std::vector<SpinModel> property_models() {
  std::vector<SpinModel> out;
  for (const auto& k : registry_keys())
    if (!is_closed_form_key(k)) out.push_back(registry_entry(k).model);
  return out;
}

ClusterPtr mixed_cluster() {
  return std::make_shared<const SpinCluster>(
      "mixed", std::vector<SpinSite>{{0, HalfInt{2}, Sublattice::A, ""},
                                     {1, HalfInt{1}, Sublattice::B, ""},
                                     {2, HalfInt{3}, Sublattice::A, ""},
                                     {3, HalfInt{2}, Sublattice::B, ""},
                                     {4, HalfInt{1}, Sublattice::A, ""}});
}

void operators_vs_dense(Criterion& c) {
  SpinModel mixed;
  mixed.cluster = mixed_cluster();
  mixed.exchange = {{0, 1, 1.3}, {1, 2, -0.7}, {2, 3, 2.1}, {3, 4, 0.4}, {0, 4, 0.9}};
  mixed.dm = {{0, 2, 0.3}, {1, 3, -0.2}};
  std::vector<SpinModel> models{mixed};
  for (auto& m : property_models())
    if (m.cluster->total_dimension() <= 4096) models.push_back(m);
  double worst = 0.0;
  std::size_t sectors = 0;
  for (const auto& m : models) {
    const oracle::FullSpace fs(*m.cluster);
    const Eigen::MatrixXcd Hf = fs.hamiltonian(m);
    for (const auto& M : valid_magnetizations(*m.cluster)) {
      auto b = SectorBasis::enumerate(m.cluster, M);
      worst = std::max(worst, (build_exchange_hamiltonian(m, b).to_dense() - fs.restrict(Hf, *b, *b)).cwiseAbs().maxCoeff());
      ++sectors;
    }
  }
  c.check(worst < 1e-12, "sparse sector Hamiltonians equal dense Kronecker blocks on " + std::to_string(sectors) +
                             " sectors" + fmt(" (max dev %.1e)", worst));
}

void lanczos_vs_dense(Criterion& c) {
  SolverOptions lz;
  lz.dense_threshold = 0;
  lz.krylov_dim = 24;
  double worst = 0.0;
  std::size_t sectors = 0;
  for (const auto& m : property_models()) {
    std::set<std::uint64_t> seen;  // +-M sectors are mirror images
    for (const auto& M : valid_magnetizations(*m.cluster)) {
      if (M.twice < 0) continue;
      const auto dim = sector_dimension(*m.cluster, M);
      if (dim > 4096 || dim < 40) continue;
      auto b = SectorBasis::enumerate(m.cluster, M);
      const auto H = build_exchange_hamiltonian(m, b);
      Eigen::VectorXd ev;
      if (H.is_real()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.to_dense().real(), Eigen::EigenvaluesOnly);
        ev = es.eigenvalues();
      } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.to_dense(), Eigen::EigenvaluesOnly);
        ev = es.eigenvalues();
      }
      const auto l = lowest_eigenpairs(H, 2, lz);
      const double scale = std::max(1.0, H.norm_bound());
      for (std::size_t k = 0; k < 2; ++k) {
        CVec y(b->dimension());
        H.apply(l.vectors[k], y);
        double r = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) r += std::norm(y[i] - l.values[k] * l.vectors[k][i]);
        worst = std::max({worst, std::abs(ev[static_cast<Eigen::Index>(k)] - l.values[k]) / scale, std::sqrt(r) / scale});
      }
      ++sectors;
    }
  }
  c.check(worst < 1e-8, "Lanczos vs dense, two lowest pairs on " + std::to_string(sectors) +
                            " sectors with 40 <= dim <= 4096" + fmt(" (max rel dev %.1e)", worst));
}

void correlations_vs_dense(Criterion& c) {
  std::mt19937_64 rng(101);
  const auto cl = mixed_cluster();
  const oracle::FullSpace fs(*cl);
  const auto Ms = valid_magnetizations(*cl);
  double worst = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < Ms.size(); ++i) {
    for (std::size_t j = i + 1; j < Ms.size(); j += 2) {
      const auto p1 = oracle::random_state(SectorBasis::enumerate(cl, Ms[i]), rng);
      const auto p2 = oracle::random_state(SectorBasis::enumerate(cl, Ms[j]), rng);
      const auto terms = superposition_terms(p1, p2);
      for (double phi : {0.0, 1.1}) {
        const Eigen::VectorXcd v = (fs.embed(p1) + std::polar(1.0, phi) * fs.embed(p2)) / std::sqrt(2.0);
        Eigen::VectorXd b;
        Eigen::MatrixXd C;
        fs.correlations(v, b, C);
        const auto d = terms.combine(phi);
        worst = std::max({worst, (d.C - C).cwiseAbs().maxCoeff(), (d.b - b).cwiseAbs().maxCoeff()});
      }
      ++pairs;
    }
  }
  c.check(worst < 1e-10, "correlations of " + std::to_string(pairs) +
                             " random superpositions vs full-space oracle (dim " + std::to_string(fs.dim()) + ")" +
                             fmt(", max dev %.1e", worst));
}

void fisher_properties(Criterion& c) {
  std::mt19937_64 rng(103);
  std::normal_distribution<double> g;
  bool monotone = true;
  double worst_gap = 0.0;
  for (const auto& two_s : std::vector<std::vector<int>>{{1, 1}, {2, 1}, {3, 1, 2}, {1, 2, 1}}) {
    std::vector<SpinSite> sites;
    for (std::size_t i = 0; i < two_s.size(); ++i)
      sites.push_back({static_cast<int>(i), HalfInt{two_s[i]}, i % 2 ? Sublattice::B : Sublattice::A, ""});
    const auto cl = std::make_shared<const SpinCluster>("small", sites);
    const auto Ms = valid_magnetizations(*cl);
    for (int trial = 0; trial < 5; ++trial) {
      const auto p1 = oracle::random_state(SectorBasis::enumerate(cl, Ms.front()), rng);
      const auto p2 = oracle::random_state(SectorBasis::enumerate(cl, Ms[1 + static_cast<std::size_t>(trial) % (Ms.size() - 1)]), rng);
      const auto data = superposition_terms(p1, p2).combine(0.0);
      std::vector<double> vals;
      DirectionField start;
      for (std::size_t i = 0; i < cl->size(); ++i) start.n.push_back(Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized());
      ascend(data.covariance(), start, 1e-12, 500, &vals);
      for (std::size_t k = 1; k < vals.size(); ++k) monotone = monotone && vals[k] >= vals[k - 1] - 1e-12;
      const double best = maximize_fisher(data).variance;
      double sampled = 0.0;
      for (int k = 0; k < 20000; ++k) {
        DirectionField f;
        for (std::size_t i = 0; i < cl->size(); ++i) f.n.push_back(Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized());
        sampled = std::max(sampled, variance_of_field(data, f));
      }
      worst_gap = std::max(worst_gap, (sampled - best) / std::max(1e-300, sampled));
    }
  }
  c.check(monotone, "block-coordinate ascent is monotone on every sweep");
  c.check(worst_gap <= 1e-6, fmt("maximize_fisher >= random search on 2-3 spins (worst rel shortfall %.1e)", std::max(0.0, worst_gap)));
}

void psi_max_properties(Criterion& c) {
  double worstF = 0.0;
  double worstVar = 0.0;
  double worstS2 = 0.0;
  for (const auto& key : registry_keys()) {
    if (is_closed_form_key(key)) continue;
    const auto cl = registry_entry(key).model.cluster;
    const auto [a, b] = psi_max_states(cl);
    const auto data = correlations_of_superposition(Superposition(a, b));
    const double F = evaluate_field(data, DirectionField::staggered_z(*cl)).F;
    worstF = std::max(worstF, std::abs(F - fisher_max(*cl)) / fisher_max(*cl));
    worstVar = std::max({worstVar, staggered_magnetization_stats(a).variance, staggered_magnetization_stats(b).variance});
    if (key.rfind("mn12", 0) == 0 || key == "fe8" || key.rfind("mn6", 0) == 0 || key == "fe4") {
      const double M = a.M().value();
      const double sB = cl->sublattice_spin_max(Sublattice::B).value();
      worstS2 = std::max(worstS2, std::abs(a.s_squared - (M * (M + 1) + 2 * sB)));
    }
  }
  c.check(worstF < 1e-12, fmt("F(Psi_max) = 4 (sum s)^2 on every registry cluster (max rel dev %.1e)", worstF));
  c.check(worstVar < 1e-12, fmt("Var(S_z*) = 0 on Psi_max components (max %.1e)", worstVar));
  c.check(worstS2 < 1e-10, fmt("<S^2> = M(M+1) + 2 sum_B s on Psi_1^max for Mn12, Fe8, Mn6, Fe4 (max dev %.1e)", worstS2));
}

void distinguish_properties(Criterion& c) {
  std::mt19937_64 rng(107);
  bool contraction = true;
  int pairs = 0;
  for (const auto& key : {"fe4", "cr7ni", "mn6_sA1", "v15_triangle", "v15_hexagon"}) {
    const auto e = registry_entry(key);
    const HalfInt S = e.ground_S;
    QuantumState a, b;
    if (S.twice > 0) {
      std::tie(a, b) = doublet(e.model, S);
    } else {
      a = ground_state_in_sector(e.model, HalfInt{0});
      b = ground_state_in_sector(e.model, HalfInt{2});
    }
    const std::size_t n = e.model.cluster->size();
    std::uniform_int_distribution<SubsetMask> pick(1, (SubsetMask{1} << n) - 1);
    for (int k = 0; k < 200; ++k) {
      const SubsetMask big = pick(rng);
      const SubsetMask small = big & pick(rng);
      if (small == 0) continue;
      contraction = contraction && discrimination_probability(a, b, small) <= discrimination_probability(a, b, big) + 1e-12;
      ++pairs;
    }
  }
  c.check(contraction, "P(subset) <= P(superset) on " + std::to_string(pairs) + " random nested pairs");

  bool same = true;
  int cases = 0;
  for (const auto& two_s : std::vector<std::vector<int>>{{1, 2, 1, 3}, {2, 1, 1, 1, 2, 1}, {1, 1, 1, 1, 1, 1}}) {
    std::vector<SpinSite> sites;
    for (std::size_t i = 0; i < two_s.size(); ++i)
      sites.push_back({static_cast<int>(i), HalfInt{two_s[i]}, Sublattice::A, ""});
    const auto cl = std::make_shared<const SpinCluster>("small", sites);
    const auto Ms = valid_magnetizations(*cl);
    for (int trial = 0; trial < 4; ++trial) {
      const auto p1 = oracle::random_state(SectorBasis::enumerate(cl, Ms[0]), rng);
      const auto p2 = oracle::random_state(SectorBasis::enumerate(cl, Ms[Ms.size() - 1 - static_cast<std::size_t>(trial)]), rng);
      auto prob = [&](SubsetMask m) { return discrimination_probability(p1, p2, m); };
      for (double delta : {1e-2, 0.2}) {
        same = same && d_lm(p1, p2, delta).n_parts == d_lm_bruteforce(cl->size(), prob, delta);
        ++cases;
      }
    }
  }
  c.check(same, "d_lm equals Bell-enumeration brute force on " + std::to_string(cases) + " cases with N <= 6");
}

void criterion5(Criterion& c) {
  operators_vs_dense(c);
  lanczos_vs_dense(c);
  correlations_vs_dense(c);
  fisher_properties(c);
  psi_max_properties(c);
  distinguish_properties(c);
}

// ---------------------------------------------------------------------------

void criterion6(Criterion& c) {
  struct Row {
    const char* label;
    SpinModel base;
    double d_fi;
    double d_rfi;
    std::size_t d_lm;
  };
  for (auto& row : {Row{"Mn12 geometry", build_mn12(1), 20.0, 143.0, 10}, Row{"Fe8 geometry", build_fe8(), 18.3, 151.9, 8}}) {
    const SpinModel v = ideal_limit_variant(row.base);
    const IdealSizes ideal = ideal_ferrimagnet_sizes(*v.cluster);
    AnalysisConfig cfg;
    cfg.M1 = ideal.S;
    cfg.M2 = -ideal.S;
    cfg.target_S = ideal.S;
    cfg.field_policy = FieldPolicy::staggered;
    const auto r = analyze(v, cfg);
    const std::string l = row.label;
    c.note(l + fmt(": closed form D_FI %.5f, D_RFI %.4f", ideal.d_fi, ideal.d_rfi));
    c.check(rel_ok(r.fisher.d_fi, ideal.d_fi, 0.01) && rel_ok(r.fisher.d_fi, row.d_fi, 0.01),
            l + fmt(" D_FI = %.5f, paper %g (tol 1%%)", r.fisher.d_fi, row.d_fi));
    c.check(rel_ok(r.rfi.value, ideal.d_rfi, 0.01) && rel_ok(r.rfi.value, row.d_rfi, 0.01),
            l + fmt(" D_RFI = %.4f, paper %g (tol 1%%)", r.rfi.value, row.d_rfi));
    c.check(r.d_lm.n_parts == row.d_lm, l + " D_LM = " + std::to_string(r.d_lm.n_parts) + ", paper " + std::to_string(row.d_lm));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  bool extended = false;
  std::vector<int> only;
  std::string csv;
  app.add_flag("--extended", extended, "Include the Mn12 sets (criterion 4)");
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 6));
  app.add_option("--table-csv", csv, "Write the Table I cells to this file");
  CLI11_PARSE(app, argc, argv);

  std::set<int> run{1, 2, 3, 5, 6};
  if (extended) run.insert(4);
  if (!only.empty()) run = std::set<int>(only.begin(), only.end());

  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point t0) { return std::chrono::duration<double>(clock::now() - t0).count(); };

  Table table;
  const bool need_table = run.count(1) || run.count(2) || run.count(3) || run.count(4);
  if (need_table) {
    const auto t0 = clock::now();
    Table1Options opts;
    opts.extended = run.count(4) > 0;
    table.cells = table1(opts, &table.reports);
    std::printf("table1: %zu cells in %.1f s\n", table.cells.size(), seconds(t0));
    if (!csv.empty()) {
      std::FILE* f = std::fopen(csv.c_str(), "w");
      if (f) {
        std::fputs(table_csv(table.cells).c_str(), f);
        std::fclose(f);
      }
    }
  }

  const std::map<int, std::pair<std::string, std::function<void(Criterion&)>>> criteria{
      {1, {"Table I small molecules", [&](Criterion& c) { criterion1(c, table); }}},
      {2, {"Mn6 family", [&](Criterion& c) { criterion2(c, table); }}},
      {3, {"Fe8", [&](Criterion& c) { criterion3(c, table); }}},
      {4, {"Mn12 sets 1 and 2", [&](Criterion& c) { criterion4(c, table); }}},
      {5, {"property suites", criterion5}},
      {6, {"ideal-limit variants", criterion6}},
  };

  bool all = true;
  for (int id : run) {
    const auto& [title, fn] = criteria.at(id);
    Criterion c(id, title);
    const auto t0 = clock::now();
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.check(false, std::string("exception: ") + e.what());
    }
    all = c.finish(seconds(t0)) && all;
  }
  return all ? 0 : 1;
}
