// Command-line front end. Every command writes its payload to --out (plus a
// <name>.meta.json with version, config, seeds and timings) and prints a
// human-readable summary to stdout.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "nanomag/analysis.hpp"
#include "nanomag/errors.hpp"
#include "nanomag/model_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nanomag;

namespace {

struct Common {
  std::string model;
  std::string m1 = "";
  std::string m2 = "";
  std::string target_s;
  std::string field_policy = "optimize";
  std::string out_dir = ".";
  double delta = 1e-2;
  double phase = 0.0;
  bool phase_sweep = false;
  bool no_dlm = false;
  int threads = 0;
  SolverOptions solver;
  FisherOptions fisher;
  std::size_t max_sector_dim = 5'000'000;
  std::size_t max_block_dim = 4096;
};

void add_solver_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--tol", c.solver.tol, "Eigensolver residual tolerance relative to ||H||")->capture_default_str();
  cmd->add_option("--seed", c.solver.seed, "Eigensolver start-vector seed")->capture_default_str();
  cmd->add_option("--max-iter", c.solver.max_iter, "Eigensolver budget in matrix-vector products")
      ->capture_default_str();
  cmd->add_option("--dense-threshold", c.solver.dense_threshold, "Sectors up to this size are solved densely")
      ->capture_default_str();
  cmd->add_option("--fisher-seed", c.fisher.seed, "Seed of the random Fisher starts")->capture_default_str();
  cmd->add_option("--fisher-starts", c.fisher.random_starts, "Number of random Fisher starts")->capture_default_str();
  cmd->add_option("--max-sector-dim", c.max_sector_dim, "Refuse sectors larger than this")->capture_default_str();
  cmd->add_option("--max-block-dim", c.max_block_dim, "Cap on the dense discrimination block")->capture_default_str();
  cmd->add_option("--threads", c.threads, "OpenMP threads (0 keeps the runtime default)")->capture_default_str();
  cmd->add_option("--out", c.out_dir, "Output directory")->capture_default_str();
}

void add_state_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--delta", c.delta, "Discrimination threshold delta")->capture_default_str();
  cmd->add_option("--phase", c.phase, "Relative phase of the second component (radians)")->capture_default_str();
  cmd->add_flag("--phase-sweep", c.phase_sweep, "Also evaluate phases 0, pi/2, pi, 3pi/2");
  cmd->add_option("--field-policy", c.field_policy, "optimize | staggered")->capture_default_str();
  cmd->add_option("--target-s", c.target_s, "Multiplet used to resolve degenerate sector ground states");
}

AnalysisConfig make_config(const Common& c) {
  AnalysisConfig cfg;
  if (!c.m1.empty()) cfg.M1 = HalfInt::parse(c.m1);
  if (!c.m2.empty()) cfg.M2 = HalfInt::parse(c.m2);
  cfg.delta = c.delta;
  if (!(cfg.delta > 0.0 && cfg.delta < 0.5)) throw InvalidInput("delta must lie in (0, 1/2)");
  cfg.phase = c.phase;
  cfg.phase_sweep = c.phase_sweep;
  cfg.compute_d_lm = !c.no_dlm;
  cfg.field_policy = parse_field_policy(c.field_policy);
  cfg.max_sector_dim = c.max_sector_dim;
  if (!c.target_s.empty()) cfg.target_S = HalfInt::parse(c.target_s);
  cfg.solver = c.solver;
  cfg.fisher = c.fisher;
  cfg.distinguish.max_block_dim = c.max_block_dim;
  if (c.threads > 0) omp_set_num_threads(c.threads);
  return cfg;
}

struct Resolved {
  SpinModel model;
  std::optional<HalfInt> ground_S;
  std::vector<NamedSubset> probes;
  std::string key;
};

Resolved resolve_model(const std::string& spec) {
  Resolved r;
  if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json" && fs::exists(spec)) {
    r.model = load_model(spec);
    r.key = r.model.cluster->name();
    return r;
  }
  const RegistryEntry e = registry_entry(spec);
  r.model = e.model;
  r.ground_S = e.ground_S;
  r.probes = e.probe_subsets;
  r.key = e.key;
  return r;
}

std::string file_stem(std::string s) {
  for (char& ch : s)
    if (ch == '/' || ch == '=' || ch == ' ') ch = '_';
  return s;
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << text;
}

json meta(const std::string& command, const Common& c, const AnalysisConfig& cfg) {
  json m;
  m["schema_version"] = 1;
  m["version"] = version_string();
  m["command"] = command;
  m["model"] = c.model;
  m["config"] = config_to_json(cfg);
  m["threads"] = omp_get_max_threads();
  return m;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_analyze(Common& c, bool closed_form) {
  if (closed_form || is_closed_form_key(c.model)) {
    const ClosedFormSizes s = closed_form_sizes(c.model);
    json j;
    j["schema_version"] = 1;
    j["version"] = version_string();
    j["command"] = "analyze";
    j["model"] = c.model;
    j["closed_form"] = true;
    j["S"] = s.S;
    j["n_spins"] = s.n_spins;
    j["D_FI"] = s.d_fi;
    j["D_FI_components"] = 0.0;
    j["D_RFI"] = nullptr;
    j["D_RFI_divergent"] = s.d_rfi_divergent;
    j["D_LM"] = {{"n_parts", s.d_lm}};
    write_text(fs::path(c.out_dir) / ("analyze_" + file_stem(c.model) + ".json"), j.dump(2) + "\n");
    std::cout << c.model << " (closed form)\n  D_FI(Psi)   " << s.d_fi << "\n  D_FI(Psi_k) 0\n  D_RFI(Psi)  divergent\n"
              << "  D_LM        " << s.d_lm << "\n";
    return 0;
  }
  if (c.m1.empty() || c.m2.empty()) throw InvalidInput("analyze needs --m1 and --m2");
  const Resolved r = resolve_model(c.model);
  AnalysisConfig cfg = make_config(c);
  if (!cfg.target_S && r.ground_S) cfg.target_S = r.ground_S;
  const auto t0 = std::chrono::steady_clock::now();
  AnalysisReport rep = analyze(r.model, cfg);
  rep.timings["total"] = since(t0);
  json j = meta("analyze", c, cfg);
  j["model_source"] = r.model.source;
  j["report"] = report_to_json(rep);
  const std::string stem = "analyze_" + file_stem(r.key) + "_" + file_stem(cfg.M1.str()) + "_" + file_stem(cfg.M2.str());
  write_text(fs::path(c.out_dir) / (stem + ".json"), j.dump(2) + "\n");
  std::cout << report_table(rep);
  return 0;
}

HalfInt multiplet_of(const Resolved& r, const AnalysisConfig& cfg) {
  if (cfg.target_S) return *cfg.target_S;
  if (r.ground_S) return *r.ground_S;
  throw InvalidInput("model file has no declared ground multiplet; pass --target-s");
}

int run_grid(Common& c) {
  const Resolved r = resolve_model(c.model);
  AnalysisConfig cfg = make_config(c);
  const HalfInt S = multiplet_of(r, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const auto cells = grid(r.model, S, cfg);
  json m = meta("grid", c, cfg);
  m["S"] = S.str();
  m["timings_seconds"] = {{"total", since(t0)}};
  const std::string stem = "grid_" + file_stem(r.key);
  write_text(fs::path(c.out_dir) / (stem + ".csv"), grid_csv(cells));
  write_text(fs::path(c.out_dir) / (stem + ".meta.json"), m.dump(2) + "\n");
  const GridCell* best = nullptr;
  for (const auto& cell : cells)
    if (!best || cell.d_fi > best->d_fi) best = &cell;
  std::cout << "grid " << r.key << ": " << cells.size() << " cells, max D_FI " << best->d_fi << " at ("
            << best->M1.str() << ", " << best->M2.str() << ")\n";
  return 0;
}

int run_plm(Common& c) {
  const Resolved r = resolve_model(c.model);
  AnalysisConfig cfg = make_config(c);
  const HalfInt S = multiplet_of(r, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = plm_sweep(r.model, S, r.probes, cfg);
  json m = meta("plm-sweep", c, cfg);
  m["S"] = S.str();
  json subsets = json::object();
  for (const auto& p : r.probes) {
    json a = json::array();
    for (auto i : mask_sites(p.mask)) a.push_back(i);
    subsets[p.id] = a;
  }
  m["named_subsets"] = subsets;
  m["timings_seconds"] = {{"total", since(t0)}};
  const std::string stem = "plm_" + file_stem(r.key);
  write_text(fs::path(c.out_dir) / (stem + ".csv"), plm_csv(rows));
  write_text(fs::path(c.out_dir) / (stem + ".meta.json"), m.dump(2) + "\n");
  std::cout << plm_csv(rows);
  return 0;
}

int run_ring(Common& c, const std::vector<std::string>& values, bool with_dlm) {
  AnalysisConfig cfg = make_config(c);
  std::vector<HalfInt> sA;
  for (const auto& v : values) sA.push_back(HalfInt::parse(v));
  const auto t0 = std::chrono::steady_clock::now();
  const RingScaling rs = ring_scaling(sA, cfg, with_dlm);
  json m = meta("ring-scaling", c, cfg);
  m["s_A"] = values;
  m["linear_fit"] = {{"intercept", rs.lin_intercept}, {"slope", rs.lin_slope}, {"relative_rms", rs.lin_rel_rms}};
  m["exponential_fit"] = {
      {"log_intercept", rs.exp_log_intercept}, {"rate", rs.exp_rate}, {"relative_rms", rs.exp_rel_rms}};
  m["d_rfi_successive_ratios"] = rs.rfi_ratios;
  m["ratio_spread"] = rs.ratio_spread;
  m["timings_seconds"] = {{"total", since(t0)}};
  write_text(fs::path(c.out_dir) / "ring_scaling.csv", ring_csv(rs));
  write_text(fs::path(c.out_dir) / "ring_scaling.meta.json", m.dump(2) + "\n");
  std::cout << ring_csv(rs);
  std::cout << "linear fit D_FI = " << rs.lin_intercept << " + " << rs.lin_slope << " s_A, relative RMS "
            << rs.lin_rel_rms << "\n";
  std::cout << "exponential fit D_RFI = exp(" << rs.exp_log_intercept << " + " << rs.exp_rate
            << " s_A), relative RMS " << rs.exp_rel_rms << ", ratio spread " << rs.ratio_spread << "\n";
  return 0;
}

int run_table1(Common& c, bool extended) {
  Table1Options o;
  o.extended = extended;
  o.base = make_config(c);
  const auto t0 = std::chrono::steady_clock::now();
  std::map<std::string, AnalysisReport> reports;
  const auto cells = table1(o, &reports);
  json m = meta("table1", c, o.base);
  m["extended"] = extended;
  m["timings_seconds"] = {{"total", since(t0)}};
  json reps = json::object();
  for (const auto& [k, r] : reports) reps[k] = report_to_json(r);
  m["reports"] = reps;
  write_text(fs::path(c.out_dir) / "table1.csv", table_csv(cells));
  write_text(fs::path(c.out_dir) / "table1.meta.json", m.dump(2) + "\n");
  std::cout << table_csv(cells);
  bool ok = true;
  for (const auto& cell : cells) ok = ok && cell_passes(cell);
  return ok ? 0 : static_cast<int>(ExitCode::tolerance_failure);
}

int run_export(const std::string& key, const std::string& path) {
  const RegistryEntry e = registry_entry(key);
  if (path.empty() || path == "-") {
    std::cout << model_to_json(e.model).dump(2) << "\n";
  } else {
    save_model(e.model, path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Superposition sizes in molecular nanomagnets (D_FI, D_RFI, D_LM)"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  Common c;

  auto* analyze_cmd = app.add_subcommand("analyze", "Measures of one superposition of sector ground states");
  bool closed_form = false;
  analyze_cmd->add_option("model", c.model, "Registry key or model JSON file")->required();
  analyze_cmd->add_option("--m1", c.m1, "M of the first component (e.g. 1/2, 1.5, 10)");
  analyze_cmd->add_option("--m2", c.m2, "M of the second component");
  analyze_cmd->add_flag("--closed-form", closed_form, "Use the analytic ferromagnetic sizes (mn10, tb)");
  analyze_cmd->add_flag("--no-dlm", c.no_dlm, "Skip the D_LM partition search");
  add_state_flags(analyze_cmd, c);
  add_solver_flags(analyze_cmd, c);

  auto* grid_cmd = app.add_subcommand("grid", "D_FI and D_RFI over all (M1, M2) of the ground multiplet");
  grid_cmd->add_option("model", c.model, "Registry key or model JSON file")->required();
  add_state_flags(grid_cmd, c);
  add_solver_flags(grid_cmd, c);

  auto* plm_cmd = app.add_subcommand("plm-sweep", "Discrimination probabilities versus M1 = -M2");
  plm_cmd->add_option("model", c.model, "Registry key or model JSON file")->required();
  add_state_flags(plm_cmd, c);
  add_solver_flags(plm_cmd, c);

  auto* ring_cmd = app.add_subcommand("ring-scaling", "Mn6-type ring sizes versus s_A");
  std::vector<std::string> s_values{"1", "3/2", "2", "5/2"};
  bool ring_dlm = false;
  ring_cmd->add_option("--s-a", s_values, "s_A values")->capture_default_str();
  ring_cmd->add_flag("--with-dlm", ring_dlm, "Also run the D_LM search");
  add_state_flags(ring_cmd, c);
  add_solver_flags(ring_cmd, c);

  auto* table_cmd = app.add_subcommand("table1", "Computed versus published superposition sizes");
  bool extended = false;
  table_cmd->add_flag("--extended", extended, "Include both Mn12 columns (hours)");
  add_solver_flags(table_cmd, c);

  auto* export_cmd = app.add_subcommand("export-model", "Write a registry model as JSON");
  std::string export_key;
  std::string export_path;
  export_cmd->add_option("model", export_key, "Registry key")->required();
  export_cmd->add_option("-o,--output", export_path, "Output file ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::invalid_input);
  }

  try {
    if (*analyze_cmd) return run_analyze(c, closed_form);
    if (*grid_cmd) return run_grid(c);
    if (*plm_cmd) return run_plm(c);
    if (*ring_cmd) return run_ring(c, s_values, ring_dlm);
    if (*table_cmd) return run_table1(c, extended);
    if (*export_cmd) return run_export(export_key, export_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::generic);
  }
  return 0;
}
