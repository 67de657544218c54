#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nanomag/models.hpp"

namespace nanomag {

/// git describe of the build.
std::string version_string();

enum class FieldPolicy { optimize, staggered };

FieldPolicy parse_field_policy(const std::string& s);
std::string to_string(FieldPolicy p);

struct AnalysisConfig {
  HalfInt M1;
  HalfInt M2;
  double delta = 1e-2;
  double phase = 0.0;
  bool phase_sweep = false;
  bool compute_d_lm = true;
  FieldPolicy field_policy = FieldPolicy::optimize;
  std::size_t max_sector_dim = 5'000'000;
  std::optional<HalfInt> target_S;
  SolverOptions solver;
  FisherOptions fisher;
  DistinguishOptions distinguish;
};

nlohmann::json config_to_json(const AnalysisConfig& c);

struct PhasePoint {
  double phase = 0.0;
  double d_fi = 0.0;
  double d_rfi = 0.0;
  bool d_rfi_divergent = false;
};

struct AnalysisReport {
  std::string subject;
  HalfInt M1;
  HalfInt M2;
  double energy1 = 0.0;
  double energy2 = 0.0;
  double s_squared1 = 0.0;
  double s_squared2 = 0.0;
  std::size_t dim1 = 0;
  std::size_t dim2 = 0;
  /// |<psi_k|psi_k^max>| with the collinear state of the same sector (0 if none).
  double overlap_max1 = 0.0;
  double overlap_max2 = 0.0;
  StaggeredStats staggered1;
  StaggeredStats staggered2;
  FieldPolicy field_policy = FieldPolicy::optimize;
  FisherResult fisher;
  RfiResult rfi;
  double d_fi_max = 0.0;  // sum_i s_i
  bool d_lm_computed = false;
  PartitionResult d_lm;
  std::vector<PhasePoint> phase_sweep;
  std::map<std::string, double> timings;
};

/// Measures of (|psi1> + e^{i phase}|psi2>)/sqrt 2 for given components.
AnalysisReport analyze_states(const QuantumState& psi1, const QuantumState& psi2, const AnalysisConfig& cfg,
                              const std::vector<DirectionField>& extra_starts = {});

/// Components are the ground states of the M1 and M2 sectors.
AnalysisReport analyze(const SpinModel& model, const AnalysisConfig& cfg);

nlohmann::json report_to_json(const AnalysisReport& r);
std::string report_table(const AnalysisReport& r);

/// Throws BudgetExceeded when the sector is larger than `cap`.
void check_sector_budget(const SpinModel& model, HalfInt M, std::size_t cap);

struct GridCell {
  HalfInt M1;
  HalfInt M2;
  double d_fi = 0.0;
  double d_rfi = 0.0;
  bool d_rfi_divergent = false;
};

/// All (M1, M2) in the ground multiplet; diagonal cells are zero.
std::vector<GridCell> grid(const SpinModel& model, HalfInt S, const AnalysisConfig& cfg);
std::string grid_csv(const std::vector<GridCell>& cells);

struct PlmRow {
  HalfInt M;
  std::string subset_id;
  double P = 0.0;
};

/// P_l for M1 = -M2 = M, M = S, S - 1, ... > 0, on every single site and on
/// the named subsets.
std::vector<PlmRow> plm_sweep(const SpinModel& model, HalfInt S, const std::vector<NamedSubset>& subsets,
                              const AnalysisConfig& cfg);
std::string plm_csv(const std::vector<PlmRow>& rows);

/// Variance of the field restricted to the sites of `subset`.
double subset_variance(const CorrelationData& data, const DirectionField& field, SubsetMask subset);

struct PartialSums {
  double S_A = 0.0;  // S solving S(S+1) = <S_A^2>
  double S_B = 0.0;
  double S_A_max = 0.0;
  double S_B_max = 0.0;
};
PartialSums partial_spin_sums(const CorrelationData& data);

struct RingPoint {
  HalfInt s_A;
  HalfInt S;
  double d_fi = 0.0;
  double d_rfi = 0.0;
  double ideal_d_fi = 0.0;
  double ideal_d_rfi = 0.0;
  int d_lm = -1;
};

struct RingScaling {
  std::vector<RingPoint> points;
  double lin_intercept = 0.0;
  double lin_slope = 0.0;
  double lin_rel_rms = 0.0;
  double exp_log_intercept = 0.0;
  double exp_rate = 0.0;
  double exp_rel_rms = 0.0;
  std::vector<double> rfi_ratios;
  /// max / min of the successive ratios.
  double ratio_spread = 0.0;
};

/// Mn6-type rings for the given s_A values (s_B = 1/2), M = +-S.
RingScaling ring_scaling(const std::vector<HalfInt>& s_A_values, const AnalysisConfig& cfg, bool with_d_lm = false);
std::string ring_csv(const RingScaling& r);

/// Least squares y = a + b x; returns {a, b}.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

enum class Check {
  relative,   // |computed - paper| <= tolerance * |paper|
  exact,      // integer equality
  above,      // computed > paper
  divergent,  // the measure must diverge
  info,       // reported only
};

struct TableCell {
  std::string column;
  std::string measure;
  double computed = 0.0;
  double paper = 0.0;
  Check check = Check::relative;
  double tolerance = 0.0;
  bool divergent = false;
  std::string note;
};

bool cell_passes(const TableCell& c);

struct Table1Options {
  bool extended = false;
  AnalysisConfig base;
};

std::vector<TableCell> table1(const Table1Options& opts, std::map<std::string, AnalysisReport>* reports = nullptr);
std::string table_csv(const std::vector<TableCell>& cells);

}  // namespace nanomag
