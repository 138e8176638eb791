#pragma once

// Scenario runner: wires the modules into the cw and pulsed topologies,
// runs seeded Monte Carlo campaigns and pairs every measured quantity with
// its closed-form prediction.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phbt/analysis.hpp"
#include "phbt/config.hpp"

namespace phbt {

// Everything the analysis stage needs; this is what a run directory stores
// as raw data and what `analyze` reads back.
struct RawData {
  // cw: tau in seconds; pulsed: tau holds dN = N_e - N_o.
  std::vector<FringeScan> fringes;
  // LO-blocked g2 (cw: tau in seconds; pulsed: tau holds dN).
  std::optional<CorrelationEstimate> reference;
  // Scalar measurements such as mean click probabilities.
  std::map<std::string, double> measurements;
  std::vector<std::string> warnings;
};

struct Check {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  double std_error = 0.0;
  // upper_bound: pass when measured < expected (tolerance unused)
  bool upper_bound = false;
  bool passed = false;
};

struct OraclePair {
  double tau = 0.0;
  double visibility = 0.0;
  double oracle_visibility = 0.0;
  double gamma_abs = 0.0;
  double oracle_gamma_abs = 0.0;
  double gamma_phase = 0.0;
  double oracle_gamma_phase = 0.0;
};

struct RunReport {
  Mode mode = Mode::cw;
  RawData raw;
  std::vector<FringeFit> fits;
  std::optional<CoherenceFunction> coherence;
  std::optional<DopplerFit> doppler;
  std::optional<CrosscheckReport> crosscheck;
  std::optional<GammaEstimate> reference_gamma;
  double xi = 1.0;
  std::vector<OraclePair> oracle;
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  double runtime_seconds = 0.0;

  bool passed() const;
  const Check* find_check(std::string_view name) const;
};

struct RunOptions {
  int threads = 1;
  // When set, the run directory is written here (created if missing).
  std::optional<std::filesystem::path> out_dir;
};

RunReport run_cw_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});
RunReport run_pulsed_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});
// Dispatches on cfg.mode (cw or pulsed).
RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});

// Pure analysis of stored raw data.
RunReport analyze_raw(const ScenarioConfig& cfg, RawData raw);

struct SweepRow {
  double value = 0.0;
  double tau = 0.0;
  double visibility = 0.0;
  double gamma_abs = 0.0;
  double gamma_phase = 0.0;
  double oracle_visibility = 0.0;
};

struct SweepResult {
  std::string parameter;
  std::vector<SweepRow> rows;
  std::vector<RunReport> reports;
};

// One run per value of a numeric config field. The parameter "tau" (alias
// "scan.delays") is special: all values become fringe delays of one run.
SweepResult run_sweep(const ScenarioConfig& cfg, std::string_view parameter,
                      std::span<const double> values, const RunOptions& options = {});

// Writes the run directory: config snapshot, raw CSVs, derived CSVs and
// report.txt. runtime.txt is the only file that is not deterministic.
void write_run(const std::filesystem::path& dir, const ScenarioConfig& cfg,
               const RunReport& report);
void write_sweep_summary(const std::filesystem::path& file, const SweepResult& sweep);

// Re-runs the analysis on a run directory's raw data and rewrites the
// derived outputs.
RunReport analyze_run_dir(const std::filesystem::path& dir);

// Closed-form predictions for cfg.oracle as key = value lines.
std::string oracle_report(const ScenarioConfig& cfg);

// key = value text of a report (the content of report.txt).
std::string report_text(const ScenarioConfig& cfg, const RunReport& report);

// Column documentation of every CSV file a run or sweep writes.
std::string_view csv_schema_text();

}  // namespace phbt
