#pragma once

// Scenario configuration: a single JSON document of key-value tables.
// The schema is versioned ("schema_version": 1); unknown keys are rejected
// so a typo never silently falls back to a default. schema_text() documents
// every key.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phbt/analysis.hpp"
#include "phbt/detection.hpp"
#include "phbt/field_engine.hpp"
#include "phbt/theory_oracle.hpp"

namespace phbt {

inline constexpr int config_schema_version = 1;

enum class Mode { cw, pulsed, oracle };
enum class ScanMode { stepped, continuous };

struct LoConfig {
  CoherentLOSpec spec;  // per-arm |alpha|^2, static phase, scan waveform
  bool blocked = false;
  bool match_source = false;  // attenuate each arm to the signal arm intensity
  double mode_overlap = 1.0;  // co-polarized power fraction of each LO arm
};

struct ScanConfig {
  // cw: fringe delays tau; pulsed: electronic delays Delta T_e (seconds).
  std::vector<double> delays;
  int phase_points = 32;
  int periods = 1;
  ScanMode mode = ScanMode::stepped;
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  int trials = 1;
  bool reference = true;  // LO-blocked g2 measurement alongside the fringes
  // cw
  double dt = 0.25e-6;
  double window = 2e-3;
  int windows_per_point = 20;
  double max_tau = 50e-6;
  // pulsed
  double pulse_period = 20e-9;
  std::int64_t pulses_per_point = 2'000'000;
  std::int64_t span = 2;
  int blocks = 16;
  int reference_records = 0;  // 0: one per phase step
};

struct PulsedConfig {
  double optical_delay = 20e-9;  // Delta T_o on arm 1
  double beta1 = 1.0;
  double beta2 = 1.0;
  double gamma_abs = 1.0;  // field coherence between the split arms
};

struct Tolerances {
  double visibility = 0.02;
  double gamma_abs = 0.05;
  double phase = 0.1;
  double g2_peak = 0.05;
  double g2_tail = 0.02;
  double crosscheck = 0.05;
  double doppler_relative = 0.01;
  double pulsed_visibility = 0.03;
  double selection = 0.02;
  double sigma_multiple = 3.0;
};

struct AnalysisConfig {
  std::optional<double> xi;  // empty: calibrate from the peak visibility
  ClampPolicy clamp = ClampPolicy::clamp;
  oracle::PulsedWeight pulsed_weight = oracle::PulsedWeight::consistent;
  Tolerances tolerance;
};

struct OutputConfig {
  std::string dir = "phbt_out";
  bool dump_fields = false;
};

struct OracleConfig {
  oracle::CwScenarioParams cw;
  oracle::PulsedScenarioParams pulsed;
  oracle::AntibunchedLOParams antibunched;
};

struct ScenarioConfig {
  Mode mode = Mode::cw;
  ThermalFieldSpec source;
  LoConfig lo;
  DetectorSpec detector;
  double optical_delay = 0.0;  // cw only: delay on arm 1
  ScanConfig scan;
  RunConfig run;
  PulsedConfig pulsed;
  AnalysisConfig analysis;
  OutputConfig output;
  OracleConfig oracle;

  // Mode-specific checks; throws Error(config_invalid) on the first problem.
  void validate() const;
};

ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::string& path);

// Canonical JSON with every key present; parse_config(to_json(c)) == c.
std::string to_json(const ScenarioConfig& cfg);

// Sets a numeric field addressed by a dotted path such as
// "source.doppler_shift". Throws Error(unknown_parameter) if the path does
// not name a numeric field.
void set_parameter(ScenarioConfig& cfg, std::string_view path, double value);

// Sets any field from a "path=value" string; value is parsed as JSON and
// falls back to a string.
void set_parameter_text(ScenarioConfig& cfg, std::string_view assignment);

const char* mode_name(Mode m);
std::string_view schema_text();

}  // namespace phbt
