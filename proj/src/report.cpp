#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <fmt/format.h>

#include "phbt/error.hpp"
#include "phbt/scenario.hpp"
#include "phbt/serialization.hpp"

namespace phbt {

namespace {

namespace fs = std::filesystem;
using io::compact;
using io::exact;

struct Csv {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    fail(ErrorCode::io, fmt::format("CSV lacks column '{}'", name));
  }
};

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

Csv read_csv(const fs::path& path) {
  std::istringstream in(io::read_file(path));
  Csv csv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    auto cells = split_line(line);
    if (csv.columns.empty()) {
      csv.columns = std::move(cells);
    } else {
      if (cells.size() != csv.columns.size())
        fail(ErrorCode::io, fmt::format("{}: row with {} cells under {} columns", path.string(),
                                        cells.size(), csv.columns.size()));
      csv.rows.push_back(std::move(cells));
    }
  }
  if (csv.columns.empty()) fail(ErrorCode::io, fmt::format("{}: no header row", path.string()));
  return csv;
}

double number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::io, fmt::format("cannot parse number '{}'", s));
  }
}

const char* tau_column(Mode mode) { return mode == Mode::pulsed ? "dN" : "tau"; }

std::string fringes_csv(const RunReport& rep) {
  std::string out = fmt::format("{},phase,value,stderr\n", tau_column(rep.mode));
  for (const auto& scan : rep.raw.fringes)
    for (std::size_t k = 0; k < scan.phase.size(); ++k)
      out += fmt::format("{},{},{},{}\n", exact(scan.tau), exact(scan.phase[k]),
                         exact(scan.value[k]),
                         exact(k < scan.std_error.size() ? scan.std_error[k] : 0.0));
  return out;
}

std::string reference_csv(const RunReport& rep) {
  const auto& ref = *rep.raw.reference;
  const bool counts = !ref.coincidences.empty();
  std::string out = fmt::format("{},g2,stderr{}\n", tau_column(rep.mode),
                                counts ? ",coincidences,pairs" : "");
  for (std::size_t k = 0; k < ref.size(); ++k) {
    out += fmt::format("{},{},{}", exact(ref.tau[k]), exact(ref.g2[k]), exact(ref.std_error[k]));
    if (counts) out += fmt::format(",{},{}", ref.coincidences[k], ref.pairs[k]);
    out += '\n';
  }
  return out;
}

std::string measurements_csv(const RunReport& rep) {
  std::string out = "name,value\n";
  for (const auto& [k, v] : rep.raw.measurements) out += fmt::format("{},{}\n", k, exact(v));
  if (rep.raw.reference) {
    out += fmt::format("reference_windows,{}\n", rep.raw.reference->windows);
    out += fmt::format("reference_averaging_window,{}\n",
                       exact(rep.raw.reference->averaging_window));
  }
  return out;
}

std::string fits_csv(const RunReport& rep) {
  std::string out = fmt::format(
      "{},mean_level,visibility,phase_offset,residual_rms,visibility_stderr,phase_stderr,"
      "points\n",
      tau_column(rep.mode));
  for (const auto& f : rep.fits)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", compact(f.tau), compact(f.mean_level),
                       compact(f.visibility), compact(f.phase_offset), compact(f.residual_rms),
                       compact(f.visibility_stderr), compact(f.phase_stderr), f.points);
  return out;
}

std::string coherence_csv(const RunReport& rep) {
  const auto& cf = *rep.coherence;
  std::string out = fmt::format("{},gamma_abs,gamma_phase,stderr,phase_stderr,flagged\n",
                                tau_column(rep.mode));
  for (std::size_t k = 0; k < cf.size(); ++k)
    out += fmt::format("{},{},{},{},{},{}\n", compact(cf.tau[k]), compact(cf.gamma_abs[k]),
                       compact(cf.gamma_phase[k]), compact(cf.gamma_stderr[k]),
                       compact(cf.phase_stderr[k]), cf.flagged[k] ? 1 : 0);
  return out;
}

std::string oracle_csv(const RunReport& rep) {
  std::string out = fmt::format(
      "{},visibility,oracle_visibility,gamma_abs,oracle_gamma_abs,gamma_phase,"
      "oracle_gamma_phase\n",
      tau_column(rep.mode));
  for (const auto& p : rep.oracle)
    out += fmt::format("{},{},{},{},{},{},{}\n", compact(p.tau), compact(p.visibility),
                       compact(p.oracle_visibility), compact(p.gamma_abs),
                       compact(p.oracle_gamma_abs), compact(p.gamma_phase),
                       compact(p.oracle_gamma_phase));
  return out;
}

std::string checks_csv(const RunReport& rep) {
  std::string out = "name,measured,expected,tolerance,stderr,kind,passed\n";
  for (const auto& c : rep.checks)
    out += fmt::format("\"{}\",{},{},{},{},{},{}\n", c.name, compact(c.measured),
                       compact(c.expected), compact(c.tolerance), compact(c.std_error),
                       c.upper_bound ? "below" : "within", c.passed ? 1 : 0);
  return out;
}

std::string reference_gamma_csv(const RunReport& rep) {
  const auto& g = *rep.reference_gamma;
  std::string out = fmt::format("{},gamma_abs,stderr,flagged\n", tau_column(rep.mode));
  for (std::size_t k = 0; k < g.tau.size(); ++k)
    out += fmt::format("{},{},{},{}\n", compact(g.tau[k]), compact(g.gamma_abs[k]),
                       compact(g.std_error[k]), g.flagged[k] ? 1 : 0);
  return out;
}

void write_derived(const fs::path& dir, const ScenarioConfig& cfg, const RunReport& rep) {
  const std::pair<const char*, bool> derived[] = {
      {"fits.csv", !rep.fits.empty()},
      {"coherence.csv", rep.coherence.has_value()},
      {"oracle.csv", !rep.oracle.empty()},
      {"reference_gamma.csv", rep.reference_gamma.has_value()},
  };
  for (const auto& [name, present] : derived)
    if (!present) fs::remove(dir / name);
  if (!rep.fits.empty()) io::write_file(dir / "fits.csv", fits_csv(rep));
  if (rep.coherence) io::write_file(dir / "coherence.csv", coherence_csv(rep));
  if (!rep.oracle.empty()) io::write_file(dir / "oracle.csv", oracle_csv(rep));
  if (rep.reference_gamma) io::write_file(dir / "reference_gamma.csv", reference_gamma_csv(rep));
  io::write_file(dir / "checks.csv", checks_csv(rep));
  io::write_file(dir / "report.txt", report_text(cfg, rep));
}

RawData read_raw(const fs::path& dir, Mode mode) {
  RawData raw;
  const char* tcol = tau_column(mode);
  if (fs::exists(dir / "fringes.csv")) {
    const auto csv = read_csv(dir / "fringes.csv");
    const auto ct = csv.column(tcol), cp = csv.column("phase"), cv = csv.column("value"),
               cs = csv.column("stderr");
    for (const auto& r : csv.rows) {
      const double tau = number(r[ct]);
      if (raw.fringes.empty() || raw.fringes.back().tau != tau) {
        raw.fringes.emplace_back();
        raw.fringes.back().tau = tau;
      }
      auto& scan = raw.fringes.back();
      scan.phase.push_back(number(r[cp]));
      scan.value.push_back(number(r[cv]));
      scan.std_error.push_back(number(r[cs]));
    }
    // a scan without per-point errors was written with zeros
    for (auto& scan : raw.fringes)
      if (std::all_of(scan.std_error.begin(), scan.std_error.end(),
                      [](double v) { return v == 0.0; }))
        scan.std_error.clear();
  }
  if (fs::exists(dir / "measurements.csv")) {
    const auto csv = read_csv(dir / "measurements.csv");
    const auto cn = csv.column("name"), cv = csv.column("value");
    for (const auto& r : csv.rows) raw.measurements[r[cn]] = number(r[cv]);
  }
  if (fs::exists(dir / "reference_g2.csv")) {
    const auto csv = read_csv(dir / "reference_g2.csv");
    CorrelationEstimate ref;
    const auto ct = csv.column(tcol), cg = csv.column("g2"), cs = csv.column("stderr");
    const bool counts = csv.columns.size() == 5;
    for (const auto& r : csv.rows) {
      ref.tau.push_back(number(r[ct]));
      ref.g2.push_back(number(r[cg]));
      ref.std_error.push_back(number(r[cs]));
      if (counts) {
        ref.coincidences.push_back(std::stoull(r[csv.column("coincidences")]));
        ref.pairs.push_back(std::stoull(r[csv.column("pairs")]));
      }
    }
    auto take = [&](const char* key) {
      const auto it = raw.measurements.find(key);
      double v = 0.0;
      if (it != raw.measurements.end()) {
        v = it->second;
        raw.measurements.erase(it);
      }
      return v;
    };
    ref.windows = static_cast<std::size_t>(take("reference_windows"));
    ref.averaging_window = take("reference_averaging_window");
    raw.reference = std::move(ref);
  }
  return raw;
}

}  // namespace

void write_run(const fs::path& dir, const ScenarioConfig& cfg, const RunReport& rep) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  io::write_file(dir / "config.json", to_json(cfg));
  if (!rep.raw.fringes.empty()) io::write_file(dir / "fringes.csv", fringes_csv(rep));
  if (rep.raw.reference) io::write_file(dir / "reference_g2.csv", reference_csv(rep));
  io::write_file(dir / "measurements.csv", measurements_csv(rep));
  write_derived(dir, cfg, rep);
  io::write_file(dir / "runtime.txt",
                 fmt::format("runtime_seconds = {:.3f}\n", rep.runtime_seconds));
}

void write_sweep_summary(const fs::path& file, const SweepResult& sweep) {
  std::string out = "value,tau,visibility,gamma_abs,gamma_phase,oracle_visibility\n";
  for (const auto& r : sweep.rows)
    out += fmt::format("{},{},{},{},{},{}\n", compact(r.value), compact(r.tau),
                       compact(r.visibility), compact(r.gamma_abs), compact(r.gamma_phase),
                       compact(r.oracle_visibility));
  io::write_file(file, out);
}

RunReport analyze_run_dir(const fs::path& dir) {
  if (!fs::is_directory(dir))
    fail(ErrorCode::io, fmt::format("'{}' is not a run directory", dir.string()));
  const auto cfg = load_config((dir / "config.json").string());
  RunReport rep = analyze_raw(cfg, read_raw(dir, cfg.mode));
  write_derived(dir, cfg, rep);
  return rep;
}

std::string report_text(const ScenarioConfig& cfg, const RunReport& rep) {
  std::string out;
  auto kv = [&](std::string_view key, const std::string& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  kv("mode", mode_name(cfg.mode));
  kv("seed", cfg.run.seed ? std::to_string(*cfg.run.seed) : "none");
  kv("trials", std::to_string(cfg.run.trials));
  kv("status", rep.passed() ? "pass" : "fail");
  const auto passed = std::count_if(rep.checks.begin(), rep.checks.end(),
                                    [](const Check& c) { return c.passed; });
  kv("checks_passed", fmt::format("{}/{}", passed, rep.checks.size()));
  if (cfg.mode == Mode::cw) {
    kv("xi", compact(rep.xi));
    kv("xi_source", cfg.analysis.xi ? "configured" : "calibrated");
  } else {
    kv("beta_product", compact(rep.xi));
  }
  for (const auto& [k, v] : rep.raw.measurements) kv(fmt::format("measured.{}", k), compact(v));
  if (rep.doppler) {
    kv("doppler_shift", compact(rep.doppler->doppler_shift));
    kv("doppler_stderr", compact(rep.doppler->std_error));
    kv("doppler_bins", std::to_string(rep.doppler->bins));
  }
  if (rep.crosscheck) {
    kv("crosscheck_rms", compact(rep.crosscheck->rms));
    kv("crosscheck_max_abs", compact(rep.crosscheck->max_abs));
    kv("crosscheck_mean_bias", compact(rep.crosscheck->mean_bias));
    kv("crosscheck_tolerance", compact(rep.crosscheck->tolerance));
  }
  for (const auto& c : rep.checks) {
    if (c.upper_bound)
      kv(fmt::format("check.{}", c.name),
         fmt::format("{} measured={} below={} stderr={}", c.passed ? "pass" : "fail",
                     compact(c.measured), compact(c.tolerance), compact(c.std_error)));
    else
      kv(fmt::format("check.{}", c.name),
         fmt::format("{} measured={} expected={} tolerance={} stderr={}",
                     c.passed ? "pass" : "fail", compact(c.measured), compact(c.expected),
                     compact(c.tolerance), compact(c.std_error)));
  }
  for (const auto& w : rep.warnings) kv("warning", w);
  return out;
}

std::string oracle_report(const ScenarioConfig& cfg) {
  const auto& o = cfg.oracle;
  std::string out;
  auto kv = [&](std::string_view key, double v) {
    out += fmt::format("{} = {}\n", key, compact(v));
  };
  auto flag = [&](std::string_view key, bool v) {
    out += fmt::format("{} = {}\n", key, v ? "true" : "false");
  };
  using oracle::PulsedWeight;
  kv("cw.xi", oracle::xi_cw(o.cw));
  kv("cw.gamma22", oracle::gamma22_cw(o.cw));
  kv("cw.fringe_mean", oracle::fringe_mean_cw(o.cw));
  kv("cw.visibility", oracle::visibility_cw(o.cw));
  kv("pulsed.effective_coherence", oracle::effective_coherence(o.pulsed));
  kv("pulsed.rate_consistent", oracle::rate_pulsed(o.pulsed, PulsedWeight::consistent));
  kv("pulsed.rate_printed", oracle::rate_pulsed(o.pulsed, PulsedWeight::printed));
  kv("pulsed.visibility_consistent", oracle::visibility_pulsed(o.pulsed, PulsedWeight::consistent));
  kv("pulsed.visibility_printed", oracle::visibility_pulsed(o.pulsed, PulsedWeight::printed));
  kv("antibunched.gamma22", oracle::gamma22_antibunched(o.antibunched, o.cw));
  kv("antibunched.lo_pair_term", oracle::lo_pair_term(o.antibunched, o.cw));
  const auto z = oracle::signal_rate_zeta(o.antibunched);
  kv("antibunched.zeta", z.zeta);
  kv("antibunched.zeta_bound", z.zeta_bound);
  flag("antibunched.long_window", z.long_window);
  flag("antibunched.delayed_window", z.delayed_window);
  flag("antibunched.window_covered", z.window_covered);
  return out;
}

std::string_view csv_schema_text() {
  return R"(phbt run directory

config.json          configuration snapshot (canonical form, includes the seed)
runtime.txt          wall-clock runtime; the only non-deterministic file

raw data (17 significant digits; read back by `analyze`)
fringes.csv          one row per fringe point
  tau                cw: fringe delay, s  (pulsed files name this column dN)
  dN                 pulsed: N_e - N_o, electronic minus optical delay in pulses
  phase              scanned LO phase difference, rad
  value              cw: g2 at the fringe delay; pulsed: coincidences per pulse pair
  stderr             standard error of value (0 when not estimated)
reference_g2.csv     LO-blocked intensity correlation
  tau | dN           lag, s (cw) or pulse offset relative to the optical delay (pulsed)
  g2                 normalized correlation
  stderr             standard error across windows (cw) or records (pulsed)
  coincidences       pulsed only: summed coincidence count
  pairs              pulsed only: summed gate pairs
measurements.csv     scalar measurements
  name, value        e.g. fringe_click_rate_1, reference_windows

derived (10 significant digits; rewritten by `analyze`)
fits.csv             fringe fits value = m [1 + V cos(phase + phi0)]
  tau | dN, mean_level, visibility, phase_offset (rad), residual_rms,
  visibility_stderr, phase_stderr, points
coherence.csv        reconstructed coherence function
  tau | dN           delay
  gamma_abs          |gamma| from the visibility inversion
  gamma_phase        arg gamma, rad, unwrapped and referenced to the zero delay
  stderr             standard error of gamma_abs
  phase_stderr       standard error of gamma_phase
  flagged            1 when the inversion was clamped
reference_gamma.csv  |gamma| = sqrt(max(g2 - 1, 0)) from reference_g2.csv
  tau | dN, gamma_abs, stderr, flagged (1: g2 below 1 - 3 stderr)
oracle.csv           measured values next to closed-form predictions
  tau | dN, visibility, oracle_visibility, gamma_abs, oracle_gamma_abs,
  gamma_phase, oracle_gamma_phase
checks.csv           pass/fail checks
  name               check name, e.g. visibility(tau=0)
  measured, expected, tolerance, stderr
  kind               within: |measured - expected| <= tolerance; below: measured < tolerance
  passed             1 or 0
report.txt           key = value summary (xi, Doppler fit, crosscheck, checks, warnings)

sweep directory
sweep_summary.csv    one row per (value, delay)
  value              swept parameter value (the delay itself for a tau sweep)
  tau                fringe delay, s (cw) or dN (pulsed)
  visibility, gamma_abs, gamma_phase, oracle_visibility
run_NNN/, run_tau/   one run directory per value (a tau sweep is a single run)
)";
}

}  // namespace phbt
