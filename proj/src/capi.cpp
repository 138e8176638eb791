#include "phbt/phbt.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "phbt/analysis.hpp"
#include "phbt/config.hpp"
#include "phbt/error.hpp"
#include "phbt/scenario.hpp"

struct phbt_scenario {
  phbt::ScenarioConfig cfg;
};

struct phbt_report {
  phbt::ScenarioConfig cfg;
  phbt::RunReport report;
};

namespace {

thread_local std::string last_error;

phbt_status status_of(phbt::ErrorCode code) {
  return static_cast<phbt_status>(static_cast<int>(code) + 1);
}

template <class F>
phbt_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const phbt::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return PHBT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PHBT_ERR_INTERNAL;
  }
}

phbt_status null_argument(const char* what) {
  last_error = std::string(what) + " must not be NULL";
  return PHBT_ERR_INVALID_ARGUMENT;
}

phbt_status not_available(const char* what) {
  last_error = what;
  return PHBT_ERR_NOT_AVAILABLE;
}

phbt_status index_error(std::size_t index, std::size_t size) {
  last_error = "index " + std::to_string(index) + " out of range (size " + std::to_string(size) + ")";
  return PHBT_ERR_OUT_OF_RANGE;
}

char* duplicate(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

phbt::RunOptions run_options(const phbt_run_options* options) {
  phbt::RunOptions o;
  if (options != nullptr) {
    o.threads = options->threads > 0 ? options->threads : 1;
    if (options->out_dir != nullptr && options->out_dir[0] != '\0') o.out_dir = options->out_dir;
  }
  return o;
}

phbt_check to_c(const phbt::Check& c) {
  return {c.name.c_str(), c.measured, c.expected,          c.tolerance,
          c.std_error,    c.upper_bound ? 1 : 0, c.passed ? 1 : 0};
}

}  // namespace

extern "C" {

const char* phbt_version(void) { return "1.0.0"; }

const char* phbt_status_name(phbt_status status) {
  if (status == PHBT_OK) return "ok";
  if (status == PHBT_ERR_NOT_AVAILABLE) return "not-available";
  if (status == PHBT_ERR_INTERNAL) return "internal";
  if (status > PHBT_OK && status < PHBT_ERR_NOT_AVAILABLE)
    return phbt::category_name(static_cast<phbt::ErrorCode>(static_cast<int>(status) - 1));
  return "unknown";
}

const char* phbt_last_error(void) { return last_error.c_str(); }

void phbt_string_free(char* s) { std::free(s); }

const char* phbt_config_schema(void) { return phbt::schema_text().data(); }
const char* phbt_csv_schema(void) { return phbt::csv_schema_text().data(); }

phbt_status phbt_scenario_load(const char* path, phbt_scenario** out) {
  if (path == nullptr || out == nullptr) return null_argument("path and out");
  return guarded([&] {
    *out = new phbt_scenario{phbt::load_config(path)};
    return PHBT_OK;
  });
}

phbt_status phbt_scenario_from_json(const char* json_text, phbt_scenario** out) {
  if (json_text == nullptr || out == nullptr) return null_argument("json_text and out");
  return guarded([&] {
    *out = new phbt_scenario{phbt::parse_config(json_text)};
    return PHBT_OK;
  });
}

void phbt_scenario_free(phbt_scenario* scenario) { delete scenario; }

phbt_status phbt_scenario_set_seed(phbt_scenario* scenario, uint64_t seed) {
  if (scenario == nullptr) return null_argument("scenario");
  scenario->cfg.run.seed = seed;
  return PHBT_OK;
}

phbt_status phbt_scenario_set_trials(phbt_scenario* scenario, int trials) {
  if (scenario == nullptr) return null_argument("scenario");
  if (trials < 1) {
    last_error = "trials must be >= 1";
    return PHBT_ERR_CONFIG_INVALID;
  }
  scenario->cfg.run.trials = trials;
  return PHBT_OK;
}

phbt_status phbt_scenario_set_number(phbt_scenario* scenario, const char* path, double value) {
  if (scenario == nullptr || path == nullptr) return null_argument("scenario and path");
  return guarded([&] {
    phbt::set_parameter(scenario->cfg, path, value);
    return PHBT_OK;
  });
}

phbt_status phbt_scenario_set(phbt_scenario* scenario, const char* assignment) {
  if (scenario == nullptr || assignment == nullptr) return null_argument("scenario and assignment");
  return guarded([&] {
    phbt::set_parameter_text(scenario->cfg, assignment);
    return PHBT_OK;
  });
}

phbt_status phbt_scenario_validate(const phbt_scenario* scenario) {
  if (scenario == nullptr) return null_argument("scenario");
  return guarded([&] {
    scenario->cfg.validate();
    return PHBT_OK;
  });
}

phbt_status phbt_scenario_to_json(const phbt_scenario* scenario, char** out) {
  if (scenario == nullptr || out == nullptr) return null_argument("scenario and out");
  return guarded([&] {
    *out = duplicate(phbt::to_json(scenario->cfg));
    return PHBT_OK;
  });
}

const char* phbt_scenario_output_dir(const phbt_scenario* scenario) {
  return scenario != nullptr ? scenario->cfg.output.dir.c_str() : "";
}

const char* phbt_scenario_mode(const phbt_scenario* scenario) {
  return scenario != nullptr ? phbt::mode_name(scenario->cfg.mode) : "";
}

phbt_status phbt_scenario_oracle(const phbt_scenario* scenario, char** out) {
  if (scenario == nullptr || out == nullptr) return null_argument("scenario and out");
  return guarded([&] {
    *out = duplicate(phbt::oracle_report(scenario->cfg));
    return PHBT_OK;
  });
}

phbt_status phbt_run(const phbt_scenario* scenario, const phbt_run_options* options,
                     phbt_report** out) {
  if (scenario == nullptr || out == nullptr) return null_argument("scenario and out");
  return guarded([&] {
    auto rep = phbt::run_scenario(scenario->cfg, run_options(options));
    *out = new phbt_report{scenario->cfg, std::move(rep)};
    return PHBT_OK;
  });
}

phbt_status phbt_sweep(const phbt_scenario* scenario, const char* parameter,
                       const double* values, size_t count, const phbt_run_options* options,
                       size_t* rows_out) {
  if (scenario == nullptr || parameter == nullptr) return null_argument("scenario and parameter");
  if (values == nullptr && count > 0) return null_argument("values");
  return guarded([&] {
    const auto result = phbt::run_sweep(scenario->cfg, parameter,
                                        std::span<const double>(values, count),
                                        run_options(options));
    if (rows_out != nullptr) *rows_out = result.rows.size();
    return PHBT_OK;
  });
}

phbt_status phbt_analyze(const char* run_dir, phbt_report** out) {
  if (run_dir == nullptr || out == nullptr) return null_argument("run_dir and out");
  return guarded([&] {
    const std::filesystem::path dir(run_dir);
    auto rep = phbt::analyze_run_dir(dir);
    *out = new phbt_report{phbt::load_config((dir / "config.json").string()), std::move(rep)};
    return PHBT_OK;
  });
}

void phbt_report_free(phbt_report* report) { delete report; }

int phbt_report_passed(const phbt_report* report) {
  return report != nullptr && report->report.passed() ? 1 : 0;
}

double phbt_report_runtime(const phbt_report* report) {
  return report != nullptr ? report->report.runtime_seconds : 0.0;
}

double phbt_report_xi(const phbt_report* report) {
  return report != nullptr ? report->report.xi : 0.0;
}

size_t phbt_report_check_count(const phbt_report* report) {
  return report != nullptr ? report->report.checks.size() : 0;
}

phbt_status phbt_report_check(const phbt_report* report, size_t index, phbt_check* out) {
  if (report == nullptr || out == nullptr) return null_argument("report and out");
  const auto& checks = report->report.checks;
  if (index >= checks.size()) return index_error(index, checks.size());
  *out = to_c(checks[index]);
  return PHBT_OK;
}

phbt_status phbt_report_find_check(const phbt_report* report, const char* name,
                                   phbt_check* out) {
  if (report == nullptr || name == nullptr || out == nullptr)
    return null_argument("report, name and out");
  const auto* c = report->report.find_check(name);
  if (c == nullptr) return not_available("no check of that name");
  *out = to_c(*c);
  return PHBT_OK;
}

size_t phbt_report_fit_count(const phbt_report* report) {
  return report != nullptr ? report->report.fits.size() : 0;
}

phbt_status phbt_report_fit(const phbt_report* report, size_t index, phbt_fringe_fit* out) {
  if (report == nullptr || out == nullptr) return null_argument("report and out");
  const auto& fits = report->report.fits;
  if (index >= fits.size()) return index_error(index, fits.size());
  const auto& f = fits[index];
  *out = {f.tau,          f.mean_level,        f.visibility,   f.phase_offset,
          f.residual_rms, f.visibility_stderr, f.phase_stderr, f.points};
  return PHBT_OK;
}

size_t phbt_report_coherence_count(const phbt_report* report) {
  return report != nullptr && report->report.coherence ? report->report.coherence->size() : 0;
}

phbt_status phbt_report_coherence(const phbt_report* report, size_t index,
                                  phbt_coherence_point* out) {
  if (report == nullptr || out == nullptr) return null_argument("report and out");
  if (!report->report.coherence) return not_available("report has no coherence function");
  const auto& cf = *report->report.coherence;
  if (index >= cf.size()) return index_error(index, cf.size());
  *out = {cf.tau[index],          cf.gamma_abs[index],    cf.gamma_phase[index],
          cf.gamma_stderr[index], cf.phase_stderr[index], cf.flagged[index] ? 1 : 0};
  return PHBT_OK;
}

size_t phbt_report_oracle_count(const phbt_report* report) {
  return report != nullptr ? report->report.oracle.size() : 0;
}

phbt_status phbt_report_oracle(const phbt_report* report, size_t index, phbt_oracle_pair* out) {
  if (report == nullptr || out == nullptr) return null_argument("report and out");
  const auto& pairs = report->report.oracle;
  if (index >= pairs.size()) return index_error(index, pairs.size());
  const auto& p = pairs[index];
  *out = {p.tau,       p.visibility,       p.oracle_visibility, p.gamma_abs,
          p.oracle_gamma_abs, p.gamma_phase, p.oracle_gamma_phase};
  return PHBT_OK;
}

size_t phbt_report_reference_count(const phbt_report* report) {
  return report != nullptr && report->report.raw.reference ? report->report.raw.reference->size()
                                                           : 0;
}

phbt_status phbt_report_reference(const phbt_report* report, size_t index, double* tau,
                                  double* g2, double* std_error) {
  if (report == nullptr) return null_argument("report");
  if (!report->report.raw.reference) return not_available("report has no reference g2");
  const auto& ref = *report->report.raw.reference;
  if (index >= ref.size()) return index_error(index, ref.size());
  if (tau != nullptr) *tau = ref.tau[index];
  if (g2 != nullptr) *g2 = ref.g2[index];
  if (std_error != nullptr) *std_error = ref.std_error[index];
  return PHBT_OK;
}

phbt_status phbt_report_doppler(const phbt_report* report, double* shift, double* std_error) {
  if (report == nullptr) return null_argument("report");
  if (!report->report.doppler) return not_available("report has no Doppler fit");
  if (shift != nullptr) *shift = report->report.doppler->doppler_shift;
  if (std_error != nullptr) *std_error = report->report.doppler->std_error;
  return PHBT_OK;
}

phbt_status phbt_report_crosscheck(const phbt_report* report, double* rms, double* max_abs,
                                   double* mean_bias) {
  if (report == nullptr) return null_argument("report");
  if (!report->report.crosscheck) return not_available("report has no crosscheck");
  const auto& c = *report->report.crosscheck;
  if (rms != nullptr) *rms = c.rms;
  if (max_abs != nullptr) *max_abs = c.max_abs;
  if (mean_bias != nullptr) *mean_bias = c.mean_bias;
  return PHBT_OK;
}

phbt_status phbt_report_measurement(const phbt_report* report, const char* name,
                                    double* value) {
  if (report == nullptr || name == nullptr || value == nullptr)
    return null_argument("report, name and value");
  const auto& m = report->report.raw.measurements;
  const auto it = m.find(name);
  if (it == m.end()) return not_available("no measurement of that name");
  *value = it->second;
  return PHBT_OK;
}

size_t phbt_report_warning_count(const phbt_report* report) {
  return report != nullptr ? report->report.warnings.size() : 0;
}

const char* phbt_report_warning(const phbt_report* report, size_t index) {
  if (report == nullptr || index >= report->report.warnings.size()) return nullptr;
  return report->report.warnings[index].c_str();
}

phbt_status phbt_report_text(const phbt_report* report, char** out) {
  if (report == nullptr || out == nullptr) return null_argument("report and out");
  return guarded([&] {
    *out = duplicate(phbt::report_text(report->cfg, report->report));
    return PHBT_OK;
  });
}

phbt_status phbt_visibility_to_gamma(double visibility, double xi, phbt_clamp_policy policy,
                                     double* gamma_abs, int* flagged) {
  if (gamma_abs == nullptr) return null_argument("gamma_abs");
  return guarded([&] {
    phbt::ClampPolicy p = phbt::ClampPolicy::clamp;
    if (policy == PHBT_ALLOW) p = phbt::ClampPolicy::allow;
    else if (policy == PHBT_ERROR) p = phbt::ClampPolicy::error;
    const auto g = phbt::visibility_to_gamma(visibility, xi, p);
    *gamma_abs = g.gamma_abs;
    if (flagged != nullptr) *flagged = g.flagged ? 1 : 0;
    return PHBT_OK;
  });
}

double phbt_thermal_visibility(double gamma_abs, double xi) {
  return 2.0 * xi * gamma_abs / (4.0 + gamma_abs * gamma_abs);
}

}  // extern "C"
