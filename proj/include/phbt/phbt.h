#ifndef PHBT_PHBT_H
#define PHBT_PHBT_H

/* C interface of the phbt library: phase-sensitive intensity
 * interferometry simulation and analysis.
 *
 * Objects are opaque handles created by phbt_* functions and released with
 * the matching *_free. Every fallible call returns a phbt_status; on failure
 * phbt_last_error() holds a message for the calling thread. Strings returned
 * through char** are owned by the caller and released with phbt_string_free.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PHBT_BUILDING_LIBRARY)
#    define PHBT_API __declspec(dllexport)
#  else
#    define PHBT_API __declspec(dllimport)
#  endif
#else
#  define PHBT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum phbt_status {
  PHBT_OK = 0,
  PHBT_ERR_INVALID_ARGUMENT,
  PHBT_ERR_SAMPLING_TOO_COARSE,
  PHBT_ERR_DURATION_TOO_SHORT,
  PHBT_ERR_GRID_MISMATCH,
  PHBT_ERR_SHIFT_EXCEEDS_RECORD,
  PHBT_ERR_OUT_OF_RANGE,
  PHBT_ERR_WINDOW_LONGER_THAN_RECORD,
  PHBT_ERR_EMPTY_OVERLAP,
  PHBT_ERR_FIT_DEGENERATE,
  PHBT_ERR_NO_REAL_ROOT,
  PHBT_ERR_MISSING_REFERENCE_DELAY,
  PHBT_ERR_INSUFFICIENT_BINS,
  PHBT_ERR_CONFIG_INVALID,
  PHBT_ERR_UNKNOWN_PARAMETER,
  PHBT_ERR_IO,
  PHBT_ERR_NOT_AVAILABLE, /* requested result is absent from the report */
  PHBT_ERR_INTERNAL
} phbt_status;

typedef struct phbt_scenario phbt_scenario;
typedef struct phbt_report phbt_report;

typedef struct phbt_run_options {
  const char* out_dir; /* NULL: do not write a run directory */
  int threads;         /* <= 0 means 1 */
} phbt_run_options;

typedef struct phbt_check {
  const char* name; /* valid while the report lives */
  double measured;
  double expected;
  double tolerance;
  double std_error;
  int upper_bound; /* 1: passes when measured < tolerance */
  int passed;
} phbt_check;

typedef struct phbt_fringe_fit {
  double tau;
  double mean_level;
  double visibility;
  double phase_offset;
  double residual_rms;
  double visibility_stderr;
  double phase_stderr;
  size_t points;
} phbt_fringe_fit;

typedef struct phbt_coherence_point {
  double tau;
  double gamma_abs;
  double gamma_phase;
  double gamma_stderr;
  double phase_stderr;
  int flagged;
} phbt_coherence_point;

typedef struct phbt_oracle_pair {
  double tau;
  double visibility;
  double oracle_visibility;
  double gamma_abs;
  double oracle_gamma_abs;
  double gamma_phase;
  double oracle_gamma_phase;
} phbt_oracle_pair;

typedef enum phbt_clamp_policy {
  PHBT_CLAMP = 0,
  PHBT_ALLOW = 1,
  PHBT_ERROR = 2
} phbt_clamp_policy;

PHBT_API const char* phbt_version(void);
/* Kebab-case category, e.g. "config-invalid"; "ok" for PHBT_OK. */
PHBT_API const char* phbt_status_name(phbt_status status);
PHBT_API const char* phbt_last_error(void);
PHBT_API void phbt_string_free(char* s);

PHBT_API const char* phbt_config_schema(void);
PHBT_API const char* phbt_csv_schema(void);

/* scenarios */
PHBT_API phbt_status phbt_scenario_load(const char* path, phbt_scenario** out);
PHBT_API phbt_status phbt_scenario_from_json(const char* json_text, phbt_scenario** out);
PHBT_API void phbt_scenario_free(phbt_scenario* scenario);
PHBT_API phbt_status phbt_scenario_set_seed(phbt_scenario* scenario, uint64_t seed);
PHBT_API phbt_status phbt_scenario_set_trials(phbt_scenario* scenario, int trials);
/* Numeric field by dotted path, e.g. "source.doppler_shift". */
PHBT_API phbt_status phbt_scenario_set_number(phbt_scenario* scenario, const char* path,
                                              double value);
/* "path=value" with value parsed as JSON (falls back to a string). */
PHBT_API phbt_status phbt_scenario_set(phbt_scenario* scenario, const char* assignment);
PHBT_API phbt_status phbt_scenario_validate(const phbt_scenario* scenario);
PHBT_API phbt_status phbt_scenario_to_json(const phbt_scenario* scenario, char** out);
/* output.dir of the configuration. */
PHBT_API const char* phbt_scenario_output_dir(const phbt_scenario* scenario);
/* "cw", "pulsed" or "oracle". */
PHBT_API const char* phbt_scenario_mode(const phbt_scenario* scenario);
/* Closed-form predictions of the scenario's oracle block, key = value text. */
PHBT_API phbt_status phbt_scenario_oracle(const phbt_scenario* scenario, char** out);

/* runs */
PHBT_API phbt_status phbt_run(const phbt_scenario* scenario, const phbt_run_options* options,
                              phbt_report** out);
/* Writes sweep_summary.csv and per-value run directories under
 * options->out_dir (if set). rows_out (optional) receives the summary length. */
PHBT_API phbt_status phbt_sweep(const phbt_scenario* scenario, const char* parameter,
                                const double* values, size_t count,
                                const phbt_run_options* options, size_t* rows_out);
/* Re-analyzes a run directory's raw data and rewrites its derived files. */
PHBT_API phbt_status phbt_analyze(const char* run_dir, phbt_report** out);

/* reports */
PHBT_API void phbt_report_free(phbt_report* report);
PHBT_API int phbt_report_passed(const phbt_report* report);
PHBT_API double phbt_report_runtime(const phbt_report* report);
PHBT_API double phbt_report_xi(const phbt_report* report);
PHBT_API size_t phbt_report_check_count(const phbt_report* report);
PHBT_API phbt_status phbt_report_check(const phbt_report* report, size_t index,
                                       phbt_check* out);
/* Looks a check up by name; PHBT_ERR_NOT_AVAILABLE if absent. */
PHBT_API phbt_status phbt_report_find_check(const phbt_report* report, const char* name,
                                            phbt_check* out);
PHBT_API size_t phbt_report_fit_count(const phbt_report* report);
PHBT_API phbt_status phbt_report_fit(const phbt_report* report, size_t index,
                                     phbt_fringe_fit* out);
PHBT_API size_t phbt_report_coherence_count(const phbt_report* report);
PHBT_API phbt_status phbt_report_coherence(const phbt_report* report, size_t index,
                                           phbt_coherence_point* out);
PHBT_API size_t phbt_report_oracle_count(const phbt_report* report);
PHBT_API phbt_status phbt_report_oracle(const phbt_report* report, size_t index,
                                        phbt_oracle_pair* out);
PHBT_API size_t phbt_report_reference_count(const phbt_report* report);
PHBT_API phbt_status phbt_report_reference(const phbt_report* report, size_t index,
                                           double* tau, double* g2, double* std_error);
PHBT_API phbt_status phbt_report_doppler(const phbt_report* report, double* shift,
                                         double* std_error);
PHBT_API phbt_status phbt_report_crosscheck(const phbt_report* report, double* rms,
                                            double* max_abs, double* mean_bias);
PHBT_API phbt_status phbt_report_measurement(const phbt_report* report, const char* name,
                                             double* value);
PHBT_API size_t phbt_report_warning_count(const phbt_report* report);
PHBT_API const char* phbt_report_warning(const phbt_report* report, size_t index);
/* The report.txt content. */
PHBT_API phbt_status phbt_report_text(const phbt_report* report, char** out);

/* closed-form helpers */
PHBT_API phbt_status phbt_visibility_to_gamma(double visibility, double xi,
                                              phbt_clamp_policy policy, double* gamma_abs,
                                              int* flagged);
PHBT_API double phbt_thermal_visibility(double gamma_abs, double xi);

#ifdef __cplusplus
}
#endif

#endif /* PHBT_PHBT_H */
