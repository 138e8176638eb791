#include <cstring>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "phbt/phbt.h"
#include "support.hpp"

namespace {

const char* small_cw = R"({
  "mode": "cw",
  "lo": {"match_source": true},
  "scan": {"delays": [0.0, 1e-6], "phase_points": 8},
  "run": {"seed": 5, "window": 0.5e-3, "windows_per_point": 2, "max_tau": 40e-6},
  "analysis": {"xi": 1.0}
})";

}  // namespace

TEST_CASE("status names are the kebab-case error categories") {
  CHECK(std::string(phbt_status_name(PHBT_OK)) == "ok");
  CHECK(std::string(phbt_status_name(PHBT_ERR_CONFIG_INVALID)) == "config-invalid");
  CHECK(std::string(phbt_status_name(PHBT_ERR_UNKNOWN_PARAMETER)) == "unknown-parameter");
  CHECK(std::string(phbt_status_name(PHBT_ERR_NOT_AVAILABLE)) == "not-available");
  CHECK(std::strlen(phbt_version()) > 0);
  CHECK(std::strlen(phbt_config_schema()) > 100);
  CHECK(std::strlen(phbt_csv_schema()) > 100);
}

TEST_CASE("scenario handles: load, edit, validate") {
  phbt_scenario* s = nullptr;
  CHECK(phbt_scenario_from_json("{\"mode\": \"cw\", \"oops\": 1}", &s) ==
        PHBT_ERR_CONFIG_INVALID);
  CHECK(std::string(phbt_last_error()).find("oops") != std::string::npos);
  CHECK(phbt_scenario_load("/nonexistent.json", &s) == PHBT_ERR_IO);
  CHECK(phbt_scenario_from_json(nullptr, &s) == PHBT_ERR_INVALID_ARGUMENT);

  REQUIRE(phbt_scenario_from_json("{\"mode\": \"cw\"}", &s) == PHBT_OK);
  CHECK(std::string(phbt_scenario_mode(s)) == "cw");
  CHECK(phbt_scenario_validate(s) == PHBT_ERR_CONFIG_INVALID);  // no seed
  CHECK(phbt_scenario_set_seed(s, 42) == PHBT_OK);
  CHECK(phbt_scenario_validate(s) == PHBT_OK);
  CHECK(phbt_scenario_set_number(s, "source.nope", 1.0) == PHBT_ERR_UNKNOWN_PARAMETER);
  CHECK(phbt_scenario_set(s, "output.dir=\"elsewhere\"") == PHBT_OK);
  CHECK(std::string(phbt_scenario_output_dir(s)) == "elsewhere");
  CHECK(phbt_scenario_set_trials(s, 0) != PHBT_OK);

  char* json = nullptr;
  REQUIRE(phbt_scenario_to_json(s, &json) == PHBT_OK);
  CHECK(std::string(json).find("\"seed\": 42") != std::string::npos);
  phbt_string_free(json);
  phbt_scenario_free(s);
}

TEST_CASE("runs and report accessors") {
  phbt_scenario* s = nullptr;
  REQUIRE(phbt_scenario_from_json(small_cw, &s) == PHBT_OK);
  const auto dir = support::scratch_dir("capi").string();
  phbt_run_options opts{dir.c_str(), 2};
  phbt_report* r = nullptr;
  REQUIRE(phbt_run(s, &opts, &r) == PHBT_OK);
  CHECK(std::filesystem::exists(dir + "/report.txt"));

  const size_t nchecks = phbt_report_check_count(r);
  CHECK(nchecks > 0);
  phbt_check c;
  REQUIRE(phbt_report_check(r, 0, &c) == PHBT_OK);
  CHECK(std::strlen(c.name) > 0);
  CHECK(phbt_report_check(r, nchecks, &c) == PHBT_ERR_OUT_OF_RANGE);
  REQUIRE(phbt_report_find_check(r, "visibility(tau=0)", &c) == PHBT_OK);
  CHECK(c.expected == doctest::Approx(0.4).epsilon(0.01));
  CHECK(phbt_report_find_check(r, "no-such-check", &c) == PHBT_ERR_NOT_AVAILABLE);

  CHECK(phbt_report_fit_count(r) == 2);
  phbt_fringe_fit f;
  REQUIRE(phbt_report_fit(r, 0, &f) == PHBT_OK);
  CHECK(f.points == 8);
  CHECK(phbt_report_coherence_count(r) == 2);
  CHECK(phbt_report_oracle_count(r) == 2);
  CHECK(phbt_report_reference_count(r) > 0);
  double tau = 0, g2 = 0, se = 0;
  CHECK(phbt_report_reference(r, 0, &tau, &g2, &se) == PHBT_OK);
  double shift = 0, err = 0;
  CHECK(phbt_report_doppler(r, &shift, &err) == PHBT_ERR_NOT_AVAILABLE);
  double value = 0;
  CHECK(phbt_report_measurement(r, "fringe_mean_current_1", &value) == PHBT_OK);
  CHECK(value > 0.0);
  CHECK(phbt_report_xi(r) == 1.0);
  CHECK(phbt_report_runtime(r) > 0.0);

  char* text = nullptr;
  REQUIRE(phbt_report_text(r, &text) == PHBT_OK);
  CHECK(std::string(text).find("mode = cw") != std::string::npos);
  phbt_string_free(text);
  phbt_report_free(r);

  phbt_report* again = nullptr;
  REQUIRE(phbt_analyze(dir.c_str(), &again) == PHBT_OK);
  CHECK(phbt_report_check_count(again) == nchecks);
  phbt_report_free(again);

  const double values[] = {0.0, 1e-6, 2e-6};
  size_t rows = 0;
  phbt_run_options sweep_opts{nullptr, 1};
  CHECK(phbt_sweep(s, "tau", values, 3, &sweep_opts, &rows) == PHBT_OK);
  CHECK(rows == 3);
  CHECK(phbt_sweep(s, "bogus.path", values, 3, &sweep_opts, &rows) ==
        PHBT_ERR_UNKNOWN_PARAMETER);
  phbt_scenario_free(s);
}

TEST_CASE("oracle text and closed-form helpers") {
  phbt_scenario* s = nullptr;
  REQUIRE(phbt_scenario_from_json("{\"mode\": \"oracle\"}", &s) == PHBT_OK);
  CHECK(phbt_scenario_set(s, "oracle.cw.gamma_abs=0.5") == PHBT_OK);
  char* text = nullptr;
  REQUIRE(phbt_scenario_oracle(s, &text) == PHBT_OK);
  CHECK(std::string(text).find("cw.visibility") != std::string::npos);
  phbt_string_free(text);
  phbt_scenario_free(s);

  double g = 0;
  int flagged = -1;
  CHECK(phbt_visibility_to_gamma(0.35, 0.875, PHBT_CLAMP, &g, &flagged) == PHBT_OK);
  CHECK(g == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(flagged == 0);
  CHECK(phbt_visibility_to_gamma(0.6, 1.0, PHBT_ERROR, &g, &flagged) == PHBT_ERR_NO_REAL_ROOT);
  CHECK(phbt_thermal_visibility(1.0, 1.0) == doctest::Approx(0.4));
}
