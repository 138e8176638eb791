#include <filesystem>
#include <string>

#include "doctest.h"
#include "phbt/config.hpp"
#include "phbt/error.hpp"
#include "support.hpp"

using namespace phbt;

namespace {

const std::filesystem::path configs = std::filesystem::path(PHBT_SOURCE_DIR) / "configs";

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::io;
}

}  // namespace

TEST_CASE("every shipped configuration parses, validates and survives a JSON round trip") {
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(configs)) {
    if (entry.path().extension() != ".json") continue;
    ++n;
    CAPTURE(entry.path().string());
    const auto cfg = load_config(entry.path().string());
    CHECK_NOTHROW(cfg.validate());
    const auto text = to_json(cfg);
    CHECK(to_json(parse_config(text)) == text);
  }
  CHECK(n >= 8);
}

TEST_CASE("unknown keys and bad values are rejected as config-invalid") {
  CHECK(code_of([] { parse_config(R"({"mode": "cw", "bogus": 1})"); }) ==
        ErrorCode::config_invalid);
  CHECK(code_of([] { parse_config(R"({"mode": "cw", "source": {"mean_intensty": 1}})"); }) ==
        ErrorCode::config_invalid);
  CHECK(code_of([] { parse_config(R"({"mode": "sideways"})"); }) == ErrorCode::config_invalid);
  CHECK(code_of([] { parse_config(R"({"schema_version": 99, "mode": "cw"})"); }) ==
        ErrorCode::config_invalid);
  CHECK(code_of([] { parse_config("{not json"); }) == ErrorCode::config_invalid);
  CHECK(code_of([] { load_config("/nonexistent/config.json"); }) == ErrorCode::io);
}

TEST_CASE("validation: a seed is mandatory and grids must be consistent") {
  auto cfg = parse_config(R"({"mode": "cw", "scan": {"delays": [0.0]}})");
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::config_invalid);
  cfg.run.seed = 1;
  CHECK_NOTHROW(cfg.validate());
  cfg.run.dt = 1e-6;  // coarser than T_c / 10
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::config_invalid);
  cfg.run.dt = 0.25e-6;
  cfg.scan.delays = {0.3e-6};
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::config_invalid);

  auto pulsed = load_config((configs / "pulsed_matched.json").string());
  pulsed.run.pulses_per_point = 5000;
  CHECK(code_of([&] { pulsed.validate(); }) == ErrorCode::config_invalid);
  pulsed = load_config((configs / "pulsed_matched.json").string());
  pulsed.pulsed.beta1 = 1.2;
  CHECK(code_of([&] { pulsed.validate(); }) == ErrorCode::config_invalid);
  pulsed = load_config((configs / "pulsed_matched.json").string());
  pulsed.scan.delays = {30e-9};
  CHECK(code_of([&] { pulsed.validate(); }) == ErrorCode::config_invalid);
}

TEST_CASE("analysis.xi accepts a number or calibrate") {
  auto cal = parse_config(R"({"mode": "cw", "analysis": {"xi": "calibrate"}})");
  CHECK_FALSE(cal.analysis.xi.has_value());
  auto fixed = parse_config(R"({"mode": "cw", "analysis": {"xi": 0.875}})");
  REQUIRE(fixed.analysis.xi.has_value());
  CHECK(*fixed.analysis.xi == 0.875);
  CHECK(code_of([] { parse_config(R"({"mode": "cw", "analysis": {"xi": "guess"}})"); }) ==
        ErrorCode::config_invalid);
}

TEST_CASE("dotted-path overrides") {
  auto cfg = load_config((configs / "cw_matched.json").string());
  set_parameter(cfg, "source.doppler_shift", 1234.5);
  CHECK(cfg.source.doppler_shift == 1234.5);
  set_parameter(cfg, "run.trials", 3);
  CHECK(cfg.run.trials == 3);
  CHECK(code_of([&] { set_parameter(cfg, "source.nothing", 1.0); }) ==
        ErrorCode::unknown_parameter);
  CHECK(code_of([&] { set_parameter(cfg, "source.lineshape", 1.0); }) ==
        ErrorCode::unknown_parameter);

  set_parameter_text(cfg, "source.lineshape=lorentzian");
  CHECK(cfg.source.lineshape == Lineshape::lorentzian);
  set_parameter_text(cfg, "scan.delays=[0, 1e-6]");
  CHECK(cfg.scan.delays.size() == 2);
  set_parameter_text(cfg, "lo.blocked=true");
  CHECK(cfg.lo.blocked);
  CHECK_THROWS_AS(set_parameter_text(cfg, "no-equals-sign"), Error);
}

TEST_CASE("schema text documents every top-level section") {
  const auto s = std::string(schema_text());
  for (const char* key : {"source.", "lo.", "detector.", "delays.optical", "scan.", "run.seed",
                          "pulsed.", "analysis.", "output.", "oracle."})
    CHECK_MESSAGE(s.find(key) != std::string::npos, key);
}
