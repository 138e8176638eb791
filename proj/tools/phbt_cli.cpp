// phbt command-line front end; everything goes through the C interface.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phbt/phbt.h"

namespace {

// Exit codes: 0 ok, 1 checks failed under --strict, 2 usage, 3 configuration,
// 4 file I/O, 5 simulation or analysis error.
constexpr int exit_strict = 1;
constexpr int exit_usage = 2;
constexpr int exit_config = 3;
constexpr int exit_io = 4;
constexpr int exit_runtime = 5;

struct Failure {
  phbt_status status;
  std::string message;
};

void check(phbt_status s) {
  if (s != PHBT_OK) throw Failure{s, phbt_last_error()};
}

int exit_code(phbt_status s) {
  switch (s) {
    case PHBT_ERR_CONFIG_INVALID:
    case PHBT_ERR_UNKNOWN_PARAMETER: return exit_config;
    case PHBT_ERR_IO: return exit_io;
    default: return exit_runtime;
  }
}

struct ScenarioDeleter {
  void operator()(phbt_scenario* s) const { phbt_scenario_free(s); }
};
struct ReportDeleter {
  void operator()(phbt_report* r) const { phbt_report_free(r); }
};
struct StringDeleter {
  void operator()(char* s) const { phbt_string_free(s); }
};
using Scenario = std::unique_ptr<phbt_scenario, ScenarioDeleter>;
using Report = std::unique_ptr<phbt_report, ReportDeleter>;
using String = std::unique_ptr<char, StringDeleter>;

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> trials;
  int threads = 1;
  std::vector<std::string> set;
  bool strict = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "scenario configuration (JSON)")->required();
  cmd->add_option("--seed", f.seed, "root seed (overrides run.seed)");
  cmd->add_option("--out", f.out, "output directory (overrides output.dir)");
  cmd->add_option("--trials", f.trials, "independent trials (overrides run.trials)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--set", f.set, "override a config field, path=value (repeatable)");
  cmd->add_flag("--strict", f.strict, "exit 1 when any acceptance check fails");
}

Scenario load(const RunFlags& f) {
  phbt_scenario* raw = nullptr;
  check(phbt_scenario_load(f.config.c_str(), &raw));
  Scenario s(raw);
  for (const auto& a : f.set) check(phbt_scenario_set(s.get(), a.c_str()));
  if (f.seed) check(phbt_scenario_set_seed(s.get(), *f.seed));
  if (f.trials) check(phbt_scenario_set_trials(s.get(), *f.trials));
  return s;
}

std::string out_dir(const RunFlags& f, const phbt_scenario* s) {
  return f.out.empty() ? std::string(phbt_scenario_output_dir(s)) : f.out;
}

void expect_mode(const phbt_scenario* s, const char* mode) {
  if (std::string(phbt_scenario_mode(s)) != mode)
    throw Failure{PHBT_ERR_CONFIG_INVALID,
                  std::string("config mode is '") + phbt_scenario_mode(s) + "', this command runs '" +
                      mode + "' scenarios"};
}

int simulate(const RunFlags& f, const char* mode) {
  auto s = load(f);
  expect_mode(s.get(), mode);
  check(phbt_scenario_validate(s.get()));
  const auto dir = out_dir(f, s.get());
  phbt_run_options opts{dir.c_str(), f.threads};
  phbt_report* raw = nullptr;
  check(phbt_run(s.get(), &opts, &raw));
  Report r(raw);
  char* text = nullptr;
  check(phbt_report_text(r.get(), &text));
  String t(text);
  std::fputs(t.get(), stdout);
  std::printf("output = %s\n", dir.c_str());
  return f.strict && !phbt_report_passed(r.get()) ? exit_strict : 0;
}

std::vector<double> parse_values(const std::string& list, const std::string& range) {
  std::vector<double> v;
  if (!range.empty()) {
    double a = 0, b = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(range);
    if (!(ss >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0.0))
      throw Failure{PHBT_ERR_CONFIG_INVALID, "--range must look like start:stop:step with step > 0"};
    const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= n; ++i) v.push_back(a + static_cast<double>(i) * step);
    return v;
  }
  std::istringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Failure{PHBT_ERR_CONFIG_INVALID, "cannot parse sweep value '" + item + "'"};
    }
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phbt: phase-sensitive intensity interferometry simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(phbt_version()));

  RunFlags cw_flags, pulsed_flags, sweep_flags;
  auto* cw = app.add_subcommand("simulate-cw", "run a cw (quasi-continuous) thermal scenario");
  add_run_flags(cw, cw_flags);
  auto* pulsed = app.add_subcommand("simulate-pulsed", "run a pulsed thermal scenario");
  add_run_flags(pulsed, pulsed_flags);

  auto* sweep = app.add_subcommand("sweep", "run a scenario once per value of one parameter");
  add_run_flags(sweep, sweep_flags);
  std::string sweep_param, sweep_values, sweep_range;
  sweep->add_option("--param", sweep_param, "dotted config path, or tau for fringe delays")
      ->required();
  sweep->add_option("--values", sweep_values, "comma-separated values");
  sweep->add_option("--range", sweep_range, "start:stop:step (inclusive)");

  std::string oracle_config;
  std::vector<std::string> oracle_params;
  auto* oracle = app.add_subcommand("oracle", "evaluate the closed-form predictions");
  oracle->add_option("--config", oracle_config, "configuration with an oracle block");
  oracle->add_option("--param", oracle_params,
                     "override, e.g. cw.gamma_abs=0.5 or oracle.pulsed.dN=1 (repeatable)");

  std::string analyze_dir;
  bool analyze_schema = false;
  auto* analyze = app.add_subcommand("analyze", "re-run the analysis on a run directory");
  analyze->add_option("dir", analyze_dir, "run directory");
  analyze->add_flag("--schema", analyze_schema, "print the CSV column documentation");

  std::string validate_config;
  bool validate_schema = false;
  auto* validate = app.add_subcommand("validate", "check a configuration file");
  validate->add_option("--config", validate_config, "scenario configuration (JSON)");
  validate->add_flag("--schema", validate_schema, "print the configuration schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::fprintf(stderr, "error: category=usage\n");
    return exit_usage;
  }

  try {
    if (*cw) return simulate(cw_flags, "cw");
    if (*pulsed) return simulate(pulsed_flags, "pulsed");

    if (*sweep) {
      auto s = load(sweep_flags);
      check(phbt_scenario_validate(s.get()));
      const auto values = parse_values(sweep_values, sweep_range);
      const auto dir = out_dir(sweep_flags, s.get());
      phbt_run_options opts{dir.c_str(), sweep_flags.threads};
      std::size_t rows = 0;
      check(phbt_sweep(s.get(), sweep_param.c_str(), values.data(), values.size(), &opts, &rows));
      std::printf("parameter = %s\nvalues = %zu\nrows = %zu\nsummary = %s/sweep_summary.csv\n",
                  sweep_param.c_str(), values.size(), rows, dir.c_str());
      return 0;
    }

    if (*oracle) {
      phbt_scenario* raw = nullptr;
      if (oracle_config.empty())
        check(phbt_scenario_from_json("{\"mode\": \"oracle\"}", &raw));
      else
        check(phbt_scenario_load(oracle_config.c_str(), &raw));
      Scenario s(raw);
      for (const auto& p : oracle_params) {
        const auto st = phbt_scenario_set(s.get(), p.c_str());
        if (st == PHBT_ERR_UNKNOWN_PARAMETER && p.rfind("oracle.", 0) != 0)
          check(phbt_scenario_set(s.get(), ("oracle." + p).c_str()));
        else
          check(st);
      }
      char* text = nullptr;
      check(phbt_scenario_oracle(s.get(), &text));
      String t(text);
      std::fputs(t.get(), stdout);
      return 0;
    }

    if (*analyze) {
      if (analyze_schema) {
        std::fputs(phbt_csv_schema(), stdout);
        return 0;
      }
      if (analyze_dir.empty())
        throw Failure{PHBT_ERR_INVALID_ARGUMENT, "analyze needs a run directory (or --schema)"};
      phbt_report* raw = nullptr;
      check(phbt_analyze(analyze_dir.c_str(), &raw));
      Report r(raw);
      char* text = nullptr;
      check(phbt_report_text(r.get(), &text));
      String t(text);
      std::fputs(t.get(), stdout);
      return 0;
    }

    if (*validate) {
      if (validate_schema) {
        std::fputs(phbt_config_schema(), stdout);
        return 0;
      }
      if (validate_config.empty())
        throw Failure{PHBT_ERR_INVALID_ARGUMENT, "validate needs --config (or --schema)"};
      phbt_scenario* raw = nullptr;
      check(phbt_scenario_load(validate_config.c_str(), &raw));
      Scenario s(raw);
      check(phbt_scenario_validate(s.get()));
      std::printf("ok mode=%s\n", phbt_scenario_mode(s.get()));
      return 0;
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: category=%s message=%s\n", phbt_status_name(f.status),
                 f.message.c_str());
    return f.status == PHBT_ERR_INVALID_ARGUMENT ? exit_usage : exit_code(f.status);
  }
  return exit_usage;
}
