#include "phbt/config.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

#include "json.hpp"
#include "phbt/error.hpp"
#include "phbt/serialization.hpp"

namespace phbt {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { fail(ErrorCode::config_invalid, msg); }

template <class E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<Mode> mode_names[] = {
    {Mode::cw, "cw"}, {Mode::pulsed, "pulsed"}, {Mode::oracle, "oracle"}};
constexpr EnumName<Lineshape> lineshape_names[] = {{Lineshape::gaussian, "gaussian"},
                                                   {Lineshape::lorentzian, "lorentzian"}};
constexpr EnumName<FieldStatistics> statistics_names[] = {
    {FieldStatistics::thermal, "thermal"},
    {FieldStatistics::phase_randomized, "phase_randomized"}};
constexpr EnumName<ScanWaveform> waveform_names[] = {
    {ScanWaveform::linear_ramp, "linear_ramp"},
    {ScanWaveform::triangle, "triangle"},
    {ScanWaveform::static_phase, "static"}};
constexpr EnumName<ScanMode> scan_mode_names[] = {{ScanMode::stepped, "stepped"},
                                                  {ScanMode::continuous, "continuous"}};
constexpr EnumName<ClampPolicy> clamp_names[] = {
    {ClampPolicy::clamp, "clamp"}, {ClampPolicy::allow, "allow"}, {ClampPolicy::error, "error"}};
constexpr EnumName<oracle::PulsedWeight> weight_names[] = {
    {oracle::PulsedWeight::consistent, "consistent"},
    {oracle::PulsedWeight::printed, "printed"}};

template <class E, std::size_t N>
const char* name_of(const EnumName<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "?";
}

template <class E, std::size_t N>
E parse_enum(const EnumName<E> (&table)[N], const std::string& s, const std::string& where) {
  for (const auto& e : table)
    if (s == e.name) return e.value;
  std::string options;
  for (const auto& e : table) options += fmt::format("{}'{}'", options.empty() ? "" : ", ", e.name);
  bad(fmt::format("{}: unknown value '{}' (expected one of {})", where, s, options));
}

// Reads one JSON object, remembering consumed keys so leftovers can be
// reported as unknown.
class Table {
 public:
  Table(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(fmt::format("'{}' must be a table (JSON object)", path_));
  }

  bool has(const char* key) const { return j_.contains(key); }

  Table sub(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Table(j_.contains(key) ? j_.at(key) : empty, where(key));
  }

  void number(const char* key, double& out) {
    if (!take(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number()) bad(fmt::format("{} must be a number", where(key)));
    out = v.get<double>();
    if (!std::isfinite(out)) bad(fmt::format("{} must be finite", where(key)));
  }

  template <class Int>
  void integer(const char* key, Int& out) {
    if (!take(key)) return;
    const auto& v = j_.at(key);
    if (v.is_number_integer()) {
      out = static_cast<Int>(v.get<std::int64_t>());
    } else if (v.is_number_unsigned()) {
      out = static_cast<Int>(v.get<std::uint64_t>());
    } else if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>() &&
               std::abs(v.get<double>()) < 9.0e15) {
      out = static_cast<Int>(v.get<double>());
    } else {
      bad(fmt::format("{} must be an integer", where(key)));
    }
  }

  void boolean(const char* key, bool& out) {
    if (!take(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) bad(fmt::format("{} must be true or false", where(key)));
    out = v.get<bool>();
  }

  void string(const char* key, std::string& out) {
    if (!take(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_string()) bad(fmt::format("{} must be a string", where(key)));
    out = v.get<std::string>();
  }

  template <class E, std::size_t N>
  void enumeration(const char* key, const EnumName<E> (&table)[N], E& out) {
    std::string s;
    if (!take(key)) return;
    string(key, s);
    out = parse_enum(table, s, where(key));
  }

  void numbers(const char* key, std::vector<double>& out) {
    if (!take(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_array()) bad(fmt::format("{} must be an array of numbers", where(key)));
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) bad(fmt::format("{} must contain only numbers", where(key)));
      out.push_back(e.get<double>());
    }
  }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.contains(it.key()))
        bad(fmt::format("unknown key '{}'", where(it.key().c_str())));
  }

 private:
  bool take(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  std::string where(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_source(Table t, ThermalFieldSpec& s) {
  t.number("mean_intensity", s.mean_intensity);
  t.number("coherence_time", s.coherence_time);
  t.enumeration("lineshape", lineshape_names, s.lineshape);
  t.number("doppler_shift", s.doppler_shift);
  t.number("mode_count", s.mode_count);
  t.enumeration("statistics", statistics_names, s.statistics);
  t.finish();
}

void read_lo(Table t, LoConfig& lo) {
  t.number("intensity", lo.spec.intensity);
  t.number("static_phase", lo.spec.static_phase);
  t.boolean("blocked", lo.blocked);
  t.boolean("match_source", lo.match_source);
  t.number("mode_overlap", lo.mode_overlap);
  {
    Table s = t.sub("scan");
    s.enumeration("waveform", waveform_names, lo.spec.scan.waveform);
    s.number("rate", lo.spec.scan.rate);
    s.number("jitter_rms", lo.spec.scan.jitter_rms);
    s.finish();
  }
  t.finish();
}

void read_detector(Table t, DetectorSpec& d) {
  t.number("bandwidth", d.bandwidth);
  t.integer("filter_order", d.filter_order);
  t.number("electronic_noise_rms", d.electronic_noise_rms);
  t.number("efficiency", d.efficiency);
  t.number("dark_prob_per_gate", d.dark_prob_per_gate);
  t.number("gate_width", d.gate_width);
  t.number("dead_time", d.dead_time);
  t.finish();
}

void read_oracle(Table t, OracleConfig& o) {
  {
    Table c = t.sub("cw");
    c.number("I", o.cw.I);
    c.number("I_bar", o.cw.I_bar);
    c.number("a1sq", o.cw.a1sq);
    c.number("a2sq", o.cw.a2sq);
    c.number("gamma_abs", o.cw.gamma_abs);
    c.number("gamma_phase", o.cw.gamma_phase);
    c.number("dphi_alpha", o.cw.dphi_alpha);
    c.number("lambda", o.cw.lambda);
    c.number("overlap", o.cw.overlap);
    c.finish();
  }
  {
    Table p = t.sub("pulsed");
    p.number("nbar", o.pulsed.nbar);
    p.number("alpha_sq", o.pulsed.alpha_sq);
    p.number("g2_in", o.pulsed.g2_in);
    p.number("beta1", o.pulsed.beta1);
    p.number("beta2", o.pulsed.beta2);
    p.number("gamma_abs", o.pulsed.gamma_abs);
    p.number("gamma_phase", o.pulsed.gamma_phase);
    p.number("dphi_alpha", o.pulsed.dphi_alpha);
    p.number("rep_rate", o.pulsed.rep_rate);
    p.integer("dN", o.pulsed.dN);
    p.finish();
  }
  {
    Table a = t.sub("antibunched");
    a.number("lambda_lo", o.antibunched.lambda_lo);
    a.number("T_lo", o.antibunched.T_lo);
    a.number("I_lo", o.antibunched.I_lo);
    a.number("T_r", o.antibunched.T_r);
    a.number("T_c", o.antibunched.T_c);
    a.number("tau_e", o.antibunched.tau_e);
    a.number("T_o", o.antibunched.T_o);
    a.finish();
  }
  t.finish();
}

ScenarioConfig from_json(const json& root) {
  ScenarioConfig cfg;
  Table t(root, "");
  int version = config_schema_version;
  t.integer("schema_version", version);
  if (version != config_schema_version)
    bad(fmt::format("schema_version {} is not supported (expected {})", version,
                    config_schema_version));
  t.enumeration("mode", mode_names, cfg.mode);
  read_source(t.sub("source"), cfg.source);
  read_lo(t.sub("lo"), cfg.lo);
  read_detector(t.sub("detector"), cfg.detector);
  {
    Table d = t.sub("delays");
    d.number("optical", cfg.optical_delay);
    d.finish();
  }
  {
    Table s = t.sub("scan");
    s.numbers("delays", cfg.scan.delays);
    s.integer("phase_points", cfg.scan.phase_points);
    s.integer("periods", cfg.scan.periods);
    s.enumeration("mode", scan_mode_names, cfg.scan.mode);
    s.finish();
  }
  {
    Table r = t.sub("run");
    if (r.has("seed")) {
      std::uint64_t seed = 0;
      r.integer("seed", seed);
      cfg.run.seed = seed;
    }
    r.integer("trials", cfg.run.trials);
    r.boolean("reference", cfg.run.reference);
    r.number("dt", cfg.run.dt);
    r.number("window", cfg.run.window);
    r.integer("windows_per_point", cfg.run.windows_per_point);
    r.number("max_tau", cfg.run.max_tau);
    r.number("pulse_period", cfg.run.pulse_period);
    r.integer("pulses_per_point", cfg.run.pulses_per_point);
    r.integer("span", cfg.run.span);
    r.integer("blocks", cfg.run.blocks);
    r.integer("reference_records", cfg.run.reference_records);
    r.finish();
  }
  {
    Table p = t.sub("pulsed");
    p.number("optical_delay", cfg.pulsed.optical_delay);
    p.number("beta1", cfg.pulsed.beta1);
    p.number("beta2", cfg.pulsed.beta2);
    p.number("gamma_abs", cfg.pulsed.gamma_abs);
    p.finish();
  }
  {
    Table a = t.sub("analysis");
    if (a.has("xi")) {
      const auto& v = a.raw("xi");
      if (v.is_string() && v.get<std::string>() == "calibrate") {
        cfg.analysis.xi.reset();
      } else if (v.is_number()) {
        cfg.analysis.xi = v.get<double>();
      } else {
        bad("analysis.xi must be a number or \"calibrate\"");
      }
    } else {
      cfg.analysis.xi = 1.0;
    }
    a.enumeration("clamp", clamp_names, cfg.analysis.clamp);
    a.enumeration("pulsed_weight", weight_names, cfg.analysis.pulsed_weight);
    Table tol = a.sub("tolerance");
    auto& tl = cfg.analysis.tolerance;
    tol.number("visibility", tl.visibility);
    tol.number("gamma_abs", tl.gamma_abs);
    tol.number("phase", tl.phase);
    tol.number("g2_peak", tl.g2_peak);
    tol.number("g2_tail", tl.g2_tail);
    tol.number("crosscheck", tl.crosscheck);
    tol.number("doppler_relative", tl.doppler_relative);
    tol.number("pulsed_visibility", tl.pulsed_visibility);
    tol.number("selection", tl.selection);
    tol.number("sigma_multiple", tl.sigma_multiple);
    tol.finish();
    a.finish();
  }
  {
    Table o = t.sub("output");
    o.string("dir", cfg.output.dir);
    o.boolean("dump_fields", cfg.output.dump_fields);
    o.finish();
  }
  read_oracle(t.sub("oracle"), cfg.oracle);
  t.finish();
  return cfg;
}

json to_json_doc(const ScenarioConfig& c) {
  json j;
  j["schema_version"] = config_schema_version;
  j["mode"] = name_of(mode_names, c.mode);
  j["source"] = {{"mean_intensity", c.source.mean_intensity},
                 {"coherence_time", c.source.coherence_time},
                 {"lineshape", name_of(lineshape_names, c.source.lineshape)},
                 {"doppler_shift", c.source.doppler_shift},
                 {"mode_count", c.source.mode_count},
                 {"statistics", name_of(statistics_names, c.source.statistics)}};
  j["lo"] = {{"intensity", c.lo.spec.intensity},
             {"static_phase", c.lo.spec.static_phase},
             {"blocked", c.lo.blocked},
             {"match_source", c.lo.match_source},
             {"mode_overlap", c.lo.mode_overlap},
             {"scan",
              {{"waveform", name_of(waveform_names, c.lo.spec.scan.waveform)},
               {"rate", c.lo.spec.scan.rate},
               {"jitter_rms", c.lo.spec.scan.jitter_rms}}}};
  j["detector"] = {{"bandwidth", c.detector.bandwidth},
                   {"filter_order", c.detector.filter_order},
                   {"electronic_noise_rms", c.detector.electronic_noise_rms},
                   {"efficiency", c.detector.efficiency},
                   {"dark_prob_per_gate", c.detector.dark_prob_per_gate},
                   {"gate_width", c.detector.gate_width},
                   {"dead_time", c.detector.dead_time}};
  j["delays"] = {{"optical", c.optical_delay}};
  j["scan"] = {{"delays", c.scan.delays},
               {"phase_points", c.scan.phase_points},
               {"periods", c.scan.periods},
               {"mode", name_of(scan_mode_names, c.scan.mode)}};
  json run = {{"trials", c.run.trials},
              {"reference", c.run.reference},
              {"dt", c.run.dt},
              {"window", c.run.window},
              {"windows_per_point", c.run.windows_per_point},
              {"max_tau", c.run.max_tau},
              {"pulse_period", c.run.pulse_period},
              {"pulses_per_point", c.run.pulses_per_point},
              {"span", c.run.span},
              {"blocks", c.run.blocks},
              {"reference_records", c.run.reference_records}};
  if (c.run.seed) run["seed"] = *c.run.seed;
  j["run"] = run;
  j["pulsed"] = {{"optical_delay", c.pulsed.optical_delay},
                 {"beta1", c.pulsed.beta1},
                 {"beta2", c.pulsed.beta2},
                 {"gamma_abs", c.pulsed.gamma_abs}};
  const auto& tl = c.analysis.tolerance;
  j["analysis"] = {{"clamp", name_of(clamp_names, c.analysis.clamp)},
                   {"pulsed_weight", name_of(weight_names, c.analysis.pulsed_weight)},
                   {"tolerance",
                    {{"visibility", tl.visibility},
                     {"gamma_abs", tl.gamma_abs},
                     {"phase", tl.phase},
                     {"g2_peak", tl.g2_peak},
                     {"g2_tail", tl.g2_tail},
                     {"crosscheck", tl.crosscheck},
                     {"doppler_relative", tl.doppler_relative},
                     {"pulsed_visibility", tl.pulsed_visibility},
                     {"selection", tl.selection},
                     {"sigma_multiple", tl.sigma_multiple}}}};
  if (c.analysis.xi)
    j["analysis"]["xi"] = *c.analysis.xi;
  else
    j["analysis"]["xi"] = "calibrate";
  j["output"] = {{"dir", c.output.dir}, {"dump_fields", c.output.dump_fields}};
  const auto& o = c.oracle;
  j["oracle"] = {
      {"cw",
       {{"I", o.cw.I},
        {"I_bar", o.cw.I_bar},
        {"a1sq", o.cw.a1sq},
        {"a2sq", o.cw.a2sq},
        {"gamma_abs", o.cw.gamma_abs},
        {"gamma_phase", o.cw.gamma_phase},
        {"dphi_alpha", o.cw.dphi_alpha},
        {"lambda", o.cw.lambda},
        {"overlap", o.cw.overlap}}},
      {"pulsed",
       {{"nbar", o.pulsed.nbar},
        {"alpha_sq", o.pulsed.alpha_sq},
        {"g2_in", o.pulsed.g2_in},
        {"beta1", o.pulsed.beta1},
        {"beta2", o.pulsed.beta2},
        {"gamma_abs", o.pulsed.gamma_abs},
        {"gamma_phase", o.pulsed.gamma_phase},
        {"dphi_alpha", o.pulsed.dphi_alpha},
        {"rep_rate", o.pulsed.rep_rate},
        {"dN", o.pulsed.dN}}},
      {"antibunched",
       {{"lambda_lo", o.antibunched.lambda_lo},
        {"T_lo", o.antibunched.T_lo},
        {"I_lo", o.antibunched.I_lo},
        {"T_r", o.antibunched.T_r},
        {"T_c", o.antibunched.T_c},
        {"tau_e", o.antibunched.tau_e},
        {"T_o", o.antibunched.T_o}}}};
  return j;
}

json* locate(json& root, std::string_view path) {
  json* node = &root;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto dot = path.find('.', start);
    const std::string key(path.substr(start, dot == std::string_view::npos ? path.npos : dot - start));
    if (!node->is_object() || !node->contains(key)) return nullptr;
    node = &(*node)[key];
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return node;
}

void check_multiple(double value, double step, const std::string& what) {
  const double r = value / step;
  if (std::abs(r - std::round(r)) > 1e-6)
    bad(fmt::format("{} = {} s is not a whole multiple of {} s", what, value, step));
}

}  // namespace

const char* mode_name(Mode m) { return name_of(mode_names, m); }

ScenarioConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    bad(fmt::format("config is not valid JSON: {}", e.what()));
  }
  try {
    return from_json(root);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    bad(fmt::format("config could not be read: {}", e.what()));
  }
}

ScenarioConfig load_config(const std::string& path) { return parse_config(io::read_file(path)); }

std::string to_json(const ScenarioConfig& cfg) { return to_json_doc(cfg).dump(2) + "\n"; }

void set_parameter(ScenarioConfig& cfg, std::string_view path, double value) {
  json doc = to_json_doc(cfg);
  json* node = locate(doc, path);
  if (node == nullptr || !node->is_number() || path == "schema_version")
    fail(ErrorCode::unknown_parameter,
         fmt::format("'{}' does not name a numeric config field", path));
  if (node->is_number_integer() || node->is_number_unsigned()) {
    if (std::floor(value) != value)
      fail(ErrorCode::config_invalid, fmt::format("'{}' takes an integer value", path));
    *node = static_cast<std::int64_t>(value);
  } else {
    *node = value;
  }
  cfg = from_json(doc);
}

void set_parameter_text(ScenarioConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    fail(ErrorCode::config_invalid, fmt::format("'{}' is not of the form key=value", assignment));
  const auto path = assignment.substr(0, eq);
  const auto text = assignment.substr(eq + 1);
  json doc = to_json_doc(cfg);
  // run.seed may be absent from the canonical document
  if (path == "run.seed" && !doc["run"].contains("seed")) doc["run"]["seed"] = 0;
  json* node = locate(doc, path);
  if (node == nullptr)
    fail(ErrorCode::unknown_parameter, fmt::format("'{}' does not name a config field", path));
  json value;
  try {
    value = json::parse(text.begin(), text.end());
  } catch (const json::parse_error&) {
    value = std::string(text);
  }
  *node = value;
  cfg = from_json(doc);
}

void ScenarioConfig::validate() const {
  if (mode == Mode::oracle) {
    try {
      oracle.cw.validate();
      oracle.pulsed.validate();
      oracle.antibunched.validate();
    } catch (const Error& e) {
      bad(fmt::format("oracle parameters: {}", e.what()));
    }
    return;
  }
  if (!run.seed) bad("run.seed is required (pass --seed or set run.seed)");
  try {
    source.validate();
    lo.spec.validate();
    detector.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  if (!(lo.mode_overlap >= 0.0 && lo.mode_overlap <= 1.0))
    bad("lo.mode_overlap must lie in [0, 1]");
  if (run.trials < 1) bad("run.trials must be >= 1");
  if (scan.phase_points < 8) bad("scan.phase_points must be >= 8");
  if (scan.periods < 1) bad("scan.periods must be >= 1");
  if (analysis.xi && !(*analysis.xi > 0.0 && *analysis.xi <= 1.0))
    bad("analysis.xi must lie in (0, 1] or be \"calibrate\"");

  if (mode == Mode::cw) {
    if (!(run.dt > 0.0)) bad("run.dt must be > 0");
    if (run.dt > source.coherence_time / 10.0 * (1.0 + 1e-9))
      bad(fmt::format("run.dt = {} s is coarser than coherence_time/10", run.dt));
    if (run.window < 10.0 * source.coherence_time * (1.0 - 1e-9))
      bad("run.window must span at least 10 coherence times");
    if (run.windows_per_point < 1) bad("run.windows_per_point must be >= 1");
    if (!(run.max_tau >= 0.0) || run.max_tau >= run.window)
      bad("run.max_tau must lie in [0, run.window)");
    if (source.statistics == FieldStatistics::phase_randomized &&
        source.lineshape != Lineshape::lorentzian)
      bad("source.statistics = phase_randomized requires lineshape = lorentzian");
    check_multiple(optical_delay, run.dt, "delays.optical");
    if (std::abs(optical_delay) >= run.window) bad("delays.optical must be shorter than the window");
    for (double tau : scan.delays) {
      check_multiple(tau, run.dt, "scan.delays entry");
      if (std::abs(tau) >= run.window) bad("scan.delays entries must be shorter than the window");
    }
  } else {
    if (!(run.pulse_period > 0.0)) bad("run.pulse_period must be > 0");
    if (run.pulses_per_point < static_cast<std::int64_t>(min_pulses_for_statistics))
      bad(fmt::format("run.pulses_per_point must be >= {}", min_pulses_for_statistics));
    if (run.span < 0) bad("run.span must be >= 0");
    if (run.blocks < 2) bad("run.blocks must be >= 2");
    if (run.reference_records < 0) bad("run.reference_records must be >= 0");
    if (!(pulsed.beta1 >= 0.0 && pulsed.beta1 <= 1.0 && pulsed.beta2 >= 0.0 &&
          pulsed.beta2 <= 1.0))
      bad("pulsed.beta1 and pulsed.beta2 must lie in [0, 1]");
    if (!(pulsed.gamma_abs > 0.0 && pulsed.gamma_abs <= 1.0))
      bad("pulsed.gamma_abs must lie in (0, 1]");
    check_multiple(pulsed.optical_delay, run.pulse_period, "pulsed.optical_delay");
    if (scan.delays.empty()) bad("scan.delays must list at least one electronic delay");
    for (double d : scan.delays) check_multiple(d, run.pulse_period, "scan.delays entry");
  }
}

std::string_view schema_text() {
  return R"(phbt scenario configuration, schema_version 1 (JSON; // comments allowed)

schema_version          1
mode                    "cw" | "pulsed" | "oracle"
source.mean_intensity   photons/s (cw) or photons/pulse (pulsed), before the input splitter
source.coherence_time   s; gaussian: |gamma| = exp(-1/2) at T_c; lorentzian: exp(-1)
source.lineshape        "gaussian" | "lorentzian"
source.doppler_shift    rad/s; gamma(tau) carries exp(-i doppler_shift tau)
source.mode_count       temporal modes per pulse (pulsed), g2 = 1 + 1/M
source.statistics       "thermal" | "phase_randomized" (cw, lorentzian only)
lo.intensity            |alpha|^2 per arm, photons/s or photons/pulse
lo.static_phase         rad
lo.blocked              true: no LO light reaches the mixers
lo.match_source         true: attenuate each LO arm to the signal arm intensity
lo.mode_overlap         co-polarized power fraction of each LO arm, in [0, 1]
lo.scan.waveform        "static" | "linear_ramp" | "triangle" (continuous scan mode)
lo.scan.rate            rad/s
lo.scan.jitter_rms      rad, iid Gaussian per sample on the scanned arm
detector.bandwidth      Hz, 3 dB point of each analog filter pole
detector.filter_order   number of cascaded poles
detector.electronic_noise_rms   current units
detector.efficiency     in [0, 1]
detector.dark_prob_per_gate     in [0, 1)
detector.gate_width     s
detector.dead_time      s
delays.optical          s, cw optical delay on arm 1 (multiple of run.dt)
scan.delays             cw: fringe delays tau (s, multiples of run.dt; tau = 0 is
                        always added); pulsed: electronic delays (s, multiples of
                        run.pulse_period)
scan.phase_points       LO phase steps per fringe scan, >= 8
scan.periods            2 pi periods covered by one scan
scan.mode               "stepped" | "continuous"
run.seed                root seed (required; no wall-clock seeding)
run.trials              independent repetitions averaged per point
run.reference           also measure g2 with the LO blocked
run.dt                  s, cw sample spacing (<= coherence_time/10)
run.window              s, cw averaging window (paper-style 2 ms)
run.windows_per_point   cw windows per phase step
run.max_tau             s, cw lag range of the reference g2
run.pulse_period        s, pulsed repetition period
run.pulses_per_point    pulses per phase step (>= 10000)
run.span                pulsed reference g2 offsets around Delta N = 0
run.blocks              pulsed blocks for coincidence stderr
run.reference_records   pulsed LO-blocked records per trial (0: scan.phase_points)
pulsed.optical_delay    s, Delta T_o on arm 1
pulsed.beta1, beta2     temporal mode-match factors in [0, 1]
pulsed.gamma_abs        field coherence between split arms, in (0, 1]
analysis.xi             number in (0, 1] or "calibrate" (peak visibility / 0.4)
analysis.clamp          "clamp" | "allow" | "error" for inverted |gamma| > 1
analysis.pulsed_weight  "consistent" | "printed" interference weight
analysis.tolerance.*    visibility, gamma_abs, phase, g2_peak, g2_tail, crosscheck,
                        doppler_relative, pulsed_visibility, selection,
                        sigma_multiple (tolerance of the Doppler slope when the
                        configured shift is 0, in units of its stderr)
output.dir              run directory
output.dump_fields      write the first window's fields and traces under fields/
oracle.cw.*             I I_bar a1sq a2sq gamma_abs gamma_phase dphi_alpha lambda overlap
oracle.pulsed.*         nbar alpha_sq g2_in beta1 beta2 gamma_abs gamma_phase dphi_alpha
                        rep_rate dN
oracle.antibunched.*    lambda_lo T_lo I_lo T_r T_c tau_e T_o
)";
}

}  // namespace phbt
