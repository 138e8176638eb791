#include "phbt/serialization.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "phbt/error.hpp"

namespace phbt::io {

namespace {

using Meta = std::map<std::string, std::string, std::less<>>;

struct CsvTable {
  std::string kind;
  Meta meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_on(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

CsvTable read_table(std::istream& is, std::string_view expected_kind) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line))
    fail(ErrorCode::io, fmt::format("empty stream, expected a phbt {} file", expected_kind));
  {
    std::istringstream head(line);
    std::string hash, tag, kind, version;
    head >> hash >> tag >> kind >> version;
    if (hash != "#" || tag != "phbt" || kind != expected_kind)
      fail(ErrorCode::io,
           fmt::format("expected a phbt {} file, header was '{}'", expected_kind, line));
    t.kind = kind;
  }
  while (std::getline(is, line)) {
    const auto view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      std::istringstream meta(std::string(view.substr(1)));
      std::string kv;
      while (meta >> kv) {
        const auto eq = kv.find('=');
        if (eq != std::string::npos) t.meta[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      continue;
    }
    if (t.columns.empty()) {
      t.columns = split_on(view, ',');
      continue;
    }
    auto cells = split_on(view, ',');
    if (cells.size() != t.columns.size())
      fail(ErrorCode::io, fmt::format("row has {} cells, header has {}", cells.size(),
                                      t.columns.size()));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

double to_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(ErrorCode::io, fmt::format("cannot parse number '{}'", s));
  return v;
}

std::int64_t to_int(std::string_view s) {
  s = trim(s);
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(ErrorCode::io, fmt::format("cannot parse integer '{}'", s));
  return v;
}

std::uint64_t to_hash(std::string_view s) {
  s = trim(s);
  if (s.starts_with("0x")) s.remove_prefix(2);
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (res.ec != std::errc()) fail(ErrorCode::io, fmt::format("cannot parse hash '{}'", s));
  return v;
}

const std::string& meta_at(const CsvTable& t, std::string_view key) {
  const auto it = t.meta.find(key);
  if (it == t.meta.end())
    fail(ErrorCode::io, fmt::format("{} file lacks '{}' metadata", t.kind, key));
  return it->second;
}

void expect_columns(const CsvTable& t, std::initializer_list<std::string_view> cols) {
  std::size_t i = 0;
  bool ok = t.columns.size() == cols.size();
  for (auto c : cols) {
    if (!ok) break;
    ok = trim(t.columns[i++]) == c;
  }
  if (!ok) fail(ErrorCode::io, fmt::format("unexpected columns in {} file", t.kind));
}

}  // namespace

std::string exact(double v) { return fmt::format("{:.17g}", v); }
std::string compact(double v) { return fmt::format("{:.10g}", v); }

void write_csv(std::ostream& os, const ComplexEnvelope& env) {
  os << "# phbt envelope v1\n";
  os << "# dt=" << exact(env.dt) << " t0=" << exact(env.t0)
     << fmt::format(" spec_hash=0x{:016x}\n", env.spec_hash);
  os << "t,re,im\n";
  for (std::size_t i = 0; i < env.size(); ++i)
    os << exact(env.time(i)) << ',' << exact(env.samples[i].real()) << ','
       << exact(env.samples[i].imag()) << '\n';
}

void write_csv(std::ostream& os, const PulseTrain& train) {
  os << "# phbt pulses v1\n";
  os << "# pulse_period=" << exact(train.pulse_period) << " beta1=" << exact(train.beta1)
     << " beta2=" << exact(train.beta2)
     << fmt::format(" spec_hash=0x{:016x}\n", train.spec_hash);
  os << "j,re,im\n";
  for (std::size_t i = 0; i < train.size(); ++i)
    os << train.index(i) << ',' << exact(train.amplitudes[i].real()) << ','
       << exact(train.amplitudes[i].imag()) << '\n';
}

void write_csv(std::ostream& os, const PhotocurrentTrace& trace) {
  os << "# phbt trace v1\n";
  os << "# dt=" << exact(trace.dt) << " t0=" << exact(trace.t0)
     << " noise_rms=" << exact(trace.noise_rms) << '\n';
  os << "t,current\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    os << exact(trace.t0 + static_cast<double>(i) * trace.dt) << ','
       << exact(trace.samples[i]) << '\n';
}

void write_csv(std::ostream& os, const ClickRecord& clicks) {
  os << "# phbt clicks v1\n";
  os << "# gate_period=" << exact(clicks.gate_period) << '\n';
  os << "gate,clicked\n";
  for (std::size_t i = 0; i < clicks.size(); ++i)
    os << clicks.gate_index(i) << ',' << static_cast<int>(clicks.clicked[i]) << '\n';
}

void write_csv(std::ostream& os, const CorrelationEstimate& est, std::string_view tau_column) {
  os << "# phbt correlation v1\n";
  os << "# averaging_window=" << exact(est.averaging_window) << " windows=" << est.windows
     << '\n';
  const bool counts = !est.coincidences.empty();
  os << tau_column << ",g2,stderr" << (counts ? ",coincidences,pairs" : "") << '\n';
  for (std::size_t k = 0; k < est.size(); ++k) {
    os << exact(est.tau[k]) << ',' << exact(est.g2[k]) << ',' << exact(est.std_error[k]);
    if (counts) os << ',' << est.coincidences[k] << ',' << est.pairs[k];
    os << '\n';
  }
}

ComplexEnvelope read_envelope_csv(std::istream& is) {
  const auto t = read_table(is, "envelope");
  expect_columns(t, {"t", "re", "im"});
  ComplexEnvelope env;
  env.dt = to_double(meta_at(t, "dt"));
  env.t0 = to_double(meta_at(t, "t0"));
  env.spec_hash = to_hash(meta_at(t, "spec_hash"));
  for (const auto& r : t.rows) env.samples.emplace_back(to_double(r[1]), to_double(r[2]));
  return env;
}

PulseTrain read_pulse_train_csv(std::istream& is) {
  const auto t = read_table(is, "pulses");
  expect_columns(t, {"j", "re", "im"});
  PulseTrain train;
  train.pulse_period = to_double(meta_at(t, "pulse_period"));
  train.beta1 = to_double(meta_at(t, "beta1"));
  train.beta2 = to_double(meta_at(t, "beta2"));
  train.spec_hash = to_hash(meta_at(t, "spec_hash"));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto j = to_int(t.rows[i][0]);
    if (i == 0) train.first_index = j;
    else if (j != train.index(i))
      fail(ErrorCode::io, "pulse indices in a pulses file must be consecutive");
    train.amplitudes.emplace_back(to_double(t.rows[i][1]), to_double(t.rows[i][2]));
  }
  return train;
}

PhotocurrentTrace read_trace_csv(std::istream& is) {
  const auto t = read_table(is, "trace");
  expect_columns(t, {"t", "current"});
  PhotocurrentTrace trace;
  trace.dt = to_double(meta_at(t, "dt"));
  trace.t0 = to_double(meta_at(t, "t0"));
  trace.noise_rms = to_double(meta_at(t, "noise_rms"));
  for (const auto& r : t.rows) trace.samples.push_back(to_double(r[1]));
  return trace;
}

ClickRecord read_click_csv(std::istream& is) {
  const auto t = read_table(is, "clicks");
  expect_columns(t, {"gate", "clicked"});
  ClickRecord rec;
  rec.gate_period = to_double(meta_at(t, "gate_period"));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto g = to_int(t.rows[i][0]);
    if (i == 0) rec.first_gate = g;
    else if (g != rec.gate_index(i))
      fail(ErrorCode::io, "gate indices in a clicks file must be consecutive");
    rec.clicked.push_back(static_cast<std::uint8_t>(to_int(t.rows[i][1]) != 0));
  }
  return rec;
}

CorrelationEstimate read_correlation_csv(std::istream& is) {
  const auto t = read_table(is, "correlation");
  if (t.columns.size() != 3 && t.columns.size() != 5)
    fail(ErrorCode::io, "unexpected columns in correlation file");
  CorrelationEstimate est;
  est.averaging_window = to_double(meta_at(t, "averaging_window"));
  est.windows = static_cast<std::size_t>(to_int(meta_at(t, "windows")));
  for (const auto& r : t.rows) {
    est.tau.push_back(to_double(r[0]));
    est.g2.push_back(to_double(r[1]));
    est.std_error.push_back(to_double(r[2]));
    if (r.size() == 5) {
      est.coincidences.push_back(static_cast<std::uint64_t>(to_int(r[3])));
      est.pairs.push_back(static_cast<std::uint64_t>(to_int(r[4])));
    }
  }
  return est;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, fmt::format("cannot open '{}' for writing", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::io, fmt::format("failed writing '{}'", path.string()));
}

}  // namespace phbt::io
