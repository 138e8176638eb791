#include "phbt/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "phbt/error.hpp"

namespace phbt {

void DetectorSpec::validate() const {
  require(bandwidth > 0.0 && std::isfinite(bandwidth), ErrorCode::invalid_argument,
          "detector bandwidth must be > 0");
  require(filter_order >= 1, ErrorCode::invalid_argument, "filter_order must be >= 1");
  require(electronic_noise_rms >= 0.0, ErrorCode::invalid_argument,
          "electronic_noise_rms must be >= 0");
  require(efficiency >= 0.0 && efficiency <= 1.0, ErrorCode::invalid_argument,
          "efficiency must lie in [0, 1]");
  require(dark_prob_per_gate >= 0.0 && dark_prob_per_gate < 1.0, ErrorCode::invalid_argument,
          "dark_prob_per_gate must lie in [0, 1)");
  require(gate_width >= 0.0, ErrorCode::invalid_argument, "gate_width must be >= 0");
  require(dead_time >= 0.0, ErrorCode::invalid_argument, "dead_time must be >= 0");
}

double PhotocurrentTrace::mean() const {
  if (samples.empty()) return 0.0;
  return std::accumulate(samples.begin(), samples.end(), 0.0) /
         static_cast<double>(samples.size());
}

double ClickRecord::click_rate() const {
  if (clicked.empty()) return 0.0;
  std::size_t n = 0;
  for (auto c : clicked) n += c;
  return static_cast<double>(n) / static_cast<double>(clicked.size());
}

std::vector<double> lowpass(std::span<const double> x, double dt, double bandwidth, int order) {
  std::vector<double> y(x.begin(), x.end());
  if (y.empty()) return y;
  const double a = -std::expm1(-2.0 * std::numbers::pi * bandwidth * dt);
  for (int pass = 0; pass < order; ++pass) {
    double state = y[0];
    for (auto& v : y) {
      state += a * (v - state);
      v = state;
    }
  }
  return y;
}

PhotocurrentTrace detect_analog(std::span<const ComplexEnvelope> modes,
                                const DetectorSpec& spec, Seed seed) {
  spec.validate();
  require(!modes.empty(), ErrorCode::invalid_argument, "detect_analog needs at least one mode");
  const auto& first = modes.front();
  first.validate();
  for (const auto& m : modes) {
    if (m.size() != first.size() || std::abs(m.dt - first.dt) > 1e-12 * first.dt ||
        std::abs(m.t0 - first.t0) > 1e-6 * first.dt)
      fail(ErrorCode::grid_mismatch, "detector modes must share one sampling grid");
  }
  const std::size_t n = first.size();
  std::vector<double> intensity(n, 0.0);
  for (const auto& m : modes)
    for (std::size_t i = 0; i < n; ++i) intensity[i] += std::norm(m.samples[i]);
  for (auto& v : intensity) v *= spec.efficiency;

  PhotocurrentTrace trace;
  trace.dt = first.dt;
  trace.t0 = first.t0;
  trace.noise_rms = spec.electronic_noise_rms;
  trace.bandwidth_resolved = first.dt <= 1.0 / (10.0 * spec.bandwidth) * (1.0 + 1e-9);
  trace.samples = lowpass(intensity, first.dt, spec.bandwidth, spec.filter_order);
  if (spec.electronic_noise_rms > 0.0) {
    Engine rng = seed.engine();
    std::normal_distribution<double> noise(0.0, spec.electronic_noise_rms);
    for (auto& v : trace.samples) v += noise(rng);
  }
  return trace;
}

PhotocurrentTrace detect_analog(const ComplexEnvelope& field, const DetectorSpec& spec,
                                Seed seed) {
  return detect_analog(std::span<const ComplexEnvelope>(&field, 1), spec, seed);
}

namespace {

std::vector<double> g2_lags_span(std::span<const double> a, std::span<const double> b,
                                 std::span<const long> lags) {
  const auto n = static_cast<long>(a.size());
  // prefix sums give the pair-restricted means in O(1) per lag
  std::vector<double> pa(a.size() + 1, 0.0), pb(b.size() + 1, 0.0);
  for (long i = 0; i < n; ++i) {
    pa[i + 1] = pa[i] + a[i];
    pb[i + 1] = pb[i] + b[i];
  }
  std::vector<double> out(lags.size(), 0.0);
  for (std::size_t k = 0; k < lags.size(); ++k) {
    const long lag = lags[k];
    const long begin = std::max(0L, -lag);
    const long end = std::min(n, n - lag);
    if (end - begin < 1)
      fail(ErrorCode::window_longer_than_record,
           fmt::format("lag of {} samples leaves no pairs in a record of {}", lag, n));
    double acc = 0.0;
    const double* pa_ = a.data() + begin;
    const double* pb_ = b.data() + begin + lag;
    const long count = end - begin;
    for (long t = 0; t < count; ++t) acc += pa_[t] * pb_[t];
    const double inv = 1.0 / static_cast<double>(count);
    const double m1 = (pa[end] - pa[begin]) * inv;
    const double m2 = (pb[end + lag] - pb[begin + lag]) * inv;
    const double denom = m1 * m2;
    out[k] = denom != 0.0 ? acc * inv / denom : 0.0;
  }
  return out;
}

void check_pair(const PhotocurrentTrace& i1, const PhotocurrentTrace& i2) {
  if (std::abs(i1.dt - i2.dt) > 1e-12 * std::max(i1.dt, i2.dt))
    fail(ErrorCode::grid_mismatch, fmt::format("traces differ in dt: {} vs {}", i1.dt, i2.dt));
}

}  // namespace

std::vector<double> g2_at_lags(const PhotocurrentTrace& i1, const PhotocurrentTrace& i2,
                               std::span<const long> lags) {
  check_pair(i1, i2);
  if (i1.size() != i2.size() || std::abs(i1.t0 - i2.t0) > 1e-6 * i1.dt)
    fail(ErrorCode::grid_mismatch, "g2_at_lags needs traces on the same time support");
  return g2_lags_span(i1.samples, i2.samples, lags);
}

CorrelationEstimate correlate_photocurrents(const PhotocurrentTrace& i1,
                                            const PhotocurrentTrace& i2, double max_tau,
                                            double window) {
  check_pair(i1, i2);
  require(max_tau >= 0.0, ErrorCode::invalid_argument, "max_tau must be >= 0");
  require(window > 0.0, ErrorCode::invalid_argument, "window must be > 0");
  const double dt = i1.dt;

  // overlapping time support
  const auto s1 = std::llround(i1.t0 / dt);
  const auto s2 = std::llround(i2.t0 / dt);
  const auto begin = std::max(s1, s2);
  const auto end = std::min(s1 + static_cast<long long>(i1.size()),
                            s2 + static_cast<long long>(i2.size()));
  if (end - begin < 2) fail(ErrorCode::empty_overlap, "traces have no common time support");
  const auto n = static_cast<std::size_t>(end - begin);
  std::span<const double> a(i1.samples.data() + (begin - s1), n);
  std::span<const double> b(i2.samples.data() + (begin - s2), n);

  const auto wlen = static_cast<std::size_t>(std::llround(window / dt));
  if (wlen > n || wlen < 2)
    fail(ErrorCode::window_longer_than_record,
         fmt::format("window of {} samples does not fit a record of {} samples", wlen, n));
  const auto max_lag = static_cast<long>(std::floor(max_tau / dt + 1e-9));
  if (max_lag >= static_cast<long>(wlen))
    fail(ErrorCode::window_longer_than_record, "max_tau must be shorter than the window");

  std::vector<long> lags;
  for (long k = -max_lag; k <= max_lag; ++k) lags.push_back(k);

  const std::size_t windows = n / wlen;
  std::vector<double> sum(lags.size(), 0.0), sum_sq(lags.size(), 0.0);
  for (std::size_t w = 0; w < windows; ++w) {
    const auto g = g2_lags_span(a.subspan(w * wlen, wlen), b.subspan(w * wlen, wlen), lags);
    for (std::size_t k = 0; k < lags.size(); ++k) {
      sum[k] += g[k];
      sum_sq[k] += g[k] * g[k];
    }
  }

  CorrelationEstimate est;
  est.averaging_window = static_cast<double>(wlen) * dt;
  est.windows = windows;
  const auto wn = static_cast<double>(windows);
  for (std::size_t k = 0; k < lags.size(); ++k) {
    est.tau.push_back(static_cast<double>(lags[k]) * dt);
    const double mean = sum[k] / wn;
    est.g2.push_back(mean);
    double se = 0.0;
    if (windows > 1) {
      const double var = std::max(0.0, (sum_sq[k] - wn * mean * mean) / (wn - 1.0));
      se = std::sqrt(var / wn);
    }
    est.std_error.push_back(se);
  }
  return est;
}

double click_probability(double mean_photons, double efficiency, double dark_prob) {
  return 1.0 - std::exp(-efficiency * mean_photons) * (1.0 - dark_prob);
}

ClickRecord detect_spd(std::span<const PulseTrain> modes, const DetectorSpec& spec, Seed seed,
                       SpdState& state) {
  spec.validate();
  require(!modes.empty(), ErrorCode::invalid_argument, "detect_spd needs at least one mode");
  const auto& first = modes.front();
  first.validate();
  for (const auto& m : modes) {
    if (m.size() != first.size() || m.first_index != first.first_index ||
        std::abs(m.pulse_period - first.pulse_period) > 1e-12 * first.pulse_period)
      fail(ErrorCode::grid_mismatch, "detector modes must share one pulse grid");
  }

  ClickRecord rec;
  rec.first_gate = first.first_index;
  rec.gate_period = first.pulse_period;
  rec.clicked.assign(first.size(), 0);

  Engine rng = seed.engine();
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (std::size_t i = 0; i < first.size(); ++i) {
    double mu = 0.0;
    for (const auto& m : modes) mu += std::norm(m.amplitudes[i]);
    const double p = click_probability(mu, spec.efficiency, spec.dark_prob_per_gate);
    // one draw per gate whether armed or not keeps the stream aligned
    const double u = uniform(rng);
    const std::int64_t gate = rec.gate_index(i);
    const bool armed =
        !state.last_click_gate ||
        static_cast<double>(gate - *state.last_click_gate) * rec.gate_period >= spec.dead_time;
    if (armed && u < p) {
      rec.clicked[i] = 1;
      state.last_click_gate = gate;
    }
  }
  return rec;
}

ClickRecord detect_spd(std::span<const PulseTrain> modes, const DetectorSpec& spec, Seed seed) {
  SpdState fresh;
  return detect_spd(modes, spec, seed, fresh);
}

ClickRecord detect_spd(const PulseTrain& field, const DetectorSpec& spec, Seed seed) {
  return detect_spd(std::span<const PulseTrain>(&field, 1), spec, seed);
}

CorrelationEstimate coincide(const ClickRecord& c1, const ClickRecord& c2,
                             std::int64_t electronic_delay, std::int64_t span,
                             std::size_t blocks) {
  require(span >= 0, ErrorCode::invalid_argument, "span must be >= 0");
  require(blocks >= 1, ErrorCode::invalid_argument, "blocks must be >= 1");
  if (std::abs(c1.gate_period - c2.gate_period) > 1e-12 * c1.gate_period)
    fail(ErrorCode::grid_mismatch, "click records differ in gate period");

  CorrelationEstimate est;
  est.windows = blocks;
  for (std::int64_t d = electronic_delay - span; d <= electronic_delay + span; ++d) {
    const std::int64_t c1_end = c1.gate_index(c1.size());
    const std::int64_t c2_end = c2.gate_index(c2.size());
    const std::int64_t g_begin = std::max(c1.first_gate, c2.first_gate + d);
    const std::int64_t g_end = std::min(c1_end, c2_end + d);
    if (g_end - g_begin < static_cast<std::int64_t>(blocks))
      fail(ErrorCode::empty_overlap,
           fmt::format("click records do not overlap at offset {}", d));

    const auto total = static_cast<std::size_t>(g_end - g_begin);
    const std::uint8_t* p1 = c1.clicked.data() + (g_begin - c1.first_gate);
    const std::uint8_t* p2 = c2.clicked.data() + (g_begin - d - c2.first_gate);

    std::uint64_t coinc = 0, single1 = 0, single2 = 0;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t blk = 0; blk < blocks; ++blk) {
      const std::size_t lo = total * blk / blocks;
      const std::size_t hi = total * (blk + 1) / blocks;
      std::uint64_t bc = 0, b1 = 0, b2 = 0;
      for (std::size_t i = lo; i < hi; ++i) {
        b1 += p1[i];
        b2 += p2[i];
        bc += p1[i] & p2[i];
      }
      coinc += bc;
      single1 += b1;
      single2 += b2;
      const double m = static_cast<double>(hi - lo);
      const double denom = static_cast<double>(b1) * static_cast<double>(b2);
      const double g = denom > 0.0 ? static_cast<double>(bc) * m / denom : 0.0;
      sum += g;
      sum_sq += g * g;
    }
    const double n = static_cast<double>(total);
    const double denom = static_cast<double>(single1) * static_cast<double>(single2);
    est.tau.push_back(static_cast<double>(d));
    est.g2.push_back(denom > 0.0 ? static_cast<double>(coinc) * n / denom : 0.0);
    double se = 0.0;
    if (blocks > 1) {
      const double bn = static_cast<double>(blocks);
      const double mean = sum / bn;
      se = std::sqrt(std::max(0.0, (sum_sq - bn * mean * mean) / (bn - 1.0)) / bn);
    }
    est.std_error.push_back(se);
    est.coincidences.push_back(coinc);
    est.pairs.push_back(total);
    est.averaging_window = n / static_cast<double>(blocks);
  }
  return est;
}

}  // namespace phbt
