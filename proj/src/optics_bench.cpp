#include "phbt/optics_bench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <type_traits>

#include <fmt/format.h>

#include "phbt/error.hpp"

namespace phbt {

namespace {

constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
constexpr Complex i_unit(0.0, 1.0);

bool same_grid(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(a, b); }

void check_grid(const ComplexEnvelope& a, const ComplexEnvelope& b) {
  if (!same_grid(a.dt, b.dt) || a.size() != b.size() ||
      std::abs(a.t0 - b.t0) > 1e-6 * a.dt)
    fail(ErrorCode::grid_mismatch,
         fmt::format("envelopes differ in grid: dt {} vs {}, size {} vs {}, t0 {} vs {}", a.dt,
                     b.dt, a.size(), b.size(), a.t0, b.t0));
}

void check_grid(const PulseTrain& a, const PulseTrain& b) {
  if (!same_grid(a.pulse_period, b.pulse_period) || a.size() != b.size() ||
      a.first_index != b.first_index)
    fail(ErrorCode::grid_mismatch,
         fmt::format("pulse trains differ: period {} vs {}, size {} vs {}, first {} vs {}",
                     a.pulse_period, b.pulse_period, a.size(), b.size(), a.first_index,
                     b.first_index));
}

template <class Field>
std::vector<Complex>& data(Field& f) {
  if constexpr (std::is_same_v<Field, ComplexEnvelope>)
    return f.samples;
  else
    return f.amplitudes;
}

template <class Field>
const std::vector<Complex>& data(const Field& f) {
  if constexpr (std::is_same_v<Field, ComplexEnvelope>)
    return f.samples;
  else
    return f.amplitudes;
}

template <class Field>
BeamSplitterOut<Field> split_impl(const Field& input) {
  BeamSplitterOut<Field> out{input, input};
  auto& a = data(out.out_a);
  auto& b = data(out.out_b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] *= inv_sqrt2;
    b[i] *= i_unit * inv_sqrt2;
  }
  return out;
}

template <class Field>
BeamSplitterOut<Field> mix_impl(const Field& signal, const Field& lo) {
  check_grid(signal, lo);
  BeamSplitterOut<Field> out{signal, signal};
  const auto& s = data(signal);
  const auto& l = data(lo);
  auto& a = data(out.out_a);
  auto& b = data(out.out_b);
  for (std::size_t i = 0; i < s.size(); ++i) {
    a[i] = (s[i] + i_unit * l[i]) * inv_sqrt2;
    b[i] = (i_unit * s[i] + l[i]) * inv_sqrt2;
  }
  return out;
}

template <class Field>
Field attenuate_impl(const Field& input, double transmission) {
  if (!(transmission >= 0.0 && transmission <= 1.0))
    fail(ErrorCode::out_of_range,
         fmt::format("transmission must lie in [0, 1] (got {})", transmission));
  Field out = input;
  const double s = std::sqrt(transmission);
  for (auto& v : data(out)) v *= s;
  return out;
}

template <class Field>
Field scaled_impl(const Field& input, Complex factor) {
  Field out = input;
  for (auto& v : data(out)) v *= factor;
  return out;
}

}  // namespace

BeamSplitterOut<ComplexEnvelope> split(const ComplexEnvelope& input) { return split_impl(input); }
BeamSplitterOut<PulseTrain> split(const PulseTrain& input) { return split_impl(input); }

BeamSplitterOut<ComplexEnvelope> mix(const ComplexEnvelope& signal, const ComplexEnvelope& lo) {
  return mix_impl(signal, lo);
}
BeamSplitterOut<PulseTrain> mix(const PulseTrain& signal, const PulseTrain& lo) {
  return mix_impl(signal, lo);
}

ComplexEnvelope delay(const ComplexEnvelope& input, double shift) {
  const double steps = shift / input.dt;
  const auto s = static_cast<std::int64_t>(std::llround(steps));
  if (std::abs(steps - static_cast<double>(s)) > 1e-6)
    fail(ErrorCode::invalid_argument,
         fmt::format("delay {} s is not a whole number of samples (dt = {} s)", shift, input.dt));
  const auto n = static_cast<std::int64_t>(input.size());
  if (std::abs(s) >= n)
    fail(ErrorCode::shift_exceeds_record,
         fmt::format("delay of {} samples exceeds record of {} samples", s, n));

  ComplexEnvelope out;
  out.dt = input.dt;
  out.spec_hash = input.spec_hash;
  if (s >= 0) {
    out.samples.assign(input.samples.begin(), input.samples.end() - s);
    out.t0 = input.t0 + static_cast<double>(s) * input.dt;
  } else {
    out.samples.assign(input.samples.begin() - s, input.samples.end());
    out.t0 = input.t0;
  }
  return out;
}

PulseTrain delay(const PulseTrain& input, std::int64_t shift) {
  const auto n = static_cast<std::int64_t>(input.size());
  if (std::abs(shift) >= n)
    fail(ErrorCode::shift_exceeds_record,
         fmt::format("delay of {} pulses exceeds record of {} pulses", shift, n));
  PulseTrain out = input;
  if (shift >= 0) {
    out.amplitudes.assign(input.amplitudes.begin(), input.amplitudes.end() - shift);
    out.first_index = input.first_index + shift;
  } else {
    out.amplitudes.assign(input.amplitudes.begin() - shift, input.amplitudes.end());
    out.first_index = input.first_index;
  }
  return out;
}

ComplexEnvelope attenuate(const ComplexEnvelope& input, double transmission) {
  return attenuate_impl(input, transmission);
}
PulseTrain attenuate(const PulseTrain& input, double transmission) {
  return attenuate_impl(input, transmission);
}

PulseTrain dephase(const PulseTrain& input, double rms, Seed seed) {
  require(rms >= 0.0 && std::isfinite(rms), ErrorCode::invalid_argument,
          "dephasing rms must be >= 0");
  PulseTrain out = input;
  if (rms == 0.0) return out;
  Engine rng = seed.engine();
  std::normal_distribution<double> normal(0.0, rms);
  for (auto& a : out.amplitudes) a *= std::polar(1.0, normal(rng));
  return out;
}

void common_support(ComplexEnvelope& a, ComplexEnvelope& b) {
  if (!same_grid(a.dt, b.dt))
    fail(ErrorCode::grid_mismatch, fmt::format("dt mismatch: {} vs {}", a.dt, b.dt));
  const double dt = a.dt;
  const auto start_a = std::llround(a.t0 / dt);
  const auto start_b = std::llround(b.t0 / dt);
  const auto begin = std::max(start_a, start_b);
  const auto end = std::min(start_a + static_cast<long long>(a.size()),
                            start_b + static_cast<long long>(b.size()));
  if (end - begin < 2) fail(ErrorCode::empty_overlap, "envelopes have no common support");
  auto crop = [&](ComplexEnvelope& e, long long start) {
    std::vector<Complex> kept(e.samples.begin() + (begin - start),
                              e.samples.begin() + (end - start));
    e.samples = std::move(kept);
    e.t0 = static_cast<double>(begin) * dt;
  };
  crop(a, start_a);
  crop(b, start_b);
}

void common_support(PulseTrain& a, PulseTrain& b) {
  if (!same_grid(a.pulse_period, b.pulse_period))
    fail(ErrorCode::grid_mismatch, "pulse period mismatch");
  const auto begin = std::max(a.first_index, b.first_index);
  const auto end = std::min(a.index(a.size()), b.index(b.size()));
  if (end - begin < 1) fail(ErrorCode::empty_overlap, "pulse trains have no common support");
  auto crop = [&](PulseTrain& p) {
    std::vector<Complex> kept(p.amplitudes.begin() + (begin - p.first_index),
                              p.amplitudes.begin() + (end - p.first_index));
    p.amplitudes = std::move(kept);
    p.first_index = begin;
  };
  crop(a);
  crop(b);
}

ComplexEnvelope scaled(const ComplexEnvelope& input, Complex factor) {
  return scaled_impl(input, factor);
}
PulseTrain scaled(const PulseTrain& input, Complex factor) {
  return scaled_impl(input, factor);
}

}  // namespace phbt
