#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "phbt/error.hpp"
#include "phbt/field_engine.hpp"
#include "support.hpp"

using namespace phbt;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

ThermalFieldSpec gaussian_source(double tc = 7e-6) {
  ThermalFieldSpec s;
  s.mean_intensity = 1.0;
  s.coherence_time = tc;
  s.lineshape = Lineshape::gaussian;
  return s;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::io;
}

double moment_ratio(const ComplexEnvelope& env) {
  double m2 = 0.0, m4 = 0.0;
  for (auto v : env.samples) {
    const double i = std::norm(v);
    m2 += i;
    m4 += i * i;
  }
  const double n = static_cast<double>(env.size());
  m2 /= n;
  m4 /= n;
  return m4 / (m2 * m2);
}

}  // namespace

TEST_CASE("cw thermal envelope rejects coarse sampling, short records and zero intensity") {
  auto s = gaussian_source();
  CHECK(code_of([&] { gen_cw_thermal(s, 1e-3, 1e-6, Seed(1)); }) ==
        ErrorCode::sampling_too_coarse);
  CHECK(code_of([&] { gen_cw_thermal(s, 50e-6, 0.5e-6, Seed(1)); }) ==
        ErrorCode::duration_too_short);
  s.mean_intensity = 0.0;
  CHECK(code_of([&] { gen_cw_thermal(s, 1e-3, 0.5e-6, Seed(1)); }) ==
        ErrorCode::invalid_argument);
}

TEST_CASE("cw thermal envelope has the requested mean intensity and Gaussian moments") {
  // short T_c gives many independent coherence cells in one record
  auto s = gaussian_source(1e-6);
  s.mean_intensity = 2.5;
  const auto env = gen_cw_thermal(s, 0.2, 0.1e-6, Seed(11));
  CHECK(env.mean_intensity() == doctest::Approx(2.5).epsilon(0.02));
  CHECK(moment_ratio(env) == doctest::Approx(2.0).epsilon(0.025));

  double m2 = 0.0, m4 = 0.0;
  for (auto v : env.samples) {
    m2 += v.real() * v.real();
    m4 += std::pow(v.real(), 4);
  }
  const double n = static_cast<double>(env.size());
  CHECK((m4 / n) / std::pow(m2 / n, 2) == doctest::Approx(3.0).epsilon(0.03));
}

TEST_CASE("empirical coherence follows the gaussian lineshape") {
  const auto s = gaussian_source();
  const double dt = 0.25e-6;
  const auto env = gen_cw_thermal(s, 20e-3, dt, Seed(3));
  const long max_lag = std::lround(3.0 * s.coherence_time / dt);
  double sq = 0.0;
  // least squares of log|gamma| against -tau^2/2 gives 1/T_c^2
  double sxy = 0.0, sxx = 0.0;
  for (long m = 0; m <= max_lag; ++m) {
    const double tau = static_cast<double>(m) * dt;
    const double g = std::abs(support::direct_correlation(env.samples, m));
    const double d = g - coherence_magnitude(Lineshape::gaussian, tau, s.coherence_time);
    sq += d * d;
    if (tau <= 1.5 * s.coherence_time && m > 0) {
      const double x = -0.5 * tau * tau;
      sxy += x * std::log(g);
      sxx += x * x;
    }
  }
  CHECK(std::sqrt(sq / static_cast<double>(max_lag + 1)) < 0.05);
  const double fitted_tc = 1.0 / std::sqrt(sxy / sxx);
  CHECK(fitted_tc == doctest::Approx(7e-6).epsilon(0.05));
}

TEST_CASE("lorentzian lineshape on a phase-randomized source") {
  auto s = gaussian_source();
  s.lineshape = Lineshape::lorentzian;
  s.statistics = FieldStatistics::phase_randomized;
  const double dt = 0.25e-6;
  const auto env = gen_cw_source(s, 40e-3, dt, Seed(5));
  for (auto v : env.samples) REQUIRE(std::norm(v) == doctest::Approx(1.0).epsilon(1e-12));
  for (long m : {4L, 28L, 56L}) {
    const double tau = static_cast<double>(m) * dt;
    CHECK(std::abs(support::direct_correlation(env.samples, m)) ==
          doctest::Approx(std::exp(-tau / s.coherence_time)).epsilon(0.1));
  }
  s.lineshape = Lineshape::gaussian;
  CHECK(code_of([&] { gen_cw_source(s, 1e-3, dt, Seed(1)); }) == ErrorCode::invalid_argument);
}

TEST_CASE("Doppler offset appears as a linear correlation phase slope") {
  auto s = gaussian_source();
  s.doppler_shift = two_pi * 1e5;
  const double dt = 0.25e-6;
  const auto env = gen_cw_thermal(s, 20e-3, dt, Seed(9));
  double stt = 0.0, stp = 0.0;
  for (long m = 1; m <= 12; ++m) {
    const double tau = static_cast<double>(m) * dt;
    const double phi = std::arg(support::direct_correlation(env.samples, m));
    stt += tau * tau;
    stp += tau * phi;
  }
  CHECK(stp / stt == doctest::Approx(-two_pi * 1e5).epsilon(0.01));
}

TEST_CASE("Doppler offset leaves the field magnitude untouched") {
  auto s = gaussian_source();
  const auto a = gen_cw_thermal(s, 1e-3, 0.25e-6, Seed(21));
  s.doppler_shift = 3.7e5;
  const auto b = gen_cw_thermal(s, 1e-3, 0.25e-6, Seed(21));
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(std::abs(a.samples[i]) - std::abs(b.samples[i])));
  CHECK(worst < 1e-12);
}

TEST_CASE("same seed gives identical fields, other seeds do not") {
  const auto s = gaussian_source();
  const auto a = gen_cw_thermal(s, 1e-3, 0.25e-6, Seed(77));
  const auto b = gen_cw_thermal(s, 1e-3, 0.25e-6, Seed(77));
  const auto c = gen_cw_thermal(s, 1e-3, 0.25e-6, Seed(78));
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);
  CHECK(Seed(5).child(1) == Seed(5).child(1));
  CHECK_FALSE(Seed(5).child(1) == Seed(5).child(2));
}

TEST_CASE("pulsed thermal trains follow g2 = 1 + 1/M") {
  auto s = gaussian_source();
  s.mean_intensity = 0.15;
  auto g2_of = [&](double modes, std::uint64_t seed) {
    s.mode_count = modes;
    const auto train = gen_pulsed_thermal(s, 400000, 20e-9, Seed(seed));
    double m2 = 0.0, m4 = 0.0;
    for (auto a : train.amplitudes) {
      m2 += std::norm(a);
      m4 += std::norm(a) * std::norm(a);
    }
    const double n = static_cast<double>(train.size());
    CHECK(m2 / n == doctest::Approx(0.15).epsilon(0.02));
    return (m4 / n) / std::pow(m2 / n, 2);
  };
  CHECK(std::abs(g2_of(1.0, 1) - 2.0) < 0.05);
  CHECK(std::abs(g2_of(1.54, 2) - 1.65) < 0.05);
  CHECK(std::abs(g2_of(1e6, 3) - 1.0) < 0.02);
  CHECK(code_of([&] { gen_pulsed_thermal(s, 9999, 20e-9, Seed(1)); }) ==
        ErrorCode::invalid_argument);
}

TEST_CASE("pulse phases are uniform and uncorrelated between pulses") {
  auto s = gaussian_source();
  s.mean_intensity = 1.0;
  s.mode_count = 1.5;
  const auto train = gen_pulsed_thermal(s, 200000, 20e-9, Seed(4));
  std::complex<double> first = 0.0, neighbour = 0.0;
  for (std::size_t i = 0; i + 1 < train.size(); ++i) {
    first += train.amplitudes[i] / std::abs(train.amplitudes[i]);
    neighbour += train.amplitudes[i] * std::conj(train.amplitudes[i + 1]);
  }
  const double n = static_cast<double>(train.size());
  CHECK(std::abs(first) / n < 0.01);
  CHECK(std::abs(neighbour) / n < 0.01);
}

TEST_CASE("coherent local oscillator phase: static, ramp and jitter") {
  CoherentLOSpec lo;
  lo.intensity = 4.0;
  lo.static_phase = 0.3;
  const auto flat = gen_coherent_lo(lo, 1e-3, 1e-6, Seed(1));
  for (auto v : flat.samples) REQUIRE(v == flat.samples.front());
  CHECK(flat.samples.front() == std::polar(2.0, 0.3));

  lo.static_phase = 0.0;
  lo.scan.waveform = ScanWaveform::linear_ramp;
  lo.scan.rate = two_pi;
  CHECK(lo.scan.phase_at(1.0) - lo.scan.phase_at(0.0) == doctest::Approx(two_pi));
  const auto ramp = gen_coherent_lo(lo, 1.0, 1e-3, Seed(1));
  double unwrapped = 0.0;
  for (std::size_t i = 1; i < ramp.size(); ++i)
    unwrapped += std::arg(ramp.samples[i] * std::conj(ramp.samples[i - 1]));
  const double span = (static_cast<double>(ramp.size()) - 1.0) * 1e-3;
  CHECK(unwrapped == doctest::Approx(two_pi * span).epsilon(1e-9));

  CoherentLOSpec noisy;
  noisy.scan.jitter_rms = 0.3;
  const auto j = gen_coherent_lo(noisy, 0.1, 1e-6, Seed(2));
  double var = 0.0;
  for (auto v : j.samples) var += std::arg(v) * std::arg(v);
  CHECK(var / static_cast<double>(j.size()) == doctest::Approx(0.09).epsilon(0.03));

  const auto pulses = gen_coherent_lo_pulses(lo, 50, 20e-9, Seed(3), 7);
  CHECK(pulses.first_index == 7);
  for (auto a : pulses.amplitudes) CHECK(std::norm(a) == doctest::Approx(4.0));
}

TEST_CASE("spec validation follows the documented invariants") {
  ThermalFieldSpec s;
  s.coherence_time = 0.0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = ThermalFieldSpec{};
  s.mode_count = 0.5;
  CHECK_THROWS_AS(s.validate(), Error);
  PhaseScanSpec scan;
  scan.rate = -1.0;
  CHECK_THROWS_AS(scan.validate(), Error);
  scan = PhaseScanSpec{};
  scan.jitter_rms = -0.1;
  CHECK_THROWS_AS(scan.validate(), Error);
  CoherentLOSpec lo;
  lo.intensity = -1.0;
  CHECK_THROWS_AS(lo.validate(), Error);
}
