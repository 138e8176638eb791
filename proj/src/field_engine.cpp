#include "phbt/field_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "fft.hpp"
#include "hash.hpp"
#include "phbt/error.hpp"

namespace phbt {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Relative slack for the dt / duration preconditions so that values written
// as e.g. 7e-6/10 are not rejected by rounding.
constexpr double grid_slack = 1e-9;

}  // namespace

void ThermalFieldSpec::validate() const {
  if (!(mean_intensity > 0.0) || !std::isfinite(mean_intensity))
    fail(ErrorCode::invalid_argument,
         fmt::format("mean_intensity must be > 0 (got {})", mean_intensity));
  if (!(coherence_time > 0.0) || !std::isfinite(coherence_time))
    fail(ErrorCode::invalid_argument,
         fmt::format("coherence_time must be > 0 (got {})", coherence_time));
  if (!(mode_count >= 1.0) || !std::isfinite(mode_count))
    fail(ErrorCode::invalid_argument,
         fmt::format("mode_count must be >= 1 (got {})", mode_count));
  if (!std::isfinite(doppler_shift))
    fail(ErrorCode::invalid_argument, "doppler_shift must be finite");
}

std::uint64_t ThermalFieldSpec::hash() const {
  return detail::Fnv1a()
      .add("thermal")
      .add(mean_intensity)
      .add(coherence_time)
      .add(static_cast<int>(lineshape))
      .add(doppler_shift)
      .add(mode_count)
      .add(static_cast<int>(statistics))
      .value();
}

void PhaseScanSpec::validate() const {
  if (!(rate >= 0.0) || !std::isfinite(rate))
    fail(ErrorCode::invalid_argument, fmt::format("scan rate must be >= 0 (got {})", rate));
  if (!(jitter_rms >= 0.0) || !std::isfinite(jitter_rms))
    fail(ErrorCode::invalid_argument,
         fmt::format("jitter_rms must be >= 0 (got {})", jitter_rms));
}

double PhaseScanSpec::phase_at(double t) const {
  switch (waveform) {
    case ScanWaveform::static_phase:
      return 0.0;
    case ScanWaveform::linear_ramp:
      return rate * t;
    case ScanWaveform::triangle: {
      // 0 -> 2 pi -> 0 with slope +-rate, period 4 pi / rate.
      if (rate == 0.0) return 0.0;
      const double period = 2.0 * two_pi / rate;
      double u = std::fmod(t, period);
      if (u < 0.0) u += period;
      const double up = rate * u;
      return up <= two_pi ? up : 2.0 * two_pi - up;
    }
  }
  return 0.0;
}

void CoherentLOSpec::validate() const {
  if (!(intensity >= 0.0) || !std::isfinite(intensity))
    fail(ErrorCode::invalid_argument,
         fmt::format("LO intensity must be >= 0 (got {})", intensity));
  scan.validate();
}

std::uint64_t CoherentLOSpec::hash() const {
  return detail::Fnv1a()
      .add("coherent")
      .add(intensity)
      .add(static_phase)
      .add(static_cast<int>(scan.waveform))
      .add(scan.rate)
      .add(scan.jitter_rms)
      .value();
}

double ComplexEnvelope::mean_intensity() const {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : samples) acc += std::norm(s);
  return acc / static_cast<double>(samples.size());
}

void ComplexEnvelope::validate() const {
  require(dt > 0.0 && std::isfinite(dt), ErrorCode::invalid_argument, "envelope dt must be > 0");
  require(samples.size() >= 2, ErrorCode::invalid_argument, "envelope needs at least 2 samples");
  require(std::isfinite(mean_intensity()), ErrorCode::invalid_argument,
          "envelope mean intensity is not finite");
}

double PulseTrain::mean_intensity() const {
  if (amplitudes.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& a : amplitudes) acc += std::norm(a);
  return acc / static_cast<double>(amplitudes.size());
}

void PulseTrain::validate() const {
  require(pulse_period > 0.0 && std::isfinite(pulse_period), ErrorCode::invalid_argument,
          "pulse_period must be > 0");
  require(beta1 >= 0.0 && beta1 <= 1.0 && beta2 >= 0.0 && beta2 <= 1.0,
          ErrorCode::invalid_argument, "mode-match factors must lie in [0, 1]");
  require(std::isfinite(mean_intensity()), ErrorCode::invalid_argument,
          "pulse train mean intensity is not finite");
}

double coherence_magnitude(Lineshape shape, double tau, double coherence_time) {
  const double x = tau / coherence_time;
  switch (shape) {
    case Lineshape::gaussian: return std::exp(-0.5 * x * x);
    case Lineshape::lorentzian: return std::exp(-std::abs(x));
  }
  return 0.0;
}

Complex model_gamma(const ThermalFieldSpec& spec, double tau) {
  const double mag = coherence_magnitude(spec.lineshape, tau, spec.coherence_time);
  return std::polar(mag, -spec.doppler_shift * tau);
}

std::size_t sample_count(double duration, double dt) {
  require(dt > 0.0 && std::isfinite(dt), ErrorCode::invalid_argument, "dt must be > 0");
  require(duration > 0.0 && std::isfinite(duration), ErrorCode::invalid_argument,
          "duration must be > 0");
  return static_cast<std::size_t>(std::llround(duration / dt));
}

namespace {

void check_cw_grid(const ThermalFieldSpec& spec, double duration, double dt) {
  spec.validate();
  if (dt > spec.coherence_time / 10.0 * (1.0 + grid_slack))
    fail(ErrorCode::sampling_too_coarse,
         fmt::format("dt = {} s exceeds coherence_time/10 = {} s", dt,
                     spec.coherence_time / 10.0));
  if (duration < 10.0 * spec.coherence_time * (1.0 - grid_slack))
    fail(ErrorCode::duration_too_short,
         fmt::format("duration = {} s is shorter than 10 coherence times ({} s)", duration,
                     10.0 * spec.coherence_time));
}

void apply_intensity_and_doppler(ComplexEnvelope& env, const ThermalFieldSpec& spec) {
  const double scale = std::sqrt(spec.mean_intensity);
  for (std::size_t i = 0; i < env.samples.size(); ++i) {
    const double phase = spec.doppler_shift * env.time(i);
    env.samples[i] *= scale * Complex(std::cos(phase), std::sin(phase));
  }
}

}  // namespace

ThermalSynthesizer::ThermalSynthesizer(const ThermalFieldSpec& spec, double duration,
                                       double dt)
    : spec_(spec), dt_(dt) {
  check_cw_grid(spec, duration, dt);
  samples_ = sample_count(duration, dt);

  const double tail = spec.lineshape == Lineshape::gaussian ? 9.0 : 32.0;
  const auto pad = static_cast<std::size_t>(std::ceil(tail * spec.coherence_time / dt));
  const std::size_t n = detail::good_fft_size(samples_ + pad);

  std::vector<Complex> acf(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double lag = m <= n / 2 ? static_cast<double>(m)
                                  : static_cast<double>(m) - static_cast<double>(n);
    acf[m] = coherence_magnitude(spec.lineshape, lag * dt, spec.coherence_time);
  }
  detail::dft(acf, /*forward=*/true);

  sqrt_spectrum_.resize(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k)
    sqrt_spectrum_[k] = std::sqrt(std::max(acf[k].real(), 0.0) * inv_n);
}

ComplexEnvelope ThermalSynthesizer::generate(Seed seed) const {
  Engine rng = seed.engine();
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const std::size_t n = sqrt_spectrum_.size();
  std::vector<Complex> spectrum(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    spectrum[k] = sqrt_spectrum_[k] * Complex(re, im);
  }
  detail::dft(spectrum, /*forward=*/false);
  spectrum.resize(samples_);

  ComplexEnvelope env;
  env.samples = std::move(spectrum);
  env.dt = dt_;
  env.t0 = 0.0;
  env.spec_hash = spec_.hash();
  apply_intensity_and_doppler(env, spec_);
  return env;
}

ComplexEnvelope gen_cw_thermal(const ThermalFieldSpec& spec, double duration, double dt,
                               Seed seed) {
  return ThermalSynthesizer(spec, duration, dt).generate(seed);
}

ComplexEnvelope gen_cw_phase_randomized(const ThermalFieldSpec& spec, double duration,
                                        double dt, Seed seed) {
  check_cw_grid(spec, duration, dt);
  if (spec.lineshape != Lineshape::lorentzian)
    fail(ErrorCode::invalid_argument,
         "phase-randomized source requires the lorentzian lineshape");
  const std::size_t n = sample_count(duration, dt);
  Engine rng = seed.engine();
  std::uniform_real_distribution<double> uniform(0.0, two_pi);
  // Var[theta(t + tau) - theta(t)] = 2 |tau| / T_c  =>  |gamma| = exp(-|tau|/T_c)
  std::normal_distribution<double> step(0.0, std::sqrt(2.0 * dt / spec.coherence_time));

  ComplexEnvelope env;
  env.dt = dt;
  env.spec_hash = spec.hash();
  env.samples.resize(n);
  double theta = uniform(rng);
  for (std::size_t i = 0; i < n; ++i) {
    env.samples[i] = Complex(std::cos(theta), std::sin(theta));
    theta = std::remainder(theta + step(rng), two_pi);
  }
  apply_intensity_and_doppler(env, spec);
  return env;
}

ComplexEnvelope gen_cw_source(const ThermalFieldSpec& spec, double duration, double dt,
                              Seed seed) {
  switch (spec.statistics) {
    case FieldStatistics::thermal: return gen_cw_thermal(spec, duration, dt, seed);
    case FieldStatistics::phase_randomized:
      return gen_cw_phase_randomized(spec, duration, dt, seed);
  }
  fail(ErrorCode::invalid_argument, "unknown field statistics");
}

PulseTrain gen_pulsed_thermal(const ThermalFieldSpec& spec, std::size_t n_pulses,
                              double pulse_period, Seed seed) {
  spec.validate();
  if (n_pulses < min_pulses_for_statistics)
    fail(ErrorCode::invalid_argument,
         fmt::format("n_pulses = {} is below the minimum of {}", n_pulses,
                     min_pulses_for_statistics));
  require(pulse_period > 0.0, ErrorCode::invalid_argument, "pulse_period must be > 0");

  Engine rng = seed.engine();
  PulseTrain train;
  train.pulse_period = pulse_period;
  train.spec_hash = spec.hash();
  train.amplitudes.resize(n_pulses);

  if (spec.mode_count == 1.0) {
    // exponential intensity with uniform phase is a circular Gaussian amplitude
    std::normal_distribution<double> normal(0.0, std::sqrt(spec.mean_intensity / 2.0));
    for (auto& a : train.amplitudes) {
      const double re = normal(rng);
      a = Complex(re, normal(rng));
    }
    return train;
  }

  std::gamma_distribution<double> intensity(spec.mode_count,
                                            spec.mean_intensity / spec.mode_count);
  std::uniform_real_distribution<double> phase(0.0, two_pi);
  for (auto& a : train.amplitudes) {
    const double mu = intensity(rng);
    const double phi = phase(rng);
    a = std::polar(std::sqrt(mu), phi);
  }
  return train;
}

ComplexEnvelope gen_coherent_lo(const CoherentLOSpec& spec, double duration, double dt,
                                Seed seed, double t0) {
  spec.validate();
  const std::size_t n = sample_count(duration, dt);
  Engine rng = seed.engine();
  std::normal_distribution<double> jitter(0.0, 1.0);
  const double amplitude = std::sqrt(spec.intensity);

  ComplexEnvelope env;
  env.dt = dt;
  env.t0 = t0;
  env.spec_hash = spec.hash();
  env.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double phase = spec.static_phase + spec.scan.phase_at(env.time(i));
    if (spec.scan.jitter_rms > 0.0) phase += spec.scan.jitter_rms * jitter(rng);
    env.samples[i] = std::polar(amplitude, phase);
  }
  return env;
}

PulseTrain gen_coherent_lo_pulses(const CoherentLOSpec& spec, std::size_t n_pulses,
                                  double pulse_period, Seed seed, std::int64_t first_index) {
  spec.validate();
  require(pulse_period > 0.0, ErrorCode::invalid_argument, "pulse_period must be > 0");
  Engine rng = seed.engine();
  std::normal_distribution<double> jitter(0.0, 1.0);
  const double amplitude = std::sqrt(spec.intensity);

  PulseTrain train;
  train.pulse_period = pulse_period;
  train.first_index = first_index;
  train.spec_hash = spec.hash();
  train.amplitudes.resize(n_pulses);
  for (std::size_t i = 0; i < n_pulses; ++i) {
    const double t = static_cast<double>(train.index(i)) * pulse_period;
    double phase = spec.static_phase + spec.scan.phase_at(t);
    if (spec.scan.jitter_rms > 0.0) phase += spec.scan.jitter_rms * jitter(rng);
    train.amplitudes[i] = std::polar(amplitude, phase);
  }
  return train;
}

}  // namespace phbt
