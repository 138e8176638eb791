#pragma once

// Optical field synthesis: quasi-thermal and phase-randomized cw envelopes,
// pulsed multi-mode thermal trains and coherent local oscillators.
//
// Field amplitudes are in sqrt(photons/second) for envelopes and
// sqrt(photons/pulse) for pulse trains, so |sample|^2 is an intensity.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "phbt/rng.hpp"

namespace phbt {

using Complex = std::complex<double>;

enum class Lineshape { gaussian, lorentzian };

// thermal: circular complex Gaussian (chaotic) light, lambda(tau) = |gamma|^2.
// phase_randomized: constant intensity with diffusing phase, lambda = 0.
enum class FieldStatistics { thermal, phase_randomized };

struct ThermalFieldSpec {
  double mean_intensity = 1.0;   // photons/s (cw) or photons/pulse (pulsed)
  double coherence_time = 7e-6;  // s; |gamma| = exp(-1/2) here for gaussian
  Lineshape lineshape = Lineshape::gaussian;
  double doppler_shift = 0.0;    // rad/s
  double mode_count = 1.0;       // temporal modes per pulse, >= 1
  FieldStatistics statistics = FieldStatistics::thermal;

  void validate() const;
  std::uint64_t hash() const;
};

enum class ScanWaveform { linear_ramp, triangle, static_phase };

struct PhaseScanSpec {
  ScanWaveform waveform = ScanWaveform::static_phase;
  double rate = 0.0;        // rad/s
  double jitter_rms = 0.0;  // rad, iid per sample

  void validate() const;
  // Deterministic part of the scan phase at time t (no jitter).
  double phase_at(double t) const;
};

struct CoherentLOSpec {
  double intensity = 1.0;  // |alpha|^2, photons/s or photons/pulse
  double static_phase = 0.0;
  PhaseScanSpec scan;

  void validate() const;
  std::uint64_t hash() const;
};

struct ComplexEnvelope {
  std::vector<Complex> samples;
  double dt = 1.0;
  double t0 = 0.0;
  std::uint64_t spec_hash = 0;

  std::size_t size() const { return samples.size(); }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  double mean_intensity() const;
  void validate() const;
};

struct PulseTrain {
  std::vector<Complex> amplitudes;
  double pulse_period = 20e-9;
  double beta1 = 1.0;  // temporal mode-match factors
  double beta2 = 1.0;
  std::int64_t first_index = 0;  // pulse index j of amplitudes[0]
  std::uint64_t spec_hash = 0;

  std::size_t size() const { return amplitudes.size(); }
  std::int64_t index(std::size_t i) const {
    return first_index + static_cast<std::int64_t>(i);
  }
  double mean_intensity() const;
  void validate() const;
};

// Magnitude of the model coherence function |gamma(tau)| for a lineshape.
double coherence_magnitude(Lineshape shape, double tau, double coherence_time);

// Model gamma(tau) = <V(t) V*(t+tau)> / <|V|^2>, including the Doppler phase.
Complex model_gamma(const ThermalFieldSpec& spec, double tau);

/// Synthesizes thermal envelopes of a fixed length by spectral shaping of
/// white circular Gaussian noise.
///
/// The target autocorrelation r(m dt) = |gamma(m dt)| is transformed to a
/// power spectrum once at construction; each generate() call draws fresh
/// noise and shapes it. The DFT length is padded beyond the record so the
/// circular wrap of the shaped noise never correlates retained samples.
class ThermalSynthesizer {
 public:
  ThermalSynthesizer(const ThermalFieldSpec& spec, double duration, double dt);

  ComplexEnvelope generate(Seed seed) const;

  std::size_t samples() const { return samples_; }
  std::size_t fft_size() const { return sqrt_spectrum_.size(); }

 private:
  ThermalFieldSpec spec_;
  double dt_;
  std::size_t samples_;
  std::vector<double> sqrt_spectrum_;
};

ComplexEnvelope gen_cw_thermal(const ThermalFieldSpec& spec, double duration,
                               double dt, Seed seed);

// Constant-intensity field with Wiener phase diffusion; gamma is
// exp(-|tau|/T_c), so only the lorentzian lineshape is accepted.
ComplexEnvelope gen_cw_phase_randomized(const ThermalFieldSpec& spec,
                                        double duration, double dt, Seed seed);

// Dispatches on spec.statistics.
ComplexEnvelope gen_cw_source(const ThermalFieldSpec& spec, double duration,
                              double dt, Seed seed);

// Per-pulse intensity ~ Gamma(shape M, scale nbar/M), phase uniform and
// independent from pulse to pulse, giving g2 = 1 + 1/M.
PulseTrain gen_pulsed_thermal(const ThermalFieldSpec& spec, std::size_t n_pulses,
                              double pulse_period, Seed seed);

inline constexpr std::size_t min_pulses_for_statistics = 10000;

ComplexEnvelope gen_coherent_lo(const CoherentLOSpec& spec, double duration,
                                double dt, Seed seed, double t0 = 0.0);

PulseTrain gen_coherent_lo_pulses(const CoherentLOSpec& spec, std::size_t n_pulses,
                                  double pulse_period, Seed seed,
                                  std::int64_t first_index = 0);

// Number of samples for a record of the given duration.
std::size_t sample_count(double duration, double dt);

}  // namespace phbt
