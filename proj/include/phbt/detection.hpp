#pragma once

// Photodetection and correlators: band-limited analog photocurrents, gated
// Geiger-mode click records, and the g2 estimators built on them.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "phbt/field_engine.hpp"

namespace phbt {

struct DetectorSpec {
  double bandwidth = 30e6;            // Hz, 3 dB point of each filter pole
  int filter_order = 1;               // number of cascaded single poles
  double electronic_noise_rms = 0.0;  // current units
  double efficiency = 0.2;
  double dark_prob_per_gate = 1e-4;
  double gate_width = 2.5e-9;         // s
  double dead_time = 0.0;             // s

  void validate() const;
};

struct PhotocurrentTrace {
  std::vector<double> samples;
  double dt = 1.0;
  double t0 = 0.0;
  double noise_rms = 0.0;
  // False when dt is coarser than 1/(10 bandwidth); the filter then acts as
  // an identity on the sampled intensity.
  bool bandwidth_resolved = true;

  std::size_t size() const { return samples.size(); }
  double mean() const;
};

// Gate indices are first_gate, first_gate + 1, ... (strictly increasing).
struct ClickRecord {
  std::int64_t first_gate = 0;
  std::vector<std::uint8_t> clicked;
  double gate_period = 20e-9;

  std::size_t size() const { return clicked.size(); }
  std::int64_t gate_index(std::size_t i) const {
    return first_gate + static_cast<std::int64_t>(i);
  }
  double click_rate() const;
};

struct CorrelationEstimate {
  std::vector<double> tau;  // seconds, or pulse offsets for click records
  std::vector<double> g2;
  std::vector<double> std_error;
  double averaging_window = 0.0;  // seconds (analog) or pulses (clicks)
  std::size_t windows = 0;
  // Click correlators only: raw coincidence and pair counts per offset.
  std::vector<std::uint64_t> coincidences;
  std::vector<std::uint64_t> pairs;

  std::size_t size() const { return tau.size(); }
};

// Detected intensity is the sum over mutually incoherent modes (e.g. the
// co- and cross-polarized parts of a field) of |field|^2.
PhotocurrentTrace detect_analog(std::span<const ComplexEnvelope> modes,
                                const DetectorSpec& spec, Seed seed);
PhotocurrentTrace detect_analog(const ComplexEnvelope& field, const DetectorSpec& spec,
                                Seed seed);

// Cascaded single-pole IIR with 3 dB point `bandwidth`, initialized to x[0].
std::vector<double> lowpass(std::span<const double> x, double dt, double bandwidth, int order);

// g2 at integer lags (in samples) over the whole of both traces, which must
// share dt and t0 and length. Pairs (t, t + lag) are restricted to the
// record; normalization uses the means over the same pairs.
std::vector<double> g2_at_lags(const PhotocurrentTrace& i1, const PhotocurrentTrace& i2,
                               std::span<const long> lags);

// g2(tau) for tau in [-max_tau, max_tau] on the sample grid. Each record is
// cut into consecutive windows of length `window`; g2 is computed within
// each window and averaged, and stderr is the spread across windows.
CorrelationEstimate correlate_photocurrents(const PhotocurrentTrace& i1,
                                            const PhotocurrentTrace& i2, double max_tau,
                                            double window);

double click_probability(double mean_photons, double efficiency, double dark_prob);

// Per gate: P(click) = 1 - exp(-eta mu) (1 - dark), mu = sum of |A_j|^2 over
// modes. Gates closer than dead_time after a click are disarmed.
ClickRecord detect_spd(std::span<const PulseTrain> modes, const DetectorSpec& spec, Seed seed);
ClickRecord detect_spd(const PulseTrain& field, const DetectorSpec& spec, Seed seed);

// Dead-time memory for detecting a long train piece by piece.
struct SpdState {
  std::optional<std::int64_t> last_click_gate;
};
ClickRecord detect_spd(std::span<const PulseTrain> modes, const DetectorSpec& spec, Seed seed,
                       SpdState& state);

// Normalized coincidences between c1 at gate g and c2 at gate g - d, for
// d = electronic_delay - span ... electronic_delay + span. The record is cut
// into `blocks` consecutive blocks for the stderr.
CorrelationEstimate coincide(const ClickRecord& c1, const ClickRecord& c2,
                             std::int64_t electronic_delay, std::int64_t span = 0,
                             std::size_t blocks = 16);

}  // namespace phbt
