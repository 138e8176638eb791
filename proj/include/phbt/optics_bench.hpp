#pragma once

// Lossless linear optics between sources and detectors.
//
// Beam-splitter convention (fixed throughout the project): the transmitted
// port is unchanged and the reflected port picks up a factor i, i.e. for
// inputs (x, y) the outputs are ((x + i y)/sqrt2, (i x + y)/sqrt2). Any other
// unitary convention only offsets the scanned LO phase.

#include <cstdint>

#include "phbt/field_engine.hpp"

namespace phbt {

template <class Field>
struct BeamSplitterOut {
  Field out_a;
  Field out_b;
};

BeamSplitterOut<ComplexEnvelope> split(const ComplexEnvelope& input);
BeamSplitterOut<PulseTrain> split(const PulseTrain& input);

// out_a = (signal + i lo)/sqrt2, out_b = (i signal + lo)/sqrt2.
// Both inputs must share the sampling grid (dt/pulse_period, start, length).
BeamSplitterOut<ComplexEnvelope> mix(const ComplexEnvelope& signal,
                                     const ComplexEnvelope& lo);
BeamSplitterOut<PulseTrain> mix(const PulseTrain& signal, const PulseTrain& lo);

// Delays the field by `shift` seconds: out(t) = in(t - shift). The result is
// truncated to the part of the shifted record that still lies inside the
// input's time window (no wraparound), and t0 is updated accordingly.
// The shift must be a whole number of samples.
ComplexEnvelope delay(const ComplexEnvelope& input, double shift);

// Pulse-index delay: out_j = in_{j - shift}; first_index advances by shift.
PulseTrain delay(const PulseTrain& input, std::int64_t shift);

// Amplitude scaled by sqrt(transmission), transmission in [0, 1].
ComplexEnvelope attenuate(const ComplexEnvelope& input, double transmission);
PulseTrain attenuate(const PulseTrain& input, double transmission);

// Multiplies every sample by exp(i delta) with delta ~ N(0, rms^2). Leaves
// intensities untouched and lowers the field coherence with any other copy
// by exp(-rms^2/2); models a path with fast phase noise.
PulseTrain dephase(const PulseTrain& input, double rms, Seed seed);

// Truncates both records to their common time (or pulse-index) support.
void common_support(ComplexEnvelope& a, ComplexEnvelope& b);
void common_support(PulseTrain& a, PulseTrain& b);

// Sample-wise scalar multiple, used for splitting an LO into co- and
// cross-polarized parts.
ComplexEnvelope scaled(const ComplexEnvelope& input, Complex factor);
PulseTrain scaled(const PulseTrain& input, Complex factor);

}  // namespace phbt
