#pragma once

// Reconstruction of the complex coherence function from interference
// fringes: fringe fitting, visibility inversion, phase referencing and
// unwrapping, Doppler slope, and the LO-blocked g2 cross-check.

#include <cstddef>
#include <span>
#include <vector>

#include "phbt/detection.hpp"

namespace phbt {

struct FringeScan {
  std::vector<double> phase;  // scanned LO phase difference, rad
  std::vector<double> value;  // g2 or coincidence rate
  std::vector<double> std_error;  // optional, same length as value
  double tau = 0.0;

  void validate() const;
};

struct FringeFit {
  double tau = 0.0;
  double mean_level = 0.0;
  double visibility = 0.0;    // >= 0; sign absorbed into phase_offset
  double phase_offset = 0.0;  // (-pi, pi]
  double residual_rms = 0.0;
  double visibility_stderr = 0.0;
  double phase_stderr = 0.0;
  std::size_t points = 0;
};

// Least squares fit of value = m [1 + V cos(phase + phi0)], done as the
// linear problem c0 + c1 cos + c2 sin.
FringeFit fit_fringe(const FringeScan& scan);

// What to do with a visibility whose root exceeds |gamma| = 1.
enum class ClampPolicy { clamp, allow, error };

struct GammaValue {
  double gamma_abs = 0.0;
  bool flagged = false;
};

// Thermal input: V = 2 xi |g| / (4 + |g|^2); returns the "-" root
// |g| = 4V / (xi + sqrt(xi^2 - 4 V^2)).
GammaValue visibility_to_gamma(double visibility, double xi,
                               ClampPolicy policy = ClampPolicy::clamp);

// d|gamma|/dV of the thermal inversion, for error propagation.
double visibility_to_gamma_slope(double gamma_abs, double xi);

// Phase-randomized coherent input (lambda = 0): V = xi |g| / 2.
GammaValue visibility_to_gamma_coherent(double visibility, double xi,
                                        ClampPolicy policy = ClampPolicy::clamp);

enum class InputStatistics { thermal, coherent };

struct CoherenceFunction {
  std::vector<double> tau;
  std::vector<double> gamma_abs;
  std::vector<double> gamma_phase;  // unwrapped, referenced to tau = 0
  std::vector<double> gamma_stderr;
  std::vector<double> phase_stderr;
  std::vector<bool> flagged;
  double xi = 1.0;

  std::size_t size() const { return tau.size(); }
};

CoherenceFunction extract_phase_curve(std::span<const FringeFit> fits, double xi,
                                      InputStatistics input = InputStatistics::thermal,
                                      ClampPolicy policy = ClampPolicy::clamp);

struct DopplerFit {
  double doppler_shift = 0.0;  // rad/s, = -slope of phase vs tau
  double std_error = 0.0;
  std::size_t bins = 0;
};

DopplerFit fit_doppler(const CoherenceFunction& cf, double min_gamma = 0.1);

struct GammaEstimate {
  std::vector<double> tau;
  std::vector<double> gamma_abs;
  std::vector<double> std_error;
  std::vector<bool> flagged;  // g2 below 1 - 3 stderr
};

// |gamma| = sqrt(max(g2 - 1, 0)).
GammaEstimate gamma_from_g2(const CorrelationEstimate& g2);

struct CrosscheckReport {
  std::vector<double> tau;
  std::vector<double> difference;  // A - B
  double rms = 0.0;
  double max_abs = 0.0;
  double mean_bias = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Compares cfA.gamma_abs with B linearly interpolated onto cfA's tau grid.
CrosscheckReport crosscheck(const CoherenceFunction& cfA, const GammaEstimate& gammaB,
                            double tolerance);

// Wraps an angle into (-pi, pi].
double wrap_phase(double phi);

}  // namespace phbt
