#pragma once

// Closed-form rates and visibilities for the phase-sensitive HBT scheme.
//
// Rates are in relative units: the alpha = 0, gamma = 0 thermal cw case
// evaluates to I * I_bar. Intensities here are the arm intensities seen at
// the mixing beam splitters.

#include <cstdint>

namespace phbt::oracle {

struct CwScenarioParams {
  double I = 1.0;
  double I_bar = 1.0;
  double a1sq = 1.0;  // |alpha_1|^2
  double a2sq = 1.0;  // |alpha_2|^2
  double gamma_abs = 1.0;
  double gamma_phase = 0.0;
  double dphi_alpha = 0.0;
  double lambda = 1.0;   // thermal |gamma|^2, coherent 0, single photon -1
  double overlap = 1.0;  // mode/polarization overlap folded into xi

  void validate() const;
};

// xi = overlap * 2 sqrt(a1sq a2sq I I_bar) / (I a2sq + I_bar a1sq); 0 when the
// denominator vanishes.
double xi_cw(const CwScenarioParams& p);

double gamma22_cw(const CwScenarioParams& p);

// Fringe visibility of gamma22_cw as a function of dphi_alpha.
double visibility_cw(const CwScenarioParams& p);

// Mean (phase-averaged) level of gamma22_cw.
double fringe_mean_cw(const CwScenarioParams& p);

// Interference weight of the pulsed coincidence rate. `consistent` uses
// 2 nbar |alpha|^2, the per-pulse analog of the cw (I a2sq + I_bar a1sq);
// `printed` uses 2 nbar^2 |alpha|^2.
enum class PulsedWeight { consistent, printed };

struct PulsedScenarioParams {
  double nbar = 1.0;      // photons/pulse per arm
  double alpha_sq = 1.0;  // |alpha|^2 photons/pulse per arm
  double g2_in = 2.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
  double gamma_abs = 1.0;
  double gamma_phase = 0.0;
  double dphi_alpha = 0.0;
  double rep_rate = 50e6;  // Hz
  std::int64_t dN = 0;

  void validate() const;
};

// |gamma(dN)| is zero unless dN == 0.
double effective_coherence(const PulsedScenarioParams& p);

double rate_pulsed(const PulsedScenarioParams& p, PulsedWeight weight = PulsedWeight::consistent);
double visibility_pulsed(const PulsedScenarioParams& p,
                         PulsedWeight weight = PulsedWeight::consistent);

// Inverts visibility_pulsed for x = beta1 beta2 |gamma|.
double pulsed_coherence_from_visibility(double visibility, double g2_in, double nbar,
                                        double alpha_sq,
                                        PulsedWeight weight = PulsedWeight::consistent);

// Zero-delay click coincidence ratio E[P1 P2] / (E[P1] E[P2]) of two gated
// detectors each seeing half of a pulse whose intensity is Gamma(M) with the
// given mean. Saturation and dark counts pull it below 1 + 1/M.
double click_g2_thermal(double mean_intensity, double mode_count, double efficiency,
                        double dark_prob);

struct AntibunchedLOParams {
  double lambda_lo = -1.0;
  double T_lo = 1e-9;  // s, antibunching window
  double I_lo = 1e9;   // photons/s
  double T_r = 1e-9;   // s, coincidence window
  double T_c = 1e-9;   // s, coherence time of the thermal input
  double tau_e = 0.0;  // s, coincidence delay
  double T_o = 0.0;    // s, LO-LO optical delay

  void validate() const;
};

// With anti-bunched LOs the LO-LO term carries [1 + lambda_lo]; a1sq, a2sq of
// `signal` are the LO intensities.
double gamma22_antibunched(const AntibunchedLOParams& p, const CwScenarioParams& signal);

// The LO-LO two-photon term alone.
double lo_pair_term(const AntibunchedLOParams& p, const CwScenarioParams& signal);

struct ZetaReport {
  double zeta = 0.0;        // I_lo T_r
  double zeta_bound = 0.0;  // T_r / T_lo, the value for I_lo = 1/T_lo
  // lambda_lo = -1 holds over the whole coincidence window because the
  // antibunching window outlasts the thermal coherence time.
  bool long_window = false;
  // ... or because the LO delay T_o tracks tau_e: |tau_e - T_o| + T_r/2 <= T_lo.
  bool delayed_window = false;
  bool window_covered = false;
};

ZetaReport signal_rate_zeta(const AntibunchedLOParams& p);

}  // namespace phbt::oracle
