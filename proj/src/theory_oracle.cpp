#include "phbt/theory_oracle.hpp"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "phbt/error.hpp"

namespace phbt::oracle {

namespace {

void nonneg(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v))
    fail(ErrorCode::invalid_argument, fmt::format("{} must be >= 0 (got {})", name, v));
}

void unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    fail(ErrorCode::invalid_argument, fmt::format("{} must lie in [0, 1] (got {})", name, v));
}

// Shared body of the coherent- and anti-bunched-LO forms; lo_factor is
// 1 + lambda_lo. Keeping one expression makes lambda_lo = 0 reproduce the
// coherent-LO value bit for bit.
double gamma22(const CwScenarioParams& p, double lo_factor) {
  const double weight = p.I * p.a2sq + p.I_bar * p.a1sq;
  const double xi = xi_cw(p);
  return p.I * p.I_bar * (1.0 + p.lambda) + p.a1sq * p.a2sq * lo_factor +
         weight * (1.0 + xi * p.gamma_abs * std::cos(p.gamma_phase + p.dphi_alpha));
}

double pulsed_weight(double nbar, double alpha_sq, PulsedWeight w) {
  return w == PulsedWeight::consistent ? 2.0 * nbar * alpha_sq : 2.0 * nbar * nbar * alpha_sq;
}

double pulsed_g2(const PulsedScenarioParams& p) {
  // distinct pulses are independent: <|A_j|^2 |A_{j+dN}|^2> = nbar^2
  return p.dN == 0 ? p.g2_in : 1.0;
}

}  // namespace

void CwScenarioParams::validate() const {
  nonneg(I, "I");
  nonneg(I_bar, "I_bar");
  nonneg(a1sq, "a1sq");
  nonneg(a2sq, "a2sq");
  unit_interval(gamma_abs, "gamma_abs");
  unit_interval(overlap, "overlap");
  if (!(lambda >= -1.0))
    fail(ErrorCode::invalid_argument, fmt::format("lambda must be >= -1 (got {})", lambda));
}

double xi_cw(const CwScenarioParams& p) {
  const double weight = p.I * p.a2sq + p.I_bar * p.a1sq;
  if (!(weight > 0.0)) return 0.0;
  return p.overlap * 2.0 * std::sqrt(p.a1sq * p.a2sq * p.I * p.I_bar) / weight;
}

double gamma22_cw(const CwScenarioParams& p) {
  p.validate();
  return gamma22(p, 1.0);
}

double fringe_mean_cw(const CwScenarioParams& p) {
  p.validate();
  return p.I * p.I_bar * (1.0 + p.lambda) + p.a1sq * p.a2sq + p.I * p.a2sq + p.I_bar * p.a1sq;
}

double visibility_cw(const CwScenarioParams& p) {
  const double mean = fringe_mean_cw(p);
  if (!(mean > 0.0)) return 0.0;
  const double weight = p.I * p.a2sq + p.I_bar * p.a1sq;
  return weight * xi_cw(p) * p.gamma_abs / mean;
}

void PulsedScenarioParams::validate() const {
  nonneg(nbar, "nbar");
  nonneg(alpha_sq, "alpha_sq");
  nonneg(g2_in, "g2_in");
  unit_interval(beta1, "beta1");
  unit_interval(beta2, "beta2");
  unit_interval(gamma_abs, "gamma_abs");
  nonneg(rep_rate, "rep_rate");
}

double effective_coherence(const PulsedScenarioParams& p) {
  return p.dN == 0 ? p.beta1 * p.beta2 * p.gamma_abs : 0.0;
}

double rate_pulsed(const PulsedScenarioParams& p, PulsedWeight weight) {
  p.validate();
  const double w = pulsed_weight(p.nbar, p.alpha_sq, weight);
  const double x = effective_coherence(p);
  return 0.25 * p.rep_rate *
         (p.nbar * p.nbar * pulsed_g2(p) + p.alpha_sq * p.alpha_sq +
          w * (1.0 + x * std::cos(p.gamma_phase + p.dphi_alpha)));
}

double visibility_pulsed(const PulsedScenarioParams& p, PulsedWeight weight) {
  p.validate();
  const double w = pulsed_weight(p.nbar, p.alpha_sq, weight);
  const double mean = p.nbar * p.nbar * pulsed_g2(p) + p.alpha_sq * p.alpha_sq + w;
  if (!(mean > 0.0)) return 0.0;
  return w * effective_coherence(p) / mean;
}

double pulsed_coherence_from_visibility(double visibility, double g2_in, double nbar,
                                        double alpha_sq, PulsedWeight weight) {
  nonneg(visibility, "visibility");
  const double w = pulsed_weight(nbar, alpha_sq, weight);
  if (!(w > 0.0))
    fail(ErrorCode::invalid_argument, "pulsed interference weight is zero");
  return visibility * (nbar * nbar * g2_in + alpha_sq * alpha_sq + w) / w;
}

void AntibunchedLOParams::validate() const {
  if (!(lambda_lo >= -1.0))
    fail(ErrorCode::invalid_argument,
         fmt::format("lambda_lo must be >= -1 (got {})", lambda_lo));
  if (!(T_lo > 0.0)) fail(ErrorCode::invalid_argument, "T_lo must be > 0");
  if (!(T_c > 0.0)) fail(ErrorCode::invalid_argument, "T_c must be > 0");
  nonneg(T_r, "T_r");
  nonneg(I_lo, "I_lo");
  if (!std::isfinite(tau_e) || !std::isfinite(T_o))
    fail(ErrorCode::invalid_argument, "tau_e and T_o must be finite");
}

double gamma22_antibunched(const AntibunchedLOParams& p, const CwScenarioParams& signal) {
  p.validate();
  signal.validate();
  return gamma22(signal, 1.0 + p.lambda_lo);
}

double click_g2_thermal(double mean_intensity, double mode_count, double efficiency,
                        double dark_prob) {
  require(mean_intensity >= 0.0 && mode_count > 0.0, ErrorCode::invalid_argument,
          "mean_intensity must be >= 0 and mode_count > 0");
  require(efficiency >= 0.0 && efficiency <= 1.0 && dark_prob >= 0.0 && dark_prob < 1.0,
          ErrorCode::invalid_argument, "efficiency in [0, 1], dark_prob in [0, 1)");
  const double theta = mean_intensity / mode_count;
  const double a = efficiency / 2.0;
  // log of P(no click) for one detector; both-dark = e^{2x + d}
  const double x = std::log1p(-dark_prob) - mode_count * std::log1p(a * theta);
  const double d = mode_count * std::log1p(a * theta * a * theta / (1.0 + 2.0 * a * theta));
  const double single = -std::expm1(x);
  if (single <= 0.0) return 1.0;
  // 1 - 2 e^x + e^{2x + d}, rearranged to avoid cancellation for weak light
  const double both = single * single + std::exp(2.0 * x) * std::expm1(d);
  return both / (single * single);
}

double lo_pair_term(const AntibunchedLOParams& p, const CwScenarioParams& signal) {
  p.validate();
  signal.validate();
  return signal.a1sq * signal.a2sq * (1.0 + p.lambda_lo);
}

ZetaReport signal_rate_zeta(const AntibunchedLOParams& p) {
  p.validate();
  ZetaReport r;
  r.zeta = p.I_lo * p.T_r;
  r.zeta_bound = p.T_r / p.T_lo;
  r.long_window = p.T_lo > p.T_c;
  r.delayed_window = std::abs(p.tau_e - p.T_o) + 0.5 * p.T_r <= p.T_lo;
  r.window_covered = r.long_window || r.delayed_window;
  return r;
}

}  // namespace phbt::oracle
