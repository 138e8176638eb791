#include "phbt/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "phbt/error.hpp"

namespace phbt {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * std::numbers::pi;

using Mat3 = std::array<std::array<double, 3>, 3>;

bool invert3(const Mat3& m, Mat3& inv) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  double scale = 0.0;
  for (const auto& row : m)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || std::abs(det) <= 1e-12 * scale * scale * scale) return false;
  const double id = 1.0 / det;
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * id;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * id;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * id;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * id;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * id;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * id;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * id;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * id;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * id;
  return true;
}

GammaValue apply_policy(double g, ClampPolicy policy, const char* what) {
  if (g <= 1.0) return {g, false};
  switch (policy) {
    case ClampPolicy::clamp: return {1.0, true};
    case ClampPolicy::allow: return {g, true};
    case ClampPolicy::error:
      fail(ErrorCode::no_real_root, fmt::format("{}: inverted |gamma| = {} exceeds 1", what, g));
  }
  return {g, true};
}

void check_xi(double xi) {
  if (!(xi > 0.0 && xi <= 1.0))
    fail(ErrorCode::invalid_argument, fmt::format("xi must lie in (0, 1] (got {})", xi));
}

}  // namespace

double wrap_phase(double phi) {
  double w = std::remainder(phi, two_pi);
  if (w <= -pi) w += two_pi;
  return w;
}

void FringeScan::validate() const {
  if (phase.size() != value.size())
    fail(ErrorCode::invalid_argument, "fringe phase and value lengths differ");
  if (!std_error.empty() && std_error.size() != value.size())
    fail(ErrorCode::invalid_argument, "fringe stderr length differs from value length");
  if (phase.size() < 8)
    fail(ErrorCode::invalid_argument,
         fmt::format("fringe needs at least 8 points (got {})", phase.size()));
  const auto [lo, hi] = std::minmax_element(phase.begin(), phase.end());
  const double n = static_cast<double>(phase.size());
  // uniformly stepped points cover span * n / (n - 1) of phase
  const double coverage = (*hi - *lo) * n / (n - 1.0);
  if (coverage < two_pi * (1.0 - 1e-9))
    fail(ErrorCode::invalid_argument,
         fmt::format("fringe phase coverage {} rad is below 2 pi", coverage));
}

FringeFit fit_fringe(const FringeScan& scan) {
  scan.validate();
  const std::size_t n = scan.phase.size();
  Mat3 ata{};
  std::array<double, 3> aty{};
  for (std::size_t i = 0; i < n; ++i) {
    const std::array<double, 3> row{1.0, std::cos(scan.phase[i]), std::sin(scan.phase[i])};
    for (int r = 0; r < 3; ++r) {
      aty[r] += row[r] * scan.value[i];
      for (int c = 0; c < 3; ++c) ata[r][c] += row[r] * row[c];
    }
  }
  Mat3 inv{};
  if (!invert3(ata, inv)) fail(ErrorCode::fit_degenerate, "fringe design matrix is singular");
  std::array<double, 3> c{};
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) c[r] += inv[r][k] * aty[k];

  if (!(c[0] > 0.0))
    fail(ErrorCode::fit_degenerate,
         fmt::format("fringe mean level {} is not positive", c[0]));

  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double model = c[0] + c[1] * std::cos(scan.phase[i]) + c[2] * std::sin(scan.phase[i]);
    const double r = scan.value[i] - model;
    rss += r * r;
  }
  const double sigma2 = n > 3 ? rss / static_cast<double>(n - 3) : 0.0;

  FringeFit fit;
  fit.tau = scan.tau;
  fit.points = n;
  fit.mean_level = c[0];
  fit.residual_rms = std::sqrt(rss / static_cast<double>(n));

  const double amp = std::hypot(c[1], c[2]);
  const double var1 = sigma2 * inv[1][1];
  const double var2 = sigma2 * inv[2][2];
  if (amp <= 1e-12 * c[0]) {
    fit.visibility = 0.0;
    fit.phase_offset = 0.0;
    fit.visibility_stderr = std::sqrt(std::max(0.0, var1 + var2)) / c[0];
    fit.phase_stderr = pi;
    return fit;
  }
  fit.visibility = amp / c[0];
  fit.phase_offset = wrap_phase(std::atan2(-c[2], c[1]));

  // delta-method propagation through V = |c12| / c0 and phi0 = atan2(-c2, c1)
  const std::array<double, 3> dv{-amp / (c[0] * c[0]), c[1] / (amp * c[0]), c[2] / (amp * c[0])};
  const std::array<double, 3> dphi{0.0, c[2] / (amp * amp), -c[1] / (amp * amp)};
  double var_v = 0.0, var_phi = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) {
      var_v += dv[r] * dv[k] * sigma2 * inv[r][k];
      var_phi += dphi[r] * dphi[k] * sigma2 * inv[r][k];
    }
  fit.visibility_stderr = std::sqrt(std::max(0.0, var_v));
  fit.phase_stderr = std::sqrt(std::max(0.0, var_phi));
  return fit;
}

GammaValue visibility_to_gamma(double visibility, double xi, ClampPolicy policy) {
  check_xi(xi);
  if (!(visibility >= 0.0) || !std::isfinite(visibility))
    fail(ErrorCode::invalid_argument,
         fmt::format("visibility must be >= 0 (got {})", visibility));
  const double disc = xi * xi - 4.0 * visibility * visibility;
  if (disc < 0.0) {
    // beyond xi/2 there is no real root at all
    if (policy == ClampPolicy::error)
      fail(ErrorCode::no_real_root,
           fmt::format("visibility {} exceeds xi/2 = {}", visibility, xi / 2.0));
    return {policy == ClampPolicy::allow ? 2.0 : 1.0, true};
  }
  // rationalized "-" root, stable as V -> 0
  const double g = 4.0 * visibility / (xi + std::sqrt(disc));
  return apply_policy(g, policy, "visibility_to_gamma");
}

double visibility_to_gamma_slope(double gamma_abs, double xi) {
  const double g2 = gamma_abs * gamma_abs;
  const double dv = 2.0 * xi * (4.0 - g2) / ((4.0 + g2) * (4.0 + g2));
  return dv > 0.0 ? 1.0 / dv : 0.0;
}

GammaValue visibility_to_gamma_coherent(double visibility, double xi, ClampPolicy policy) {
  check_xi(xi);
  if (!(visibility >= 0.0) || !std::isfinite(visibility))
    fail(ErrorCode::invalid_argument,
         fmt::format("visibility must be >= 0 (got {})", visibility));
  return apply_policy(2.0 * visibility / xi, policy, "visibility_to_gamma_coherent");
}

CoherenceFunction extract_phase_curve(std::span<const FringeFit> fits, double xi,
                                      InputStatistics input, ClampPolicy policy) {
  check_xi(xi);
  std::vector<FringeFit> sorted(fits.begin(), fits.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const FringeFit& a, const FringeFit& b) { return a.tau < b.tau; });
  for (std::size_t k = 1; k < sorted.size(); ++k)
    if (!(sorted[k].tau > sorted[k - 1].tau))
      fail(ErrorCode::invalid_argument, "fringe delays must be distinct");

  double scale = 0.0;
  for (const auto& f : sorted) scale = std::max(scale, std::abs(f.tau));
  std::size_t ref = sorted.size();
  for (std::size_t k = 0; k < sorted.size(); ++k)
    if (std::abs(sorted[k].tau) <= 1e-9 * scale) ref = k;
  if (ref == sorted.size())
    fail(ErrorCode::missing_reference_delay, "no fringe at tau = 0 to reference phases against");

  CoherenceFunction cf;
  cf.xi = xi;
  const std::size_t n = sorted.size();
  cf.tau.resize(n);
  cf.gamma_abs.resize(n);
  cf.gamma_phase.resize(n);
  cf.gamma_stderr.resize(n);
  cf.phase_stderr.resize(n);
  cf.flagged.resize(n);

  for (std::size_t k = 0; k < n; ++k) {
    const auto& f = sorted[k];
    cf.tau[k] = f.tau;
    GammaValue g;
    double slope;
    if (input == InputStatistics::thermal) {
      g = visibility_to_gamma(f.visibility, xi, policy);
      slope = visibility_to_gamma_slope(std::min(g.gamma_abs, 1.0), xi);
    } else {
      g = visibility_to_gamma_coherent(f.visibility, xi, policy);
      slope = 2.0 / xi;
    }
    cf.gamma_abs[k] = g.gamma_abs;
    cf.flagged[k] = g.flagged;
    cf.gamma_stderr[k] = slope * f.visibility_stderr;
    cf.phase_stderr[k] = f.phase_stderr;
  }

  // nearest-branch unwrapping outward from the reference bin
  const double ref_phase = sorted[ref].phase_offset;
  cf.gamma_phase[ref] = 0.0;
  cf.phase_stderr[ref] = 0.0;
  for (std::size_t k = ref + 1; k < n; ++k) {
    const double raw = wrap_phase(sorted[k].phase_offset - ref_phase);
    cf.gamma_phase[k] = cf.gamma_phase[k - 1] + wrap_phase(raw - cf.gamma_phase[k - 1]);
  }
  for (std::size_t k = ref; k-- > 0;) {
    const double raw = wrap_phase(sorted[k].phase_offset - ref_phase);
    cf.gamma_phase[k] = cf.gamma_phase[k + 1] + wrap_phase(raw - cf.gamma_phase[k + 1]);
  }
  return cf;
}

DopplerFit fit_doppler(const CoherenceFunction& cf, double min_gamma) {
  std::vector<std::size_t> use;
  for (std::size_t k = 0; k < cf.size(); ++k)
    if (cf.gamma_abs[k] > min_gamma) use.push_back(k);
  if (use.size() < 3)
    fail(ErrorCode::insufficient_bins,
         fmt::format("Doppler fit needs >= 3 bins with |gamma| > {} (got {})", min_gamma,
                     use.size()));

  bool sigma_weights = true;
  for (auto k : use)
    if (!(cf.phase_stderr[k] > 0.0) && std::abs(cf.tau[k]) > 0.0) sigma_weights = false;

  std::vector<double> w(use.size());
  for (std::size_t i = 0; i < use.size(); ++i) {
    const auto k = use[i];
    if (sigma_weights) {
      // the reference bin has zero phase error by construction
      const double s = cf.phase_stderr[k] > 0.0 ? cf.phase_stderr[k] : 0.0;
      w[i] = s > 0.0 ? 1.0 / (s * s) : 0.0;
    } else {
      w[i] = cf.gamma_abs[k] * cf.gamma_abs[k];
    }
  }
  if (sigma_weights) {
    // give the reference bin the largest weight among the others
    const double wmax = *std::max_element(w.begin(), w.end());
    for (auto& v : w)
      if (v == 0.0) v = wmax;
  }

  double sw = 0.0, st = 0.0, sp = 0.0;
  for (std::size_t i = 0; i < use.size(); ++i) {
    sw += w[i];
    st += w[i] * cf.tau[use[i]];
    sp += w[i] * cf.gamma_phase[use[i]];
  }
  const double tbar = st / sw, pbar = sp / sw;
  double stt = 0.0, stp = 0.0;
  for (std::size_t i = 0; i < use.size(); ++i) {
    const double dtau = cf.tau[use[i]] - tbar;
    stt += w[i] * dtau * dtau;
    stp += w[i] * dtau * (cf.gamma_phase[use[i]] - pbar);
  }
  if (!(stt > 0.0)) fail(ErrorCode::insufficient_bins, "Doppler fit bins share a single delay");
  const double slope = stp / stt;
  const double intercept = pbar - slope * tbar;

  double rss = 0.0;
  for (std::size_t i = 0; i < use.size(); ++i) {
    const double r = cf.gamma_phase[use[i]] - (intercept + slope * cf.tau[use[i]]);
    rss += w[i] * r * r;
  }
  const double dof = static_cast<double>(use.size()) - 2.0;
  double var = 0.0;
  if (sigma_weights) {
    // formal error, inflated when the scatter exceeds the quoted errors
    const double chi2 = dof > 0.0 ? rss / dof : 0.0;
    var = std::max(1.0, chi2) / stt;
  } else {
    var = dof > 0.0 ? rss / dof / stt : 0.0;
  }

  DopplerFit out;
  out.doppler_shift = -slope;
  out.std_error = std::sqrt(var);
  out.bins = use.size();
  return out;
}

GammaEstimate gamma_from_g2(const CorrelationEstimate& g2) {
  GammaEstimate out;
  out.tau = g2.tau;
  const std::size_t n = g2.g2.size();
  out.gamma_abs.resize(n);
  out.std_error.resize(n);
  out.flagged.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double se = k < g2.std_error.size() ? g2.std_error[k] : 0.0;
    const double excess = g2.g2[k] - 1.0;
    const double g = std::sqrt(std::max(excess, 0.0));
    out.gamma_abs[k] = g;
    out.flagged[k] = excess < -3.0 * se;
    // delta method, bounded near |gamma| = 0 where it diverges
    out.std_error[k] = g > std::sqrt(se) ? se / (2.0 * g) : std::sqrt(se);
  }
  return out;
}

CrosscheckReport crosscheck(const CoherenceFunction& cfA, const GammaEstimate& gammaB,
                            double tolerance) {
  const auto& tb = gammaB.tau;
  if (tb.size() < 1 || tb.size() != gammaB.gamma_abs.size())
    fail(ErrorCode::grid_mismatch, "reference |gamma| curve is empty or malformed");
  for (std::size_t k = 1; k < tb.size(); ++k)
    if (!(tb[k] > tb[k - 1]))
      fail(ErrorCode::grid_mismatch, "reference tau grid must be strictly increasing");
  const double span = std::max(std::abs(tb.front()), std::abs(tb.back()));
  const double slack = 1e-9 * std::max(span, 1e-300);

  CrosscheckReport rep;
  rep.tolerance = tolerance;
  double ss = 0.0, sum = 0.0;
  for (std::size_t k = 0; k < cfA.size(); ++k) {
    const double t = cfA.tau[k];
    if (t < tb.front() - slack || t > tb.back() + slack)
      fail(ErrorCode::grid_mismatch,
           fmt::format("delay {} s lies outside the reference grid [{}, {}]", t, tb.front(),
                       tb.back()));
    double b;
    if (tb.size() == 1) {
      b = gammaB.gamma_abs[0];
    } else {
      auto it = std::lower_bound(tb.begin(), tb.end(), t - slack);
      std::size_t hi = static_cast<std::size_t>(it - tb.begin());
      if (hi >= tb.size()) hi = tb.size() - 1;
      if (std::abs(tb[hi] - t) <= slack) {
        b = gammaB.gamma_abs[hi];
      } else {
        const std::size_t lo = hi == 0 ? 0 : hi - 1;
        const double f = (t - tb[lo]) / (tb[hi] - tb[lo]);
        b = gammaB.gamma_abs[lo] + f * (gammaB.gamma_abs[hi] - gammaB.gamma_abs[lo]);
      }
    }
    const double d = cfA.gamma_abs[k] - b;
    rep.tau.push_back(t);
    rep.difference.push_back(d);
    ss += d * d;
    sum += d;
    rep.max_abs = std::max(rep.max_abs, std::abs(d));
  }
  const double n = static_cast<double>(rep.tau.size());
  rep.rms = n > 0 ? std::sqrt(ss / n) : 0.0;
  rep.mean_bias = n > 0 ? sum / n : 0.0;
  rep.passed = rep.rms <= tolerance;
  return rep;
}

}  // namespace phbt
