#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "phbt/analysis.hpp"
#include "phbt/error.hpp"
#include "support.hpp"

using namespace phbt;

namespace {

constexpr double pi = std::numbers::pi;

FringeScan synthetic(double m, double v, double phi0, std::size_t n = 32, double offset = 0.0) {
  FringeScan s;
  for (std::size_t k = 0; k < n; ++k) {
    const double p = offset + 2.0 * pi * static_cast<double>(k) / static_cast<double>(n);
    s.phase.push_back(p);
    s.value.push_back(m * (1.0 + v * std::cos(p + phi0)));
  }
  return s;
}

double forward_thermal(double g, double xi) { return 2.0 * xi * g / (4.0 + g * g); }

// independent inversion: bisection on the increasing branch of the forward law
double bisect_gamma(double v, double xi) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (forward_thermal(mid, xi) < v ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

FringeFit fit_at(double tau, double v, double phase, double phase_se = 0.01) {
  FringeFit f;
  f.tau = tau;
  f.visibility = v;
  f.phase_offset = phase;
  f.visibility_stderr = 0.001;
  f.phase_stderr = phase_se;
  f.mean_level = 1.0;
  f.points = 32;
  return f;
}

}  // namespace

TEST_CASE("noiseless fringes are recovered exactly") {
  const auto f = fit_fringe(synthetic(100.0, 0.4, 0.0));
  CHECK(std::abs(f.visibility - 0.4) < 1e-6);
  CHECK(std::abs(f.phase_offset) < 1e-9);
  CHECK(f.mean_level == doctest::Approx(100.0));
  CHECK(f.residual_rms < 1e-9);

  const auto flat = fit_fringe(synthetic(5.0, 0.0, 0.0));
  CHECK(flat.visibility == 0.0);

  // negative amplitude is folded into the phase
  const auto neg = fit_fringe(synthetic(1.0, 0.3, pi));
  CHECK(neg.visibility == doctest::Approx(0.3));
  CHECK(std::abs(std::abs(neg.phase_offset) - pi) < 1e-9);
}

TEST_CASE("fringe scans must be well sampled") {
  CHECK_THROWS_AS(fit_fringe(synthetic(1.0, 0.4, 0.0, 7)), Error);
  auto half = synthetic(1.0, 0.4, 0.0);
  for (auto& p : half.phase) p *= 0.5;
  CHECK_THROWS_AS(fit_fringe(half), Error);
  auto bad = synthetic(1.0, 0.4, 0.0);
  bad.value.pop_back();
  CHECK_THROWS_AS(fit_fringe(bad), Error);
}

TEST_CASE("noisy fringes: estimates lie within 3 sigma of the truth") {
  // sigma established from 100 Monte Carlo fits
  support::Rng rng(505);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> vs, ps;
  double quoted = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    auto s = synthetic(10.0, 0.35, 1.2);
    for (auto& v : s.value) v *= 1.0 + noise(rng);
    const auto f = fit_fringe(s);
    vs.push_back(f.visibility);
    ps.push_back(f.phase_offset);
    quoted += f.visibility_stderr / 100.0;
  }
  double mv = 0.0, mp = 0.0;
  for (int i = 0; i < 100; ++i) {
    mv += vs[i] / 100.0;
    mp += ps[i] / 100.0;
  }
  double sv = 0.0;
  for (double v : vs) sv += (v - mv) * (v - mv) / 99.0;
  sv = std::sqrt(sv);
  for (int i = 0; i < 100; ++i) CHECK(std::abs(vs[i] - 0.35) < 3.5 * sv);
  CHECK(std::abs(mv - 0.35) < 3.0 * sv / 10.0);
  CHECK(std::abs(mp - 1.2) < 0.02);
  // the delta-method error is honest to within 30 %
  CHECK(quoted == doctest::Approx(sv).epsilon(0.3));
}

TEST_CASE("fit phase is equivariant under a shift of the scan phases") {
  const auto r = support::for_all(606, 300, [](support::Rng& rng) -> std::optional<std::string> {
    const double v = support::uniform(rng, 0.05, 0.9);
    const double phi0 = support::uniform(rng, -pi, pi);
    const double delta = support::uniform(rng, -10.0, 10.0);
    auto s = synthetic(3.0, v, phi0, 24);
    const auto base = fit_fringe(s);
    for (auto& p : s.phase) p += delta;
    const auto moved = fit_fringe(s);
    const double d = wrap_phase(moved.phase_offset - (base.phase_offset - delta));
    if (std::abs(d) > 1e-9) return "phase shift off by " + std::to_string(d);
    if (std::abs(moved.visibility - base.visibility) > 1e-12) return "visibility changed";
    return std::nullopt;
  });
  CHECK_MESSAGE(r.failures == 0, r.first_counterexample);
}

TEST_CASE("visibility inversion: worked values") {
  CHECK(visibility_to_gamma(0.4, 1.0).gamma_abs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(visibility_to_gamma(0.35, 0.875).gamma_abs == doctest::Approx(1.0).epsilon(1e-12));
  const double g = visibility_to_gamma(0.2, 1.0).gamma_abs;
  CHECK(g == doctest::Approx(0.4174).epsilon(1e-4));
  CHECK(forward_thermal(g, 1.0) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(visibility_to_gamma(0.0, 0.5).gamma_abs == 0.0);
  CHECK(visibility_to_gamma_coherent(0.5, 1.0).gamma_abs == doctest::Approx(1.0));
}

TEST_CASE("visibility inversion roundtrip over a (|gamma|, xi) grid") {
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i)
    for (int j = 1; j <= 100; ++j) {
      const double g = i / 100.0, xi = j / 100.0;
      const double back = visibility_to_gamma(forward_thermal(g, xi), xi).gamma_abs;
      worst = std::max(worst, std::abs(back - g));
    }
  CHECK(worst <= 1e-10);
}

TEST_CASE("visibility inversion matches bisection and is increasing") {
  const auto r = support::for_all(707, 2000, [](support::Rng& rng) -> std::optional<std::string> {
    const double xi = support::uniform(rng, 0.05, 1.0);
    const double vmax = forward_thermal(1.0, xi);
    const double v1 = support::uniform(rng, 0.0, vmax);
    const double v2 = support::uniform(rng, v1, vmax);
    const double g1 = visibility_to_gamma(v1, xi).gamma_abs;
    const double g2 = visibility_to_gamma(v2, xi).gamma_abs;
    if (std::abs(g1 - bisect_gamma(v1, xi)) > 1e-10) return "disagrees with bisection";
    if (g2 < g1) return "not increasing";
    return std::nullopt;
  });
  CHECK_MESSAGE(r.failures == 0, r.first_counterexample);
}

TEST_CASE("clamp policy above the attainable visibility") {
  // between 2 xi / 5 and xi / 2 the root exceeds 1
  const auto clamped = visibility_to_gamma(0.45, 1.0);
  CHECK(clamped.gamma_abs == 1.0);
  CHECK(clamped.flagged);
  const auto allowed = visibility_to_gamma(0.45, 1.0, ClampPolicy::allow);
  CHECK(allowed.gamma_abs > 1.0);
  CHECK(allowed.flagged);
  CHECK_THROWS_AS(visibility_to_gamma(0.45, 1.0, ClampPolicy::error), Error);
  CHECK(visibility_to_gamma(0.6, 1.0).flagged);
  CHECK_THROWS_AS(visibility_to_gamma(0.6, 1.0, ClampPolicy::error), Error);
  CHECK_THROWS_AS(visibility_to_gamma(0.1, 0.0), Error);
  CHECK_THROWS_AS(visibility_to_gamma(-0.1, 1.0), Error);
}

TEST_CASE("phase curve is referenced to tau = 0 and unwrapped") {
  const auto r = support::for_all(808, 200, [](support::Rng& rng) -> std::optional<std::string> {
    const double slope = support::uniform(rng, -3.0, 3.0);  // rad per bin
    const double ref = support::uniform(rng, -pi, pi);
    std::vector<FringeFit> fits;
    for (int k = -6; k <= 8; ++k)
      fits.push_back(fit_at(k * 1e-6, 0.3, wrap_phase(ref + slope * k)));
    // shuffled input order must not matter
    std::shuffle(fits.begin(), fits.end(), rng);
    const auto cf = extract_phase_curve(fits, 1.0);
    for (std::size_t k = 0; k < cf.size(); ++k) {
      if (cf.tau[k] == 0.0 && cf.gamma_phase[k] != 0.0) return "phi(0) != 0";
      if (k > 0 && std::abs(cf.gamma_phase[k] - cf.gamma_phase[k - 1]) > pi)
        return "jump larger than pi";
      if (k > 0 && cf.tau[k] <= cf.tau[k - 1]) return "tau not sorted";
    }
    return std::nullopt;
  });
  CHECK_MESSAGE(r.failures == 0, r.first_counterexample);

  std::vector<FringeFit> flat{fit_at(-1e-6, 0.3, 0.7), fit_at(0.0, 0.4, 0.7),
                              fit_at(2e-6, 0.2, 0.7)};
  const auto cf = extract_phase_curve(flat, 1.0);
  for (double p : cf.gamma_phase) CHECK(std::abs(p) < 1e-15);
  CHECK(cf.gamma_abs[1] == doctest::Approx(1.0));

  std::vector<FringeFit> no_ref{fit_at(1e-6, 0.3, 0.0), fit_at(2e-6, 0.3, 0.0)};
  try {
    extract_phase_curve(no_ref, 1.0);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::missing_reference_delay);
  }
}

TEST_CASE("Doppler fit recovers a linear phase slope") {
  const double omega = 2.0 * pi * 1e5;
  std::vector<FringeFit> fits;
  for (int k = -4; k <= 4; ++k) {
    const double tau = k * 0.5e-6;
    fits.push_back(fit_at(tau, 0.35, wrap_phase(-omega * tau)));
  }
  const auto cf = extract_phase_curve(fits, 1.0);
  const auto d = fit_doppler(cf);
  CHECK(d.doppler_shift == doctest::Approx(omega).epsilon(1e-9));
  CHECK(d.bins == 9);

  // linear-regression slope of the extracted phases, computed here
  double st = 0.0, sp = 0.0, stt = 0.0, stp = 0.0;
  for (std::size_t k = 0; k < cf.size(); ++k) {
    st += cf.tau[k];
    sp += cf.gamma_phase[k];
  }
  const double n = static_cast<double>(cf.size());
  for (std::size_t k = 0; k < cf.size(); ++k) {
    stt += (cf.tau[k] - st / n) * (cf.tau[k] - st / n);
    stp += (cf.tau[k] - st / n) * (cf.gamma_phase[k] - sp / n);
  }
  CHECK(-stp / stt == doctest::Approx(omega).epsilon(1e-9));

  // zero shift with scatter: 0 within the reported error
  support::Rng rng(9);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<FringeFit> noisy;
  for (int k = -4; k <= 4; ++k) noisy.push_back(fit_at(k * 0.5e-6, 0.35, k ? noise(rng) : 0.0, 0.02));
  const auto dz = fit_doppler(extract_phase_curve(noisy, 1.0));
  CHECK(std::abs(dz.doppler_shift) < 3.0 * dz.std_error);

  std::vector<FringeFit> few{fit_at(0.0, 0.4, 0.0), fit_at(1e-6, 0.01, 0.0),
                             fit_at(2e-6, 0.3, 0.1)};
  try {
    fit_doppler(extract_phase_curve(few, 1.0));
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::insufficient_bins);
  }
}

TEST_CASE("|gamma| from the LO-blocked g2") {
  CorrelationEstimate e;
  e.tau = {-1.0, 0.0, 1.0, 2.0};
  e.g2 = {1.0, 2.0, 1.65, 0.9};
  e.std_error = {0.01, 0.01, 0.01, 0.01};
  const auto g = gamma_from_g2(e);
  CHECK(g.gamma_abs[0] == 0.0);
  CHECK(g.gamma_abs[1] == doctest::Approx(1.0));
  CHECK(g.gamma_abs[2] == doctest::Approx(0.806).epsilon(1e-3));
  CHECK(g.gamma_abs[3] == 0.0);
  CHECK(g.flagged[3]);
  CHECK_FALSE(g.flagged[1]);
}

TEST_CASE("crosscheck of the two |gamma| routes") {
  CoherenceFunction a;
  GammaEstimate b;
  for (int k = -5; k <= 5; ++k) {
    const double tau = k * 1e-6;
    a.tau.push_back(tau);
    a.gamma_abs.push_back(std::exp(-0.5 * k * k / 9.0));
    b.tau.push_back(tau);
    b.gamma_abs.push_back(a.gamma_abs.back());
  }
  const auto same = crosscheck(a, b, 0.05);
  CHECK(same.rms == 0.0);
  CHECK(same.passed);

  // a mis-calibrated xi scales |gamma| and the bias grows with the error
  double previous = 0.0;
  for (double xi_error : {0.02, 0.05, 0.1, 0.2}) {
    CoherenceFunction off = a;
    for (auto& g : off.gamma_abs) g *= 1.0 + xi_error;
    const auto rep = crosscheck(off, b, 0.05);
    CHECK(rep.mean_bias > previous);
    previous = rep.mean_bias;
  }

  // off-grid points are interpolated, out-of-range ones rejected
  CoherenceFunction mid;
  mid.tau = {0.5e-6};
  mid.gamma_abs = {0.5 * (b.gamma_abs[5] + b.gamma_abs[6])};
  CHECK(crosscheck(mid, b, 0.05).rms < 1e-12);
  mid.tau = {9e-6};
  try {
    crosscheck(mid, b, 0.05);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::grid_mismatch);
  }
}

TEST_CASE("wrap_phase maps into (-pi, pi]") {
  const auto r = support::for_all(909, 10000, [](support::Rng& rng) -> std::optional<std::string> {
    const double x = support::uniform(rng, -100.0, 100.0);
    const double w = wrap_phase(x);
    if (!(w > -pi && w <= pi)) return "out of range";
    const double k = (x - w) / (2.0 * pi);
    if (std::abs(k - std::round(k)) > 1e-9) return "not a multiple of 2 pi";
    return std::nullopt;
  });
  CHECK_MESSAGE(r.failures == 0, r.first_counterexample);
  CHECK(wrap_phase(-pi) == doctest::Approx(pi));
}
