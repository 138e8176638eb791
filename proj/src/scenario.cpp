#include "phbt/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <fmt/format.h>

#include "phbt/error.hpp"
#include "phbt/optics_bench.hpp"
#include "phbt/serialization.hpp"

namespace phbt {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Runs f(i) for i in [0, n) on up to `threads` workers. Results must go to
// pre-sized slots indexed by i; the first failing index (lowest i) wins so
// the error reported does not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  const auto workers = static_cast<std::size_t>(std::clamp<long>(threads, 1, static_cast<long>(std::max<std::size_t>(n, 1))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr error;
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      {
        std::lock_guard lock(mu);
        if (i > failed_at) return;
      }
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct MeanAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double std_error() const {
    if (n < 2) return 0.0;
    const double dn = static_cast<double>(n);
    const double m = mean();
    return std::sqrt(std::max(0.0, (sum_sq - dn * m * m) / (dn - 1.0)) / dn);
  }
};

std::string tau_label(double tau) { return io::compact(tau); }

Check make_check(std::string name, double measured, double expected, double tol,
                 double se = 0.0) {
  Check c;
  c.name = std::move(name);
  c.measured = measured;
  c.expected = expected;
  c.tolerance = tol;
  c.std_error = se;
  c.passed = std::abs(measured - expected) <= tol;
  return c;
}

Check make_upper_check(std::string name, double measured, double bound, double se = 0.0) {
  Check c;
  c.name = std::move(name);
  c.measured = measured;
  c.expected = 0.0;
  c.tolerance = bound;
  c.std_error = se;
  c.upper_bound = true;
  c.passed = measured < bound;
  return c;
}

double effective_lo_intensity(const ScenarioConfig& cfg) {
  if (cfg.lo.blocked) return 0.0;
  return cfg.lo.match_source ? cfg.source.mean_intensity / 2.0 : cfg.lo.spec.intensity;
}

bool thermal_input(const ScenarioConfig& cfg) {
  return cfg.source.statistics == FieldStatistics::thermal;
}

// ---------------------------------------------------------------- cw ----

std::vector<double> cw_fringe_delays(const ScenarioConfig& cfg) {
  std::vector<double> d = cfg.scan.delays;
  d.push_back(0.0);
  // snap to the sample grid so labels and lags agree
  for (auto& v : d) v = static_cast<double>(std::llround(v / cfg.run.dt)) * cfg.run.dt;
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  return d;
}

struct CwBench {
  const ScenarioConfig& cfg;
  std::optional<ThermalSynthesizer> synth;
  double m = 1.0;

  explicit CwBench(const ScenarioConfig& c) : cfg(c), m(c.lo.mode_overlap) {
    if (thermal_input(c)) synth.emplace(c.source, c.run.window, c.run.dt);
  }

  ComplexEnvelope source(Seed seed, double t0) const {
    ComplexEnvelope env = synth ? synth->generate(seed)
                                : gen_cw_phase_randomized(cfg.source, cfg.run.window,
                                                          cfg.run.dt, seed);
    env.t0 = t0;
    return env;
  }

  std::vector<ComplexEnvelope> arm_modes(const ComplexEnvelope& sig, const CoherentLOSpec* lo,
                                         Seed seed) const {
    if (lo == nullptr) return {sig};
    const auto lo_field =
        gen_coherent_lo(*lo, static_cast<double>(sig.size()) * sig.dt, sig.dt, seed, sig.t0);
    std::vector<ComplexEnvelope> modes;
    modes.push_back(mix(sig, scaled(lo_field, std::sqrt(m))).out_a);
    // cross-polarized remainder reaches the detector without interfering
    if (m < 1.0) modes.push_back(scaled(lo_field, Complex(0.0, std::sqrt((1.0 - m) / 2.0))));
    return modes;
  }

  // One independent window: source -> split -> delay arm 1 -> mix -> detect.
  std::pair<PhotocurrentTrace, PhotocurrentTrace> window(Seed seed, const CoherentLOSpec* lo1,
                                                         const CoherentLOSpec* lo2,
                                                         double t0) const {
    const auto src = source(seed.child(stream::source), t0);
    auto arms = split(src);
    ComplexEnvelope a1 =
        cfg.optical_delay != 0.0 ? delay(arms.out_a, cfg.optical_delay) : arms.out_a;
    ComplexEnvelope a2 = std::move(arms.out_b);
    common_support(a1, a2);
    const auto m1 = arm_modes(a1, lo1, seed.child(stream::lo_arm1));
    const auto m2 = arm_modes(a2, lo2, seed.child(stream::lo_arm2));
    return {detect_analog(m1, cfg.detector, seed.child(stream::detector1)),
            detect_analog(m2, cfg.detector, seed.child(stream::detector2))};
  }
};

RawData simulate_cw(const ScenarioConfig& cfg, int threads) {
  RawData raw;
  const CwBench bench(cfg);
  const Seed root(*cfg.run.seed);
  const auto trials = static_cast<std::size_t>(cfg.run.trials);
  const auto K = static_cast<std::size_t>(cfg.scan.phase_points);
  const auto W = static_cast<std::size_t>(cfg.run.windows_per_point);
  const double dt = cfg.run.dt;

  if (!cfg.lo.blocked) {
    const auto delays = cw_fringe_delays(cfg);
    std::vector<long> lags;
    for (double d : delays) lags.push_back(std::lround(d / dt));

    CoherentLOSpec lo1 = cfg.lo.spec;
    lo1.intensity = effective_lo_intensity(cfg);
    lo1.scan = PhaseScanSpec{};
    CoherentLOSpec lo2_base = cfg.lo.spec;
    lo2_base.intensity = lo1.intensity;
    const bool stepped = cfg.scan.mode == ScanMode::stepped;
    if (stepped) lo2_base.scan.waveform = ScanWaveform::static_phase;

    const std::size_t per_trial = K * W;
    std::vector<std::vector<double>> slot(trials * per_trial);
    std::vector<double> slot_mean1(slot.size()), slot_mean2(slot.size());
    parallel_for(slot.size(), threads, [&](std::size_t idx) {
      const std::size_t t = idx / per_trial;
      const std::size_t k = (idx % per_trial) / W;
      const std::size_t w = idx % W;
      CoherentLOSpec lo2 = lo2_base;
      double t0 = 0.0;
      if (stepped) {
        lo2.static_phase += two_pi * cfg.scan.periods * static_cast<double>(k) /
                            static_cast<double>(K);
      } else {
        t0 = static_cast<double>(idx % per_trial) * cfg.run.window;
      }
      const Seed s = root.child(stream::trial).child(t).child(k).child(w);
      const auto [i1, i2] = bench.window(s.child(stream::interference), &lo1, &lo2, t0);
      slot[idx] = g2_at_lags(i1, i2, lags);
      slot_mean1[idx] = i1.mean();
      slot_mean2[idx] = i2.mean();
    });

    for (std::size_t j = 0; j < delays.size(); ++j) {
      FringeScan scan;
      scan.tau = delays[j];
      if (stepped) {
        for (std::size_t k = 0; k < K; ++k) {
          MeanAccumulator acc;
          for (std::size_t t = 0; t < trials; ++t)
            for (std::size_t w = 0; w < W; ++w) acc.add(slot[t * per_trial + k * W + w][j]);
          scan.phase.push_back(two_pi * cfg.scan.periods * static_cast<double>(k) /
                               static_cast<double>(K));
          scan.value.push_back(acc.mean());
          scan.std_error.push_back(acc.std_error());
        }
      } else {
        for (std::size_t t = 0; t < trials; ++t)
          for (std::size_t i = 0; i < per_trial; ++i) {
            const double t_mid = (static_cast<double>(i) + 0.5) * cfg.run.window;
            scan.phase.push_back(cfg.lo.spec.scan.phase_at(t_mid));
            scan.value.push_back(slot[t * per_trial + i][j]);
          }
      }
      raw.fringes.push_back(std::move(scan));
    }
    MeanAccumulator c1, c2;
    for (std::size_t i = 0; i < slot.size(); ++i) {
      c1.add(slot_mean1[i]);
      c2.add(slot_mean2[i]);
    }
    raw.measurements["fringe_mean_current_1"] = c1.mean();
    raw.measurements["fringe_mean_current_2"] = c2.mean();
  }

  if (cfg.run.reference || cfg.lo.blocked) {
    const std::size_t per_trial = K * W;
    std::vector<CorrelationEstimate> slot(trials * per_trial);
    parallel_for(slot.size(), threads, [&](std::size_t idx) {
      const Seed s = root.child(stream::reference).child(idx / per_trial).child(idx % per_trial);
      const auto [i1, i2] = bench.window(s, nullptr, nullptr, 0.0);
      slot[idx] = correlate_photocurrents(i1, i2, cfg.run.max_tau,
                                          static_cast<double>(i1.size()) * dt);
    });
    CorrelationEstimate ref;
    ref.tau = slot.front().tau;
    ref.averaging_window = slot.front().averaging_window;
    ref.windows = slot.size();
    for (std::size_t k = 0; k < ref.tau.size(); ++k) {
      MeanAccumulator acc;
      for (const auto& e : slot) acc.add(e.g2[k]);
      ref.g2.push_back(acc.mean());
      ref.std_error.push_back(acc.std_error());
    }
    raw.reference = std::move(ref);
  }
  return raw;
}

oracle::CwScenarioParams cw_oracle_params(const ScenarioConfig& cfg, double tau) {
  oracle::CwScenarioParams p;
  p.I = p.I_bar = cfg.source.mean_intensity / 2.0;
  p.a1sq = p.a2sq = effective_lo_intensity(cfg);
  const Complex g = model_gamma(cfg.source, tau + cfg.optical_delay);
  p.gamma_abs = std::min(1.0, std::abs(g));
  p.gamma_phase = 0.0;
  p.dphi_alpha = 0.0;
  p.lambda = thermal_input(cfg) ? p.gamma_abs * p.gamma_abs : 0.0;
  p.overlap = cfg.lo.mode_overlap;
  return p;
}

void analyze_reference_cw(const ScenarioConfig& cfg, RunReport& rep) {
  if (!rep.raw.reference) return;
  const auto& ref = *rep.raw.reference;
  const auto& tol = cfg.analysis.tolerance;
  rep.reference_gamma = gamma_from_g2(ref);

  // peak: lag closest to -optical_delay, where the two arms see the same field
  std::size_t peak = 0;
  for (std::size_t k = 0; k < ref.size(); ++k)
    if (std::abs(ref.tau[k] + cfg.optical_delay) < std::abs(ref.tau[peak] + cfg.optical_delay))
      peak = k;
  const double g0 = std::abs(model_gamma(cfg.source, ref.tau[peak] + cfg.optical_delay));
  const double expected_peak = thermal_input(cfg) ? 1.0 + g0 * g0 : 1.0;
  rep.checks.push_back(make_check("g2_peak", ref.g2[peak], expected_peak, tol.g2_peak,
                                  ref.std_error[peak]));

  MeanAccumulator tail;
  double tail_se = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    if (std::abs(ref.tau[k] + cfg.optical_delay) > 5.0 * cfg.source.coherence_time) {
      tail.add(ref.g2[k]);
      tail_se = std::max(tail_se, ref.std_error[k]);
    }
  }
  if (tail.n > 0)
    rep.checks.push_back(make_check("g2_tail", tail.mean(), 1.0, tol.g2_tail, tail_se));
  else
    rep.warnings.push_back("run.max_tau does not reach 5 coherence times; g2_tail not checked");
}

void analyze_cw(const ScenarioConfig& cfg, RunReport& rep) {
  const auto& tol = cfg.analysis.tolerance;
  if (cfg.run.dt > 1.0 / (10.0 * cfg.detector.bandwidth) * (1.0 + 1e-9))
    rep.warnings.push_back(fmt::format(
        "detector bandwidth {} Hz is not resolved at dt = {} s; the filter acts as an identity",
        cfg.detector.bandwidth, cfg.run.dt));
  analyze_reference_cw(cfg, rep);
  if (rep.raw.fringes.empty()) return;

  for (const auto& scan : rep.raw.fringes) rep.fits.push_back(fit_fringe(scan));

  const auto input = thermal_input(cfg) ? InputStatistics::thermal : InputStatistics::coherent;
  if (cfg.analysis.xi) {
    rep.xi = *cfg.analysis.xi;
  } else {
    const FringeFit* zero = nullptr;
    for (const auto& f : rep.fits)
      if (f.tau == 0.0) zero = &f;
    if (zero == nullptr)
      fail(ErrorCode::missing_reference_delay, "xi calibration needs a fringe at tau = 0");
    const double vmax = input == InputStatistics::thermal ? 0.4 : 0.5;
    rep.xi = std::clamp(zero->visibility / vmax, 1e-6, 1.0);
  }

  rep.coherence = extract_phase_curve(rep.fits, rep.xi, input, cfg.analysis.clamp);
  const auto& cf = *rep.coherence;

  for (std::size_t k = 0; k < cf.size(); ++k) {
    const double tau = cf.tau[k];
    const auto p = cw_oracle_params(cfg, tau);
    const FringeFit* fit = nullptr;
    for (const auto& f : rep.fits)
      if (f.tau == tau) fit = &f;
    OraclePair pair;
    pair.tau = tau;
    pair.visibility = fit->visibility;
    pair.oracle_visibility = oracle::visibility_cw(p);
    pair.gamma_abs = cf.gamma_abs[k];
    pair.oracle_gamma_abs = p.gamma_abs;
    pair.gamma_phase = cf.gamma_phase[k];
    pair.oracle_gamma_phase = -cfg.source.doppler_shift * tau;
    rep.oracle.push_back(pair);

    const auto label = tau_label(tau);
    rep.checks.push_back(make_check(fmt::format("visibility(tau={})", label), pair.visibility,
                                    pair.oracle_visibility, tol.visibility,
                                    fit->visibility_stderr));
    rep.checks.push_back(make_check(fmt::format("gamma_abs(tau={})", label), pair.gamma_abs,
                                    pair.oracle_gamma_abs, tol.gamma_abs, cf.gamma_stderr[k]));
    if (pair.oracle_gamma_abs >= 0.1 && tau != 0.0) {
      // compare modulo 2 pi so a whole-turn unwrapping slip shows as one bad bin
      const double diff = wrap_phase(pair.gamma_phase - pair.oracle_gamma_phase);
      rep.checks.push_back(make_check(fmt::format("gamma_phase(tau={})", label),
                                      pair.oracle_gamma_phase + diff, pair.oracle_gamma_phase,
                                      tol.phase, cf.phase_stderr[k]));
    }
  }

  std::size_t usable = 0;
  for (double g : cf.gamma_abs) usable += g > 0.1;
  if (usable >= 3) {
    rep.doppler = fit_doppler(cf);
    const double expected = cfg.source.doppler_shift;
    // nearest-branch unwrapping only follows the slope if adjacent delays
    // differ in phase by less than pi
    double widest = 0.0;
    for (std::size_t k = 1; k < cf.size(); ++k)
      widest = std::max(widest, cf.tau[k] - cf.tau[k - 1]);
    if (widest * std::abs(expected) < std::numbers::pi) {
      const double tolerance = expected != 0.0
                                   ? tol.doppler_relative * std::abs(expected)
                                   : tol.sigma_multiple * rep.doppler->std_error;
      rep.checks.push_back(make_check("doppler_shift", rep.doppler->doppler_shift, expected,
                                      tolerance, rep.doppler->std_error));
    } else {
      rep.warnings.push_back(
          "delay grid too sparse to unwrap the expected Doppler phase; doppler_shift not checked");
    }
  } else {
    rep.warnings.push_back("fewer than 3 delays with |gamma| > 0.1; Doppler fit skipped");
  }

  if (rep.reference_gamma && !thermal_input(cfg)) {
    rep.warnings.push_back("g2 carries no |gamma| for non-thermal input; crosscheck skipped");
  } else if (rep.reference_gamma) {
    try {
      rep.crosscheck = crosscheck(cf, *rep.reference_gamma, tol.crosscheck);
      rep.checks.push_back(
          make_check("crosscheck_rms", rep.crosscheck->rms, 0.0, tol.crosscheck));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::grid_mismatch) throw;
      rep.warnings.push_back(fmt::format("crosscheck skipped: {}", e.what()));
    }
  }
}

// ------------------------------------------------------------ pulsed ----

std::int64_t pulses(double seconds, double period) {
  return static_cast<std::int64_t>(std::llround(seconds / period));
}

std::vector<std::int64_t> electronic_delays(const ScenarioConfig& cfg) {
  std::vector<std::int64_t> d;
  for (double v : cfg.scan.delays) d.push_back(pulses(v, cfg.run.pulse_period));
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  return d;
}

double pulsed_g2_model(const ScenarioConfig& cfg) { return 1.0 + 1.0 / cfg.source.mode_count; }

struct PulsedBench {
  static constexpr std::size_t piece_pulses = 1u << 16;
  const ScenarioConfig& cfg;
  std::int64_t optical = 0;
  double dephase_rms = 0.0;

  explicit PulsedBench(const ScenarioConfig& c) : cfg(c) {
    optical = pulses(c.pulsed.optical_delay, c.run.pulse_period);
    dephase_rms = std::sqrt(-2.0 * std::log(c.pulsed.gamma_abs));
  }

  std::vector<PulseTrain> arm_modes(const PulseTrain& sig, const CoherentLOSpec* lo, double beta,
                                    Seed seed) const {
    if (lo == nullptr) return {sig};
    const auto lo_field =
        gen_coherent_lo_pulses(*lo, sig.size(), sig.pulse_period, seed, sig.first_index);
    std::vector<PulseTrain> modes;
    modes.push_back(mix(sig, scaled(lo_field, beta)).out_a);
    // LO light outside the signal's temporal mode
    if (beta < 1.0)
      modes.push_back(scaled(lo_field, Complex(0.0, std::sqrt((1.0 - beta * beta) / 2.0))));
    return modes;
  }

  // Simulated in pieces to keep the working set in cache; the last |optical|
  // source pulses carry over so the delayed arm stays continuous.
  std::pair<ClickRecord, ClickRecord> record(Seed seed, const CoherentLOSpec* lo1,
                                             const CoherentLOSpec* lo2) const {
    const auto P = static_cast<std::size_t>(cfg.run.pulses_per_point);
    const auto h = static_cast<std::size_t>(std::abs(optical));
    const std::size_t pieces = (P + piece_pulses - 1) / piece_pulses;

    std::pair<ClickRecord, ClickRecord> out;
    out.first.clicked.reserve(P);
    out.second.clicked.reserve(P);
    SpdState d1, d2;
    std::vector<Complex> history;
    for (std::size_t c = 0; c < pieces; ++c) {
      const std::size_t lo = P * c / pieces, hi = P * (c + 1) / pieces;
      const Seed cs = seed.child(c);
      auto fresh = gen_pulsed_thermal(cfg.source, (hi - lo) + (c == 0 ? h : 0),
                                      cfg.run.pulse_period, cs.child(stream::source));
      PulseTrain src = std::move(fresh);
      if (c > 0) {
        history.insert(history.end(), src.amplitudes.begin(), src.amplitudes.end());
        src.amplitudes.swap(history);
      }
      src.first_index = static_cast<std::int64_t>(lo);
      if (h > 0) history.assign(src.amplitudes.end() - static_cast<std::ptrdiff_t>(h),
                                src.amplitudes.end());
      else history.clear();

      auto arms = split(src);
      PulseTrain a1 = optical != 0 ? delay(arms.out_a, optical) : std::move(arms.out_a);
      PulseTrain a2 = std::move(arms.out_b);
      common_support(a1, a2);
      if (dephase_rms > 0.0) a1 = dephase(a1, dephase_rms, cs.child(stream::dephasing));
      const auto m1 = arm_modes(a1, lo1, cfg.pulsed.beta1, cs.child(stream::lo_arm1));
      const auto m2 = arm_modes(a2, lo2, cfg.pulsed.beta2, cs.child(stream::lo_arm2));
      const auto r1 = detect_spd(m1, cfg.detector, cs.child(stream::detector1), d1);
      const auto r2 = detect_spd(m2, cfg.detector, cs.child(stream::detector2), d2);
      if (c == 0) {
        out.first.first_gate = r1.first_gate;
        out.first.gate_period = r1.gate_period;
        out.second.first_gate = r2.first_gate;
        out.second.gate_period = r2.gate_period;
      }
      out.first.clicked.insert(out.first.clicked.end(), r1.clicked.begin(), r1.clicked.end());
      out.second.clicked.insert(out.second.clicked.end(), r2.clicked.begin(), r2.clicked.end());
    }
    return out;
  }
};

// The pulsed pipeline frees and reallocates megabyte buffers per piece;
// glibc would hand each one back to the kernel and fault it in again.
void keep_freed_buffers() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
  });
#endif
}

RawData simulate_pulsed(const ScenarioConfig& cfg, int threads) {
  keep_freed_buffers();
  if (cfg.scan.mode != ScanMode::stepped)
    fail(ErrorCode::config_invalid, "pulsed scenarios support scan.mode = \"stepped\" only");
  RawData raw;
  const PulsedBench bench(cfg);
  const Seed root(*cfg.run.seed);
  const auto trials = static_cast<std::size_t>(cfg.run.trials);
  const auto K = static_cast<std::size_t>(cfg.scan.phase_points);
  const auto delays = electronic_delays(cfg);
  const auto blocks = static_cast<std::size_t>(cfg.run.blocks);

  if (!cfg.lo.blocked) {
    CoherentLOSpec lo1 = cfg.lo.spec;
    lo1.intensity = effective_lo_intensity(cfg);
    lo1.scan = PhaseScanSpec{};
    CoherentLOSpec lo2_base = cfg.lo.spec;
    lo2_base.intensity = lo1.intensity;
    lo2_base.scan.waveform = ScanWaveform::static_phase;

    struct Slot {
      std::vector<std::uint64_t> coinc, pairs;
      double rate1 = 0.0, rate2 = 0.0;
    };
    std::vector<Slot> slot(trials * K);
    parallel_for(slot.size(), threads, [&](std::size_t idx) {
      const std::size_t t = idx / K, k = idx % K;
      CoherentLOSpec lo2 = lo2_base;
      lo2.static_phase +=
          two_pi * cfg.scan.periods * static_cast<double>(k) / static_cast<double>(K);
      const Seed s = root.child(stream::trial).child(t).child(k).child(stream::interference);
      const auto [c1, c2] = bench.record(s, &lo1, &lo2);
      auto& out = slot[idx];
      out.rate1 = c1.click_rate();
      out.rate2 = c2.click_rate();
      for (auto d : delays) {
        const auto est = coincide(c1, c2, d, 0, blocks);
        out.coinc.push_back(est.coincidences[0]);
        out.pairs.push_back(est.pairs[0]);
      }
    });

    for (std::size_t j = 0; j < delays.size(); ++j) {
      FringeScan scan;
      scan.tau = static_cast<double>(delays[j] - bench.optical);
      for (std::size_t k = 0; k < K; ++k) {
        double c = 0.0, p = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
          c += static_cast<double>(slot[t * K + k].coinc[j]);
          p += static_cast<double>(slot[t * K + k].pairs[j]);
        }
        scan.phase.push_back(two_pi * cfg.scan.periods * static_cast<double>(k) /
                             static_cast<double>(K));
        scan.value.push_back(c / p);
        scan.std_error.push_back(std::sqrt(std::max(c, 1.0)) / p);
      }
      raw.fringes.push_back(std::move(scan));
    }
    MeanAccumulator r1, r2;
    for (const auto& s : slot) {
      r1.add(s.rate1);
      r2.add(s.rate2);
    }
    raw.measurements["fringe_click_rate_1"] = r1.mean();
    raw.measurements["fringe_click_rate_2"] = r2.mean();
  }

  if (cfg.run.reference || cfg.lo.blocked) {
    const auto R = cfg.run.reference_records > 0
                       ? static_cast<std::size_t>(cfg.run.reference_records)
                       : K;
    std::vector<CorrelationEstimate> slot(trials * R);
    std::vector<double> rate1(slot.size()), rate2(slot.size());
    parallel_for(slot.size(), threads, [&](std::size_t idx) {
      const Seed s = root.child(stream::reference).child(idx / R).child(idx % R);
      const auto [c1, c2] = bench.record(s, nullptr, nullptr);
      slot[idx] = coincide(c1, c2, bench.optical, cfg.run.span, blocks);
      rate1[idx] = c1.click_rate();
      rate2[idx] = c2.click_rate();
    });
    CorrelationEstimate ref;
    ref.windows = slot.size();
    ref.averaging_window = static_cast<double>(cfg.run.pulses_per_point);
    const std::size_t m = slot.front().size();
    for (std::size_t k = 0; k < m; ++k) {
      MeanAccumulator acc;
      std::uint64_t c = 0, p = 0;
      for (const auto& e : slot) {
        acc.add(e.g2[k]);
        c += e.coincidences[k];
        p += e.pairs[k];
      }
      ref.tau.push_back(slot.front().tau[k] - static_cast<double>(bench.optical));
      ref.g2.push_back(acc.mean());
      ref.std_error.push_back(slot.size() > 1 ? acc.std_error() : slot.front().std_error[k]);
      ref.coincidences.push_back(c);
      ref.pairs.push_back(p);
    }
    raw.reference = std::move(ref);
    MeanAccumulator r1, r2;
    for (std::size_t i = 0; i < slot.size(); ++i) {
      r1.add(rate1[i]);
      r2.add(rate2[i]);
    }
    raw.measurements["reference_click_rate_1"] = r1.mean();
    raw.measurements["reference_click_rate_2"] = r2.mean();
  }
  return raw;
}

oracle::PulsedScenarioParams pulsed_oracle_params(const ScenarioConfig& cfg, std::int64_t dN) {
  oracle::PulsedScenarioParams p;
  p.nbar = cfg.source.mean_intensity / 2.0;
  p.alpha_sq = effective_lo_intensity(cfg);
  p.g2_in = pulsed_g2_model(cfg);
  p.beta1 = cfg.pulsed.beta1;
  p.beta2 = cfg.pulsed.beta2;
  p.gamma_abs = cfg.pulsed.gamma_abs;
  p.rep_rate = 1.0 / cfg.run.pulse_period;
  p.dN = dN;
  return p;
}

void analyze_pulsed(const ScenarioConfig& cfg, RunReport& rep) {
  const auto& tol = cfg.analysis.tolerance;
  // the inversion needs the source statistic; clicks see a saturated version
  const double g2_in = pulsed_g2_model(cfg);
  const double g2_click = oracle::click_g2_thermal(
      cfg.source.mean_intensity, cfg.source.mode_count, cfg.detector.efficiency,
      cfg.detector.dark_prob_per_gate);
  rep.raw.measurements["g2_in_model"] = g2_in;
  rep.raw.measurements["g2_click_model"] = g2_click;

  if (rep.raw.reference) {
    const auto& ref = *rep.raw.reference;
    rep.reference_gamma = gamma_from_g2(ref);
    MeanAccumulator tail;
    double tail_se = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      if (ref.tau[k] == 0.0) {
        rep.checks.push_back(
            make_check("g2_peak", ref.g2[k], g2_click, tol.g2_peak, ref.std_error[k]));
      } else {
        tail.add(ref.g2[k]);
        tail_se = std::max(tail_se, ref.std_error[k]);
      }
    }
    if (tail.n > 0)
      rep.checks.push_back(make_check("g2_tail", tail.mean(), 1.0, tol.g2_tail, tail_se));
  }
  if (rep.raw.fringes.empty()) return;

  for (const auto& scan : rep.raw.fringes) rep.fits.push_back(fit_fringe(scan));
  std::sort(rep.fits.begin(), rep.fits.end(),
            [](const FringeFit& a, const FringeFit& b) { return a.tau < b.tau; });

  const double nbar = cfg.source.mean_intensity / 2.0;
  const double alpha_sq = effective_lo_intensity(cfg);
  const double beta = cfg.pulsed.beta1 * cfg.pulsed.beta2;
  const FringeFit* zero = nullptr;
  for (const auto& f : rep.fits)
    if (f.tau == 0.0) zero = &f;

  CoherenceFunction cf;
  cf.xi = beta;
  rep.xi = beta;
  for (const auto& f : rep.fits) {
    const auto dN = static_cast<std::int64_t>(std::llround(f.tau));
    const double x =
        oracle::pulsed_coherence_from_visibility(f.visibility, g2_in, nbar, alpha_sq,
                                                 cfg.analysis.pulsed_weight);
    const double scale = x > 0.0 && f.visibility > 0.0 ? x / f.visibility : 0.0;
    const double g = beta > 0.0 ? x / beta : 0.0;
    cf.tau.push_back(f.tau);
    cf.gamma_abs.push_back(g);
    cf.gamma_stderr.push_back(beta > 0.0 ? scale * f.visibility_stderr / beta : 0.0);
    cf.gamma_phase.push_back(zero ? wrap_phase(f.phase_offset - zero->phase_offset)
                                  : f.phase_offset);
    cf.phase_stderr.push_back(f.phase_stderr);
    cf.flagged.push_back(g > 1.0);

    const auto p = pulsed_oracle_params(cfg, dN);
    OraclePair pair;
    pair.tau = f.tau;
    pair.visibility = f.visibility;
    pair.oracle_visibility = oracle::visibility_pulsed(p, cfg.analysis.pulsed_weight);
    pair.gamma_abs = g;
    pair.oracle_gamma_abs = dN == 0 ? cfg.pulsed.gamma_abs : 0.0;
    pair.gamma_phase = cf.gamma_phase.back();
    pair.oracle_gamma_phase = 0.0;
    rep.oracle.push_back(pair);

    if (dN == 0)
      rep.checks.push_back(make_check("visibility(dN=0)", f.visibility, pair.oracle_visibility,
                                      tol.pulsed_visibility, f.visibility_stderr));
    else
      rep.checks.push_back(make_upper_check(fmt::format("selection(dN={})", dN), f.visibility,
                                            tol.selection, f.visibility_stderr));
  }
  rep.coherence = std::move(cf);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_mode(const ScenarioConfig& cfg, Mode expected) {
  if (cfg.mode != expected)
    fail(ErrorCode::config_invalid, fmt::format("config mode is '{}', expected '{}'",
                                                mode_name(cfg.mode), mode_name(expected)));
}

RunReport finish_run(const ScenarioConfig& cfg, RawData raw, const RunOptions& options,
                     std::chrono::steady_clock::time_point start) {
  RunReport rep = analyze_raw(cfg, std::move(raw));
  rep.runtime_seconds = seconds_since(start);
  if (options.out_dir) write_run(*options.out_dir, cfg, rep);
  return rep;
}

}  // namespace

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* RunReport::find_check(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

RunReport analyze_raw(const ScenarioConfig& cfg, RawData raw) {
  RunReport rep;
  rep.mode = cfg.mode;
  rep.raw = std::move(raw);
  rep.warnings = rep.raw.warnings;
  if (cfg.mode == Mode::cw)
    analyze_cw(cfg, rep);
  else if (cfg.mode == Mode::pulsed)
    analyze_pulsed(cfg, rep);
  else
    fail(ErrorCode::config_invalid, "oracle configs have no simulation data to analyze");
  return rep;
}

RunReport run_cw_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_mode(cfg, Mode::cw);
  cfg.validate();
  return finish_run(cfg, simulate_cw(cfg, options.threads), options, start);
}

RunReport run_pulsed_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_mode(cfg, Mode::pulsed);
  cfg.validate();
  return finish_run(cfg, simulate_pulsed(cfg, options.threads), options, start);
}

RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
  switch (cfg.mode) {
    case Mode::cw: return run_cw_scenario(cfg, options);
    case Mode::pulsed: return run_pulsed_scenario(cfg, options);
    case Mode::oracle: break;
  }
  fail(ErrorCode::config_invalid, "mode 'oracle' has no simulation; use the oracle command");
}

SweepResult run_sweep(const ScenarioConfig& cfg, std::string_view parameter,
                      std::span<const double> values, const RunOptions& options) {
  SweepResult out;
  out.parameter = std::string(parameter);
  const bool delay_sweep = parameter == "tau" || parameter == "scan.delays";

  auto collect = [&](const RunReport& rep, double value, bool tau_as_value) {
    for (const auto& p : rep.oracle) {
      SweepRow row;
      row.value = tau_as_value ? p.tau : value;
      row.tau = p.tau;
      row.visibility = p.visibility;
      row.gamma_abs = p.gamma_abs;
      row.gamma_phase = p.gamma_phase;
      row.oracle_visibility = p.oracle_visibility;
      out.rows.push_back(row);
    }
  };

  if (!delay_sweep) {
    // reject unknown names before any run
    ScenarioConfig probe = cfg;
    set_parameter(probe, parameter, 0.0);
  }
  if (values.empty()) {
    if (options.out_dir) {
      std::filesystem::create_directories(*options.out_dir);
      write_sweep_summary(*options.out_dir / "sweep_summary.csv", out);
    }
    return out;
  }

  if (delay_sweep) {
    ScenarioConfig c = cfg;
    c.scan.delays.assign(values.begin(), values.end());
    RunOptions o = options;
    if (options.out_dir) o.out_dir = *options.out_dir / "run_tau";
    auto rep = run_scenario(c, o);
    collect(rep, 0.0, true);
    out.reports.push_back(std::move(rep));
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) {
      ScenarioConfig c = cfg;
      set_parameter(c, parameter, values[i]);
      RunOptions o = options;
      if (options.out_dir) o.out_dir = *options.out_dir / fmt::format("run_{:03d}", i);
      auto rep = run_scenario(c, o);
      collect(rep, values[i], false);
      out.reports.push_back(std::move(rep));
    }
  }
  if (options.out_dir) write_sweep_summary(*options.out_dir / "sweep_summary.csv", out);
  return out;
}

}  // namespace phbt
