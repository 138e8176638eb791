#pragma once

// Shared helpers for the unit tests: hand-rolled property runner and a few
// brute-force estimators that do not share code with the library.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace support {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct PropertyResult {
  int trials = 0;
  int failures = 0;
  std::string first_counterexample;
};

// `trial` returns a description of the counterexample, or nullopt on success.
template <class Trial>
PropertyResult for_all(std::uint64_t seed, int count, Trial trial) {
  Rng rng(seed);
  PropertyResult r;
  for (int i = 0; i < count; ++i) {
    ++r.trials;
    if (auto bad = trial(rng)) {
      if (r.failures++ == 0) r.first_counterexample = *bad;
    }
  }
  return r;
}

// <x(t) conj(x(t + lag))> / <|x|^2> over all valid t, by direct summation.
inline std::complex<double> direct_correlation(const std::vector<std::complex<double>>& x,
                                               long lag) {
  std::complex<double> acc = 0.0;
  double power = 0.0;
  const long n = static_cast<long>(x.size());
  long used = 0;
  for (long t = 0; t < n; ++t) {
    power += std::norm(x[t]);
    const long u = t + lag;
    if (u < 0 || u >= n) continue;
    acc += x[t] * std::conj(x[u]);
    ++used;
  }
  return (acc / static_cast<double>(used)) / (power / static_cast<double>(n));
}

// <a(t) b(t + lag)> / (<a> <b>) over valid pairs, by direct summation.
inline double direct_g2(const std::vector<double>& a, const std::vector<double>& b, long lag) {
  const long n = static_cast<long>(a.size());
  double sab = 0.0, sa = 0.0, sb = 0.0;
  long used = 0;
  for (long t = 0; t < n; ++t) {
    const long u = t + lag;
    if (u < 0 || u >= n) continue;
    sab += a[t] * b[u];
    sa += a[t];
    sb += b[u];
    ++used;
  }
  const double m = static_cast<double>(used);
  return (sab / m) / ((sa / m) * (sb / m));
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("phbt_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace support
