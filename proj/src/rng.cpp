#include "phbt/rng.hpp"

#include <array>

namespace phbt {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Seed Seed::child(std::uint64_t tag) const {
  return Seed(splitmix64(value_ ^ splitmix64(tag + 0x632BE59BD9B4E019ull)));
}

Engine Seed::engine() const {
  std::uint64_t a = splitmix64(value_);
  std::uint64_t b = splitmix64(a);
  std::array<std::uint32_t, 4> words{
      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

}  // namespace phbt
