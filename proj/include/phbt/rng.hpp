#pragma once

#include <cstdint>
#include <random>

namespace phbt {

using Engine = std::mt19937_64;

/// Root or derived seed for a random substream.
///
/// Every stochastic operation takes a Seed by value. Substreams are derived
/// with child(), which mixes the tag into the parent state with splitmix64;
/// a given (root, tag path) always maps to the same engine state regardless
/// of the order in which substreams are created or the thread that uses them.
class Seed {
 public:
  constexpr explicit Seed(std::uint64_t value = 0) : value_(value) {}

  constexpr std::uint64_t value() const { return value_; }

  Seed child(std::uint64_t tag) const;
  Engine engine() const;

  friend constexpr bool operator==(Seed, Seed) = default;

 private:
  std::uint64_t value_;
};

// Stable substream tags. Changing any of these changes every simulated output.
namespace stream {
inline constexpr std::uint64_t source = 0x50u;
inline constexpr std::uint64_t lo_arm1 = 0x51u;
inline constexpr std::uint64_t lo_arm2 = 0x52u;
inline constexpr std::uint64_t detector1 = 0x53u;
inline constexpr std::uint64_t detector2 = 0x54u;
inline constexpr std::uint64_t dephasing = 0x55u;
inline constexpr std::uint64_t reference = 0x60u;
inline constexpr std::uint64_t interference = 0x61u;
inline constexpr std::uint64_t trial = 0x70u;
}  // namespace stream

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace phbt
