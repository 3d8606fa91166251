#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace qfb::rng {

// SplitMix64 finalizer. Used both as a seed mixer and as a counter-based
// generator: mix(key + i * golden) is a well-distributed stream in i.
inline constexpr std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for the `index`-th child of `master`. Children never depend on how
/// many siblings exist, so growing an ensemble leaves earlier members intact.
inline constexpr std::uint64_t derive(std::uint64_t master, std::uint64_t index) {
  return mix(mix(master) ^ mix(index * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
}

// Stream tags for sub-streams of one trajectory.
inline constexpr std::uint64_t kTagWiener = 1;
inline constexpr std::uint64_t kTagDephasing = 2;

/// Uniform in (0, 1), never exactly 0.
inline double to_unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal keyed by (key, counter); pure function, platform independent.
inline double counter_normal(std::uint64_t key, std::uint64_t counter) {
  const std::uint64_t base = derive(key, counter);
  const double u1 = to_unit_open(mix(base));
  const double u2 = to_unit_open(mix(base ^ 0xa0761d6478bd642fULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace qfb::rng
