#pragma once

#include <cstdint>

namespace shapeseed::rng {

// Stateless counter-based generator. Every random decision in the toolkit is
// a pure function of (seed, counter...) so results do not depend on
// evaluation order or thread scheduling.

constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash2(std::uint64_t seed, std::uint64_t a) {
  return mix64(mix64(seed) ^ a);
}

constexpr std::uint64_t hash3(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return mix64(hash2(seed, a) ^ b);
}

/// Map 64 random bits to a double in [0, 1).
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

constexpr double uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return to_unit(hash3(seed, a, b));
}

/// Unbiased-enough integer in [0, n) via 128-bit multiply (n >= 1).
constexpr std::uint32_t bounded(std::uint64_t bits, std::uint32_t n) {
  return static_cast<std::uint32_t>(
      (static_cast<unsigned __int128>(bits) * n) >> 64);
}

}  // namespace shapeseed::rng
