#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace typoprobe {

// Portable randomness helpers. std::uniform_int_distribution and
// std::shuffle are implementation-defined, so every sampling decision that
// ends up in an output file goes through these instead.
namespace rng {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// FNV-1a; stable across platforms, unlike std::hash.
inline std::uint64_t hash(std::string_view s, std::uint64_t h = 0xCBF29CE484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Stream for the `index`-th job under `seed`; independent of job order.
inline Engine stream(std::uint64_t seed, std::uint64_t index) {
  return Engine(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
}

inline Engine stream(std::uint64_t seed, std::string_view key) { return stream(seed, hash(key)); }

// Uniform integer in [0, n) by rejection.
inline std::uint64_t uniform_index(Engine& g, std::uint64_t n) {
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
  std::uint64_t x;
  do {
    x = g();
  } while (x >= limit);
  return x % n;
}

// Uniform real in [0, 1) with 53 random bits.
inline double uniform_real(Engine& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

// Standard normal by Box-Muller.
inline double normal(Engine& g) {
  double u1;
  do {
    u1 = uniform_real(g);
  } while (u1 <= 0.0);
  const double u2 = uniform_real(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

template <typename T>
void shuffle(std::vector<T>& v, Engine& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = uniform_index(g, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace rng
}  // namespace typoprobe
