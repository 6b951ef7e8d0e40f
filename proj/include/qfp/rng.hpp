#pragma once

#include <cstdint>
#include <random>

namespace qfp {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent stream seeds from a
/// master seed so that results never depend on thread scheduling.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a) {
  return mix64(mix64(seed) ^ mix64(a + 0x632BE59BD9B4E019ULL));
}

constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return stream_seed(stream_seed(seed, a), b);
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t a) { return Rng(stream_seed(seed, a)); }

inline Rng make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return Rng(stream_seed(seed, a, b));
}

/// Uniform double in [0, 1) from the top 53 bits. Unlike
/// std::uniform_real_distribution this is identical across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace qfp
