#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace prmrl {

/// Engine used for every stochastic draw. Streams never share an engine.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer: a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a key path. The result depends
/// only on the values, so work can be scheduled in any order.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = splitmix64(parent);
  for (std::uint64_t k : keys) s = splitmix64(s ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return s;
}

inline Rng make_rng(std::uint64_t parent, std::initializer_list<std::uint64_t> keys) {
  return Rng(derive_seed(parent, keys));
}

/// Stream tags so independent consumers of one master seed never collide.
namespace stream {
inline constexpr std::uint64_t kNodes = 0x4e4f444553ULL;
inline constexpr std::uint64_t kEdges = 0x4544474553ULL;
inline constexpr std::uint64_t kQueries = 0x5155455259ULL;
inline constexpr std::uint64_t kAttach = 0x415454414348ULL;
inline constexpr std::uint64_t kNavigate = 0x4e4156ULL;
}  // namespace stream

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double gaussian(Rng& rng, double sigma) {
  if (sigma <= 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

}  // namespace prmrl
