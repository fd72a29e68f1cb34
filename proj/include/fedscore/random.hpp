#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fedscore {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent streams from a master seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = mix_seed(base);
  for (auto t : tags) s = mix_seed(s ^ mix_seed(t + 0x632be59bd9b4e019ULL));
  return s;
}

// Stream tags. Values are arbitrary but frozen: changing them changes every
// seeded output (and the golden values pinned in tests).
namespace stream {
inline constexpr std::uint64_t kData = 1;
inline constexpr std::uint64_t kPartition = 2;
inline constexpr std::uint64_t kNoise = 3;
inline constexpr std::uint64_t kInit = 4;
inline constexpr std::uint64_t kTrain = 5;
inline constexpr std::uint64_t kRepeat = 6;
inline constexpr std::uint64_t kClassMeans = 7;
}  // namespace stream

}  // namespace fedscore
