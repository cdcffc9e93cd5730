#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace esplace {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of an independent substream keyed by (seed, stream, index).
inline constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream,
                                              std::uint64_t index) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

// mt19937_64 output is fixed by the standard; the conversions below are ours so the
// draws do not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool coin() { return (engine_() >> 63) != 0; }

  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace esplace
