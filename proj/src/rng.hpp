#pragma once

#include <cmath>
#include <cstdint>

namespace structest {

// splitmix64; small enough to seed one instance per (subject, variable)
// substream. The generator and the stream-derivation scheme are fully
// specified here, so identical (spec, seed) pairs reproduce identical
// datasets bit for bit on any platform with IEEE doubles.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via the Marsaglia polar method (rejection stays inside
  // this substream, so draws never leak across variables).
  double normal() {
    for (;;) {
      const double u = 2.0 * uniform01() - 1.0;
      const double v = 2.0 * uniform01() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

private:
  std::uint64_t state_;
};

// Variable roles for substream derivation. Draws for one role never move
// when another role's consumption changes (e.g. adding indicators leaves
// the group and eta draws of every subject untouched).
enum class StreamRole : std::uint64_t {
  kGroup = 1,
  kEta = 2,
  kEpsilon = 3,
  kConfounder = 4,
  kOutcome = 5,
  kReplicate = 6,
};

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t combine_key(std::uint64_t h, std::uint64_t v) {
  return mix64(h + 0x9e3779b97f4a7c15ULL * (v + 1));
}

inline SplitMix64 substream(std::uint64_t seed, std::uint64_t subject, StreamRole role,
                            std::uint64_t index = 0) {
  std::uint64_t h = combine_key(seed, subject);
  h = combine_key(h, static_cast<std::uint64_t>(role));
  h = combine_key(h, index);
  return SplitMix64(h);
}

}  // namespace structest
