#pragma once

#include <cstdint>
#include <random>

namespace ipg {

// Portable random streams. std::mt19937_64 output is fixed by the standard;
// the distributions are hand-rolled so values reproduce across standard
// library implementations (std::uniform_real_distribution does not).
class Rng {
 public:
  // Named streams used by the instance generator.
  enum class Stream : std::uint64_t {
    kSparsePattern = 0x41,   // positions and values of A
    kRankOnePositions = 0x47,  // support of the g_i vectors
    kAngles = 0x54,          // theta_i
    kGeneric = 0x99,
  };

  explicit Rng(std::uint64_t seed, Stream stream = Stream::kGeneric)
      : engine_(splitmix64(seed ^ (static_cast<std::uint64_t>(stream) * 0x9E3779B97F4A7C15ULL))) {}

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, bound) without modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ipg
