#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace diffnet {

// Deterministic substream derivation. Every random quantity in a run is
// drawn from a stream keyed by (master seed, realization, node, purpose),
// so adding realizations or reordering execution never perturbs the draws
// of any other stream.
enum class StreamPurpose : std::uint64_t {
  kTopology = 1,
  kSystem = 2,
  kNoiseProfile = 3,
  kInput = 4,
  kNoise = 5,
  kWalk = 6,
  kSchedule = 7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t realization,
                                 std::uint64_t node, StreamPurpose purpose) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ realization);
  h = splitmix64(h ^ (node + 0x51ed2701ULL));
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  return h;
}

// mt19937_64 is fully specified by the standard, and the distributions here
// are hand-rolled, so streams are reproducible across compilers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  Rng(std::uint64_t master, std::uint64_t realization, std::uint64_t node,
      StreamPurpose purpose)
      : eng_(derive_seed(master, realization, node, purpose)) {}

  std::uint64_t next_u64() { return eng_(); }

  // in [0, 1)
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // [0, n)
  int uniform_int(int n) {
    return static_cast<int>(eng_() % static_cast<std::uint64_t>(n));
  }

  // Box-Muller, cosine branch only; stream position advances by exactly two
  // uniforms per call.
  double gaussian() {
    // (0, 1] so the log is finite
    double u1 = static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform01();
    constexpr double two_pi = 6.283185307179586476925287;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace diffnet
