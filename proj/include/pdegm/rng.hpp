/* Reproducible random streams for data generation.  The generator is the
 * standard-specified mt19937_64 seeded through splitmix64 with a per-replicate
 * stream split; uniforms come from the top 53 bits and normal samples from the
 * Marsaglia polar method, so a (seed, replicate) pair yields the same data on
 * every conforming platform up to libm's log/sqrt.
 */
#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace pdegm {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Stream split: replicate k draws from an independent substream of seed.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t replicate) {
  return splitmix64(splitmix64(seed) + replicate);
}

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t replicate)
      : gen_(stream_seed(seed, replicate)) {}

  /// Uniform in [0, 1) from the top 53 bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  static const char* generator_name() { return "mt19937_64+splitmix64-stream"; }
  static const char* normal_method() { return "marsaglia-polar"; }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pdegm
