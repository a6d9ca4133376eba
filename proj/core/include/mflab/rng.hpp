#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mflab {

namespace detail {
// SplitMix64 finalizer, used to turn (seed, stream) pairs into well-mixed
// engine seeds so that replication streams are independent.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Well-mixed sub-seed for stream `stream_index` of a master seed. Used to
/// hand independent, reproducible streams to replications and worker cells.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream_index) {
  return detail::splitmix64(seed) ^ detail::splitmix64(~stream_index);
}

/// Seedable, splittable random source. All sampling goes through hand-rolled
/// transforms of the mt19937_64 output stream, so a given (seed, stream)
/// reproduces the same draws on every platform and standard library.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : eng_(detail::splitmix64(seed)) {}

  /// Independent stream derived from (seed, stream_index).
  static SplitRng stream(std::uint64_t seed, std::uint64_t stream_index) {
    return SplitRng(derive_stream_seed(seed, stream_index));
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  /// Exponential holding time with the given rate (> 0).
  double exponential(double rate) {
    return -std::log1p(-uniform01()) / rate;
  }

  /// Uniform integer in [0, n), unbiased via rejection. n must be >= 1.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t threshold = -n % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = eng_();
      if (x >= threshold) return x % n;
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace mflab
