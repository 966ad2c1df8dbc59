#pragma once

#include <cstdint>
#include <limits>

namespace relaycap {

/// Counter-based generator: draw i of a stream is mix(key + i * golden),
/// where mix is the SplitMix64 finalizer. Streams are independent values
/// derived from (seed, stream ids), so any batch or hop can be regenerated
/// without replaying the others.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key = 0, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (counter_++) * kGolden); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Stable sub-seed for stream (a, b) of a base seed.
  static constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t k = mix(seed + kGolden);
    k = mix(k ^ (a * 0xd1b54a32d192ed03ULL + 1));
    k = mix(k ^ (b * 0x8cb92ba72f3d8dd7ULL + 2));
    return k;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace relaycap
