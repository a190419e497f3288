#pragma once

#include <cstdint>

namespace dwt {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Key for a (parent, child) pair, e.g. (master seed, item index).
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t child) {
  return mix64(parent ^ mix64(child + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: draw n of key k is mix(k, n), so any draw can be
/// reproduced without replaying the stream.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  constexpr std::uint64_t at(std::uint64_t n) const { return derive_seed(key_, n); }
  constexpr std::uint64_t next() { return at(counter_++); }

  /// Uniform in [0, 1) with 53 random bits.
  constexpr double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  constexpr double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  /// Uniform in [0, 1) for draw n, leaving the counter untouched.
  constexpr double unit_at(std::uint64_t n) const {
    return static_cast<double>(at(n) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace dwt
