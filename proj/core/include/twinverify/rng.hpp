#pragma once

#include <cstdint>
#include <random>

namespace twinverify {

/// SplitMix64 finalizer. Used only to derive stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Per-run seed: splitmix64(master ^ splitmix64(run_index)).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run_index) noexcept {
  return splitmix64(master ^ splitmix64(run_index));
}

inline constexpr std::uint64_t kDefaultSeed = 0x7477696E76657269ULL;  // "twinveri"

/// Portable random source: std::mt19937_64 (whose output sequence is fixed
/// by the standard) plus hand-written conversions, because the standard
/// distribution classes are implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform index in [0, n) without modulo bias.
  std::uint64_t index(std::uint64_t n);

  /// Exponential with the given rate (events per time unit).
  double exponential(double rate);

  bool bernoulli(double p) { return uniform01() < p; }

private:
  std::mt19937_64 engine_;
};

}  // namespace twinverify
