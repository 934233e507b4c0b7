#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace augclust {

/// Deterministic random source. The mt19937_64 engine is fully specified by
/// the standard, but std::*_distribution is not, so all sampling transforms
/// are done by hand here. Every random decision in the library flows through
/// this class, which is what makes runs bit-reproducible across platforms
/// and worker counts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Derives an independent stream from (seed, salt, a, b). Used to give
  /// each (epoch, image) pair its own augmentation stream so results do not
  /// depend on iteration order or parallelism.
  static Rng stream(std::uint64_t seed, std::uint64_t salt, std::uint64_t a = 0, std::uint64_t b = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n); n must be positive.
  int uniform_int(int n);
  /// Standard normal via Box-Muller (pair cached).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Draws `count` distinct indices from [0, n), returned in ascending order.
  std::vector<int> sample_indices(int n, int count);

 private:
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

/// splitmix64 finalizer; used for stream derivation and config hashing.
std::uint64_t mix64(std::uint64_t x);

// Named stream salts. Distinct constants keep the per-purpose streams of one
// run independent of each other.
inline constexpr std::uint64_t kSaltEncoderInit = 0x01;
inline constexpr std::uint64_t kSaltPrototypes = 0x02;
inline constexpr std::uint64_t kSaltAugment = 0x03;
inline constexpr std::uint64_t kSaltPalette = 0x04;
inline constexpr std::uint64_t kSaltSensitivity = 0x05;
inline constexpr std::uint64_t kSaltSynthetic = 0x06;

}  // namespace augclust
