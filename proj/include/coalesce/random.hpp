#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace coalesce {

/// SplitMix64 finalizer. Used for every seed derivation in the project.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives a child seed from `base` and an ordered path of stream labels.
/// Pure function; the same (base, path) always yields the same seed.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

// Stream labels used with derive_seed. Keeping them in one place makes the
// seeding scheme auditable.
namespace stream {
inline constexpr std::uint64_t population = 0x706f70;
inline constexpr std::uint64_t arrivals = 0x617272;
inline constexpr std::uint64_t market = 0x6d6b74;
inline constexpr std::uint64_t outcomes = 0x6f7574;
inline constexpr std::uint64_t engine = 0x656e67;
inline constexpr std::uint64_t world = 0x776c64;
}  // namespace stream

/// Seeded random stream. The engine (mt19937_64) has a standardized output
/// sequence; the distributions below are written out by hand because the
/// standard library's distributions are implementation-defined, which would
/// break cross-toolchain reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of mantissa.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform index in [0, n). n must be > 0.
  std::size_t index(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }
  double exponential(double rate);
  /// Standard normal via Box-Muller (no cached second variate).
  double normal();
  /// exp(sigma * Z); median 1, mean exp(sigma^2 / 2).
  double lognormal(double sigma);
  /// log-uniform on [lo, hi], lo > 0.
  double log_uniform(double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

}  // namespace coalesce
