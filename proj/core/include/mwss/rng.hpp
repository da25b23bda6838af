#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace mwss {

/// Seeded PRNG used for every random draw in the project.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are not (their algorithms are left to
/// the library), so the conversions to reals, indices and normals are done here
/// by hand. Together this makes every run bitwise reproducible across
/// toolchains for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::size_t index(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (one value per call, the pair's twin is dropped).
  double normal();

  /// Independent child generator for a named sub-stream.
  Rng fork(std::uint64_t stream) const;

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

  /// Seed mixer (splitmix64 finalizer).
  static std::uint64_t mix(std::uint64_t x);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace mwss
