#pragma once

#include <cstdint>
#include <random>

namespace med {

/// Seeded generator with platform-stable value streams.
///
/// The engine is the standard 64-bit Mersenne Twister, whose raw output is
/// fixed by the C++ standard. Distribution transforms are implemented here
/// rather than through <random> distributions, whose algorithms vary between
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via the Box-Muller transform; caches the second deviate.
  double normal();

  /// Independent generator derived from this one's seed and a stream tag.
  Rng fork(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace med
