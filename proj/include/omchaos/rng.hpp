#pragma once

#include <cstdint>
#include <random>

namespace omchaos {

/// Deterministic random stream. mt19937_64 has a standard-mandated output
/// sequence and the bits->double mapping below is exact, so identical seeds
/// give identical draws on every platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for a work item (trajectory index, sweep point, ...).
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 mix keeps streams decorrelated even for adjacent indices.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return Rng(z ^ (z >> 31));
  }

  /// Uniform in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// -1.0 or +1.0 with equal probability.
  double sign() { return (engine_() & 1u) ? 1.0 : -1.0; }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace omchaos
