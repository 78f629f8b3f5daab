#pragma once

#include <cstdint>
#include <random>

namespace seqpinn {

/// Deterministic 64-bit mixer, used to derive per-stream seeds
/// (e.g. seed of interval k from the master seed).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// mt19937_64 with a fixed bits-to-double mapping. The engine itself is
/// specified bit-exactly by the standard; std::uniform_real_distribution is
/// not, so we map raw bits ourselves to keep streams reproducible across
/// compilers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // modulo is fine here: n is always tiny relative to 2^64
    return engine_() % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace seqpinn
