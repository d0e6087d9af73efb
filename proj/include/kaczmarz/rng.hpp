#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace kaczmarz {

/// splitmix64 mixing step; used to derive independent substreams from a
/// base seed so that e.g. sketch construction and row sampling do not share
/// a stream (and Monte Carlo trials can be keyed by (seed, index)).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded random stream. Wraps mt19937_64 with explicit uniform and
/// gaussian transforms instead of the std distributions, so the exact
/// sequence is a stable function of the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }

  /// Uniform index in [0, n). Modulo bias is negligible for n << 2^64.
  std::size_t uniform_index(std::size_t n) { return gen_() % n; }

  /// Standard normal via Box-Muller (both values of the pair are used).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace kaczmarz
