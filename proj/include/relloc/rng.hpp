#pragma once

#include <cstdint>
#include <random>

namespace relloc {

// Mixes a master seed with up to three stream indices into an independent
// child seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

// Deterministic random source. Every distribution is generated with a fixed
// algorithm (53-bit uniforms from mt19937_64, Box-Muller gaussians) so that
// sequences are bit-reproducible across platforms and standard-library
// versions. See README "Determinism".
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n); n must be positive.
  std::size_t uniform_index(std::size_t n);

  // Standard normal draw (Box-Muller, second value cached).
  double gaussian();

  double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace relloc
