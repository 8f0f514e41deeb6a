#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace subord {

/// Seeded 64-bit generator. Uniforms are built from raw bits so streams are
/// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double exponential() { return -std::log(uniform()); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace subord
