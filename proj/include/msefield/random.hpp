// Deterministic sample streams with explicit bit mappings, so that a
// (seed, stream) pair pins every draw independently of library internals.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace msefield {

class SampleStream {
 public:
  explicit SampleStream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  /// Uniform on (0, 1]; never returns 0, so logs are safe.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Circularly symmetric complex normal with unit total variance.
  std::complex<double> complex_normal() {
    const double radius = std::sqrt(-std::log(uniform()));
    const double angle = 2.0 * M_PI * uniform();
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  double normal() {
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    return radius * std::cos(2.0 * M_PI * uniform());
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace msefield
