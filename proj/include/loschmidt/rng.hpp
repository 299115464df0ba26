#pragma once

#include <cstdint>
#include <random>

namespace loschmidt {

/// Seeded 64-bit stream with a portable uniform mapping.
///
/// std::uniform_real_distribution is implementation-defined, so draws are
/// mapped by hand to keep baths bit-identical across standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_open(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace loschmidt
