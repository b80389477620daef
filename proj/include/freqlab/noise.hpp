#pragma once

#include <array>
#include <cstdint>

namespace freqlab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
/// the output block is a pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Position in a reproducible Gaussian stream. Immutable value; drawing
/// returns the advanced stream instead of mutating this one.
struct NoiseStream {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;

  friend bool operator==(const NoiseStream&, const NoiseStream&) = default;
};

struct GaussianDraw {
  double value;
  NoiseStream next;
};

/// Standard normal variate for (seed, counter) via Box-Muller on two 53-bit
/// uniforms taken from one Philox block.
GaussianDraw gaussian(NoiseStream stream) noexcept;

/// Uniform in (0, 1] for (seed, counter); used by tests and synthetic data.
double uniform(NoiseStream stream) noexcept;

/// Independent child stream: the key is derived from (seed, index) by a
/// SplitMix64 finalizer so sibling streams never share blocks.
NoiseStream split(NoiseStream stream, std::uint64_t index) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace freqlab
