#include "freqlab/noise.hpp"

#include <cmath>
#include <numbers>

namespace freqlab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> block_for(NoiseStream s) noexcept {
  const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(s.counter),
                                         static_cast<std::uint32_t>(s.counter >> 32), 0u, 0u};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(s.seed),
                                         static_cast<std::uint32_t>(s.seed >> 32)};
  return philox4x32(ctr, key);
}

// 53 random bits mapped to (0, 1].
inline double to_unit_open_left(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

GaussianDraw gaussian(NoiseStream stream) noexcept {
  const auto b = block_for(stream);
  const double u1 = to_unit_open_left(b[0], b[1]);
  const double u2 = to_unit_open_left(b[2], b[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double z = r * std::cos(2.0 * std::numbers::pi * u2);
  return {z, NoiseStream{stream.seed, stream.counter + 1}};
}

double uniform(NoiseStream stream) noexcept {
  const auto b = block_for(stream);
  return to_unit_open_left(b[0], b[1]);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

NoiseStream split(NoiseStream stream, std::uint64_t index) noexcept {
  return NoiseStream{splitmix64(splitmix64(stream.seed) ^ splitmix64(~index)), 0};
}

}  // namespace freqlab
