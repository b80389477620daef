#pragma once

#include <cmath>
#include <vector>

#include "freqlab/noise.hpp"

namespace freqlab::test {

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

/// n standard normals from one stream, in draw order.
inline std::vector<double> normals(std::uint64_t seed, std::size_t n) {
  std::vector<double> out(n);
  NoiseStream s{seed, 0};
  for (auto& v : out) {
    const auto d = gaussian(s);
    v = d.value;
    s = d.next;
  }
  return out;
}

}  // namespace freqlab::test
