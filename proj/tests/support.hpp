#pragma once

// Shared helpers for the test binaries: seeded generators and clean-signal
// builders.

#include <cstdint>
#include <random>
#include <vector>

#include "uplink/sigen.hpp"
#include "uplink/templates.hpp"

namespace uplink::test {

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(0x5eed1030);
  return engine;
}

inline int uniform_int(int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng());
}

inline double uniform_real(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline std::vector<std::uint8_t> random_bytes(std::size_t n) {
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) {
    b = static_cast<std::uint8_t>(rng()());
  }
  return out;
}

inline std::vector<std::uint8_t> clean(InterrogationType type, int amplitude, double offset,
                                       std::size_t lead_in = 0, std::size_t lead_out = 0) {
  GenSpec spec;
  spec.type = type;
  spec.amplitude = amplitude;
  spec.fractional_offset = offset;
  spec.lead_in = lead_in;
  spec.lead_out = lead_out;
  return generate_magnitude(spec);
}

}  // namespace uplink::test
