#pragma once

#include <array>
#include <cstdint>

namespace uplink::detail {

using MagnitudeTable = std::array<std::uint8_t, 65536>;

// Both indexed by (first_byte << 8) | second_byte of the raw IQ pair.
const MagnitudeTable& cs8_table();
const MagnitudeTable& cu8_table();

inline std::size_t pair_index(std::uint8_t i, std::uint8_t q) {
  return (static_cast<std::size_t>(i) << 8) | q;
}

}  // namespace uplink::detail
