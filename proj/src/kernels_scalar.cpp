#include <algorithm>

#include "magnitude_table.hpp"
#include "uplink/kernels.hpp"

namespace uplink::kernels {
namespace {

void convert_with(const detail::MagnitudeTable& table, const std::uint8_t* iq,
                  std::size_t n, std::uint8_t* out) {
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = table[detail::pair_index(iq[2 * k], iq[2 * k + 1])];
  }
}

void convert_cs8_scalar(const std::uint8_t* iq, std::size_t n, std::uint8_t* out) {
  convert_with(detail::cs8_table(), iq, n, out);
}

void convert_cu8_scalar(const std::uint8_t* iq, std::size_t n, std::uint8_t* out) {
  convert_with(detail::cu8_table(), iq, n, out);
}

void p1_mask_scalar(const std::uint8_t* mag, std::size_t n, const P1Thresholds& t,
                    std::uint8_t* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const int min_pulse = std::min(mag[i], mag[i + 1]);
    const int max_far = std::max(mag[i + 3], mag[i + 4]);
    out[i] = p1_pass(min_pulse, max_far, t) ? 1 : 0;
  }
}

}  // namespace

const KernelSet& scalar() {
  static const KernelSet set{"scalar", convert_cs8_scalar, convert_cu8_scalar,
                             p1_mask_scalar};
  return set;
}

}  // namespace uplink::kernels
