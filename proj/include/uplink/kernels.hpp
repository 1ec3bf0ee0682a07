#pragma once

// Data-parallel inner loops. Every kernel set computes bit-identical output;
// the scalar set is the reference, the vector sets are picked at runtime.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace uplink::kernels {

/// P1 test parameters, flattened for the vector loops. The test at position i
/// looks at pulse samples i, i+1 and the universal non-pulse samples i+3, i+4.
struct P1Thresholds {
  double abs_far = 10.0;
  double rel_far = 0.5;
  int min_pulse = 0;    // fixed filter, 0 = off
  int max_far = 255;    // fixed filter, 255 = off
};

/// Reference decision on the reduced P1 window: weakest pulse sample against
/// strongest non-pulse sample. Equivalent to testing every pulse/non-pulse
/// pair since both comparisons are monotone.
inline bool p1_pass(int min_pulse, int max_far, const P1Thresholds& t) {
  if (min_pulse < t.min_pulse || max_far > t.max_far) {
    return false;
  }
  if (!(static_cast<double>(max_far) + t.abs_far < static_cast<double>(min_pulse))) {
    return false;
  }
  return min_pulse > 0 &&
         static_cast<double>(max_far) / static_cast<double>(min_pulse) < t.rel_far;
}

/// iq holds 2 * n interleaved bytes; writes n magnitudes.
using ConvertFn = void (*)(const std::uint8_t* iq, std::size_t n, std::uint8_t* out);

/// mag must be readable for n + 4 bytes; writes n flags (1 = P1 passes).
using P1MaskFn = void (*)(const std::uint8_t* mag, std::size_t n,
                          const P1Thresholds& t, std::uint8_t* out);

struct KernelSet {
  std::string_view name;
  ConvertFn convert_cs8;
  ConvertFn convert_cu8;
  P1MaskFn p1_mask;
};

const KernelSet& scalar();

/// nullptr when not compiled in or not supported by this CPU.
const KernelSet* avx2();
const KernelSet* neon();

/// Every kernel set usable on this machine, scalar first.
std::vector<const KernelSet*> available();

/// Best available set. UPLINK_KERNELS=scalar|avx2|neon in the environment
/// forces a specific one when it is available.
const KernelSet& active();

}  // namespace uplink::kernels
