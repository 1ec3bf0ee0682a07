// NEON variants for AArch64, where Advanced SIMD (with double lanes) is part
// of the base ISA.

#include <arm_neon.h>

#include "uplink/kernels.hpp"

namespace uplink::kernels {

const KernelSet& neon_set();

namespace {

inline uint32x2_t magnitude2(uint32x2_t n4) {
  float64x2_t x = vcvtq_f64_u64(vmovl_u32(n4));
  x = vmulq_f64(vmulq_f64(x, vdupq_n_f64(65025.0)), vdupq_n_f64(1.0 / 131072.0));
  x = vsqrtq_f64(x);
  x = vrndmq_f64(vaddq_f64(x, vdupq_n_f64(0.5)));
  x = vminq_f64(x, vdupq_n_f64(255.0));
  return vmovn_u64(vcvtq_u64_f64(x));
}

// Eight n4 values (two quads) -> eight magnitude bytes.
inline void store8(uint32x4_t a, uint32x4_t b, std::uint8_t* out) {
  const uint32x4_t ma = vcombine_u32(magnitude2(vget_low_u32(a)), magnitude2(vget_high_u32(a)));
  const uint32x4_t mb = vcombine_u32(magnitude2(vget_low_u32(b)), magnitude2(vget_high_u32(b)));
  const uint16x8_t words = vcombine_u16(vmovn_u32(ma), vmovn_u32(mb));
  vst1_u8(out, vmovn_u16(words));
}

inline uint32x4_t power4(int16x4_t i, int16x4_t q) {
  return vreinterpretq_u32_s32(vmlal_s16(vmull_s16(i, i), q, q));
}

void convert_cs8_neon(const std::uint8_t* iq, std::size_t n, std::uint8_t* out) {
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const int8x8x2_t pairs = vld2_s8(reinterpret_cast<const std::int8_t*>(iq + 2 * k));
    const int16x8_t i = vshlq_n_s16(vmovl_s8(pairs.val[0]), 1);
    const int16x8_t q = vshlq_n_s16(vmovl_s8(pairs.val[1]), 1);
    store8(power4(vget_low_s16(i), vget_low_s16(q)), power4(vget_high_s16(i), vget_high_s16(q)),
           out + k);
  }
  if (k < n) {
    scalar().convert_cs8(iq + 2 * k, n - k, out + k);
  }
}

void convert_cu8_neon(const std::uint8_t* iq, std::size_t n, std::uint8_t* out) {
  const int16x8_t offset = vdupq_n_s16(255);
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const uint8x8x2_t pairs = vld2_u8(iq + 2 * k);
    const int16x8_t i = vsubq_s16(vreinterpretq_s16_u16(vshll_n_u8(pairs.val[0], 1)), offset);
    const int16x8_t q = vsubq_s16(vreinterpretq_s16_u16(vshll_n_u8(pairs.val[1], 1)), offset);
    store8(power4(vget_low_s16(i), vget_low_s16(q)), power4(vget_high_s16(i), vget_high_s16(q)),
           out + k);
  }
  if (k < n) {
    scalar().convert_cu8(iq + 2 * k, n - k, out + k);
  }
}

inline uint64x2_t p1_lanes(uint64x2_t pulse_u, uint64x2_t far_u, const P1Thresholds& t) {
  const float64x2_t pulse = vcvtq_f64_u64(pulse_u);
  const float64x2_t far = vcvtq_f64_u64(far_u);
  const uint64x2_t abs_ok = vcltq_f64(vaddq_f64(far, vdupq_n_f64(t.abs_far)), pulse);
  const uint64x2_t nonzero = vcgtq_f64(pulse, vdupq_n_f64(0.0));
  const uint64x2_t rel_ok = vcltq_f64(vdivq_f64(far, pulse), vdupq_n_f64(t.rel_far));
  return vandq_u64(abs_ok, vandq_u64(nonzero, rel_ok));
}

void p1_mask_neon(const std::uint8_t* mag, std::size_t n, const P1Thresholds& t,
                  std::uint8_t* out) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const uint8x8_t pulse8 = vmin_u8(vld1_u8(mag + i), vld1_u8(mag + i + 1));
    const uint8x8_t far8 = vmax_u8(vld1_u8(mag + i + 3), vld1_u8(mag + i + 4));
    if (vget_lane_u64(vreinterpret_u64_u8(pulse8), 0) == 0) {
      vst1_u8(out + i, vdup_n_u8(0));
      continue;
    }
    const uint16x8_t pulse16 = vmovl_u8(pulse8);
    const uint16x8_t far16 = vmovl_u8(far8);
    const uint8x8_t filters_ok =
        vmovn_u16(vandq_u16(vcgeq_u16(pulse16, vdupq_n_u16(static_cast<std::uint16_t>(t.min_pulse))),
                            vcleq_u16(far16, vdupq_n_u16(static_cast<std::uint16_t>(t.max_far)))));
    std::uint8_t lanes[8];
    for (int half = 0; half < 2; ++half) {
      const uint32x4_t p32 = vmovl_u16(half == 0 ? vget_low_u16(pulse16) : vget_high_u16(pulse16));
      const uint32x4_t f32 = vmovl_u16(half == 0 ? vget_low_u16(far16) : vget_high_u16(far16));
      const uint64x2_t a = p1_lanes(vmovl_u32(vget_low_u32(p32)), vmovl_u32(vget_low_u32(f32)), t);
      const uint64x2_t b =
          p1_lanes(vmovl_u32(vget_high_u32(p32)), vmovl_u32(vget_high_u32(f32)), t);
      lanes[4 * half + 0] = static_cast<std::uint8_t>(vgetq_lane_u64(a, 0) & 1);
      lanes[4 * half + 1] = static_cast<std::uint8_t>(vgetq_lane_u64(a, 1) & 1);
      lanes[4 * half + 2] = static_cast<std::uint8_t>(vgetq_lane_u64(b, 0) & 1);
      lanes[4 * half + 3] = static_cast<std::uint8_t>(vgetq_lane_u64(b, 1) & 1);
    }
    vst1_u8(out + i, vand_u8(vld1_u8(lanes), vand_u8(filters_ok, vdup_n_u8(1))));
  }
  if (i < n) {
    scalar().p1_mask(mag + i, n - i, t, out + i);
  }
}

}  // namespace

const KernelSet& neon_set() {
  static const KernelSet set{"neon", convert_cs8_neon, convert_cu8_neon, p1_mask_neon};
  return set;
}

}  // namespace uplink::kernels
