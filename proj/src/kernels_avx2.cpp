// AVX2 variants. This translation unit is built with -mavx2 and only reached
// after a runtime CPU check.

#include <immintrin.h>

#include "uplink/kernels.hpp"

namespace uplink::kernels {

const KernelSet& avx2_set();

namespace {

// floor(sqrt(65025 * n4 / 131072) + 0.5) capped at 255, four lanes at a time.
// Same IEEE double operations as magnitude_from_quarter_power.
inline __m128i magnitude4(__m128i n4) {
  const __m256d scale = _mm256_set1_pd(65025.0);
  const __m256d inv = _mm256_set1_pd(1.0 / 131072.0);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d cap = _mm256_set1_pd(255.0);
  __m256d x = _mm256_cvtepi32_pd(n4);
  x = _mm256_mul_pd(_mm256_mul_pd(x, scale), inv);
  x = _mm256_sqrt_pd(x);
  x = _mm256_floor_pd(_mm256_add_pd(x, half));
  x = _mm256_min_pd(x, cap);
  return _mm256_cvttpd_epi32(x);
}

// n4 for eight pairs -> eight magnitude bytes.
inline void store8(__m256i n4, std::uint8_t* out) {
  const __m128i lo = magnitude4(_mm256_castsi256_si128(n4));
  const __m128i hi = magnitude4(_mm256_extracti128_si256(n4, 1));
  const __m128i words = _mm_packs_epi32(lo, hi);
  _mm_storel_epi64(reinterpret_cast<__m128i*>(out), _mm_packus_epi16(words, words));
}

void convert_cs8_avx2(const std::uint8_t* iq, std::size_t n, std::uint8_t* out) {
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m128i raw = _mm_loadu_si128(reinterpret_cast<const __m128i*>(iq + 2 * k));
    const __m256i v = _mm256_cvtepi8_epi16(raw);
    const __m256i power = _mm256_madd_epi16(v, v);
    store8(_mm256_slli_epi32(power, 2), out + k);
  }
  if (k < n) {
    scalar().convert_cs8(iq + 2 * k, n - k, out + k);
  }
}

void convert_cu8_avx2(const std::uint8_t* iq, std::size_t n, std::uint8_t* out) {
  const __m256i offset = _mm256_set1_epi16(255);
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m128i raw = _mm_loadu_si128(reinterpret_cast<const __m128i*>(iq + 2 * k));
    const __m256i v = _mm256_sub_epi16(_mm256_slli_epi16(_mm256_cvtepu8_epi16(raw), 1), offset);
    store8(_mm256_madd_epi16(v, v), out + k);
  }
  if (k < n) {
    scalar().convert_cu8(iq + 2 * k, n - k, out + k);
  }
}

inline __m128i load8(const std::uint8_t* p) {
  return _mm_loadl_epi64(reinterpret_cast<const __m128i*>(p));
}

// Four lanes of p1_pass. Returns a 4-bit lane mask.
inline int p1_lanes(__m128i min_pulse, __m128i max_far, const P1Thresholds& t) {
  const __m256d pulse = _mm256_cvtepi32_pd(min_pulse);
  const __m256d far = _mm256_cvtepi32_pd(max_far);
  const __m256d abs_ok =
      _mm256_cmp_pd(_mm256_add_pd(far, _mm256_set1_pd(t.abs_far)), pulse, _CMP_LT_OQ);
  const __m256d nonzero = _mm256_cmp_pd(pulse, _mm256_setzero_pd(), _CMP_GT_OQ);
  const __m256d rel_ok =
      _mm256_cmp_pd(_mm256_div_pd(far, pulse), _mm256_set1_pd(t.rel_far), _CMP_LT_OQ);
  return _mm256_movemask_pd(_mm256_and_pd(abs_ok, _mm256_and_pd(nonzero, rel_ok)));
}

void p1_mask_avx2(const std::uint8_t* mag, std::size_t n, const P1Thresholds& t,
                  std::uint8_t* out) {
  const __m256i min_allowed = _mm256_set1_epi32(t.min_pulse);
  const __m256i max_allowed = _mm256_set1_epi32(t.max_far);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m128i pulse8 = _mm_min_epu8(load8(mag + i), load8(mag + i + 1));
    const __m128i far8 = _mm_max_epu8(load8(mag + i + 3), load8(mag + i + 4));
    // Most positions in real traffic are noise with no pulse at all.
    if (_mm_movemask_epi8(_mm_cmpeq_epi8(_mm_unpacklo_epi64(pulse8, pulse8),
                                         _mm_setzero_si128())) == 0xffff) {
      _mm_storel_epi64(reinterpret_cast<__m128i*>(out + i), _mm_setzero_si128());
      continue;
    }
    const __m256i pulse = _mm256_cvtepu8_epi32(pulse8);
    const __m256i far = _mm256_cvtepu8_epi32(far8);
    const __m256i filters_fail = _mm256_or_si256(_mm256_cmpgt_epi32(min_allowed, pulse),
                                                 _mm256_cmpgt_epi32(far, max_allowed));
    const int filter_mask = ~_mm256_movemask_ps(_mm256_castsi256_ps(filters_fail)) & 0xff;
    const int lo = p1_lanes(_mm256_castsi256_si128(pulse), _mm256_castsi256_si128(far), t);
    const int hi = p1_lanes(_mm256_extracti128_si256(pulse, 1),
                            _mm256_extracti128_si256(far, 1), t);
    const int mask = (lo | (hi << 4)) & filter_mask;
    for (int lane = 0; lane < 8; ++lane) {
      out[i + lane] = static_cast<std::uint8_t>((mask >> lane) & 1);
    }
  }
  if (i < n) {
    scalar().p1_mask(mag + i, n - i, t, out + i);
  }
}

}  // namespace

const KernelSet& avx2_set() {
  static const KernelSet set{"avx2", convert_cs8_avx2, convert_cu8_avx2, p1_mask_avx2};
  return set;
}

}  // namespace uplink::kernels
