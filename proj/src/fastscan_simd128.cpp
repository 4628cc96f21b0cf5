// Copyright 2026-present the nibblescan project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// "simd128x2" backend: every 32-byte operation is emulated with two 128-bit
// lane instructions. On x86-64 that is a pair of SSSE3 byte shuffles; on
// AArch64 a pair of NEON table lookups, with the index masked to 0x8F so
// vqtbl1q_u8 reproduces the shuffle's zeroing rule (a set high bit selects
// zero, otherwise only the low four index bits matter).

#include <cstdint>
#include <cstdlib>

#include "fastscan_kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define NIBBLESCAN_SIMD128_SSE 1
#include <emmintrin.h>
#include <tmmintrin.h>
#elif defined(__aarch64__)
#define NIBBLESCAN_SIMD128_NEON 1
#include <arm_neon.h>
#endif

namespace nibblescan::detail {

#if defined(NIBBLESCAN_SIMD128_SSE)

const bool kSimd128Compiled = true;

Reg32 lane_pair_shuffle_simd128(const Reg32& table, const Reg32& idx) {
    const __m128i t0 =
            _mm_loadu_si128(reinterpret_cast<const __m128i*>(table.b.data()));
    const __m128i t1 = _mm_loadu_si128(
            reinterpret_cast<const __m128i*>(table.b.data() + 16));
    const __m128i i0 =
            _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx.b.data()));
    const __m128i i1 = _mm_loadu_si128(
            reinterpret_cast<const __m128i*>(idx.b.data() + 16));
    Reg32 out;
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out.b.data()),
                     _mm_shuffle_epi8(t0, i0));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out.b.data() + 16),
                     _mm_shuffle_epi8(t1, i1));
    return out;
}

std::uint32_t movemask32_simd128(const Reg32& v) {
    const __m128i lo =
            _mm_loadu_si128(reinterpret_cast<const __m128i*>(v.b.data()));
    const __m128i hi =
            _mm_loadu_si128(reinterpret_cast<const __m128i*>(v.b.data() + 16));
    const auto m0 = static_cast<std::uint32_t>(_mm_movemask_epi8(lo)) & 0xFFFFu;
    const auto m1 = static_cast<std::uint32_t>(_mm_movemask_epi8(hi)) & 0xFFFFu;
    return m0 | (m1 << 16);
}

void block_accumulate_simd128(std::size_t m,
                              const std::uint8_t* lut_bytes,
                              const std::uint8_t* block,
                              std::uint16_t* acc) {
    const __m128i low_mask = _mm_set1_epi8(0x0F);
    const __m128i zero = _mm_setzero_si128();
    __m128i a0 = zero; // vectors 0..7
    __m128i a1 = zero; // vectors 8..15
    __m128i a2 = zero; // vectors 16..23
    __m128i a3 = zero; // vectors 24..31
    for (std::size_t sub = 0; sub < m; ++sub) {
        const __m128i table = _mm_loadu_si128(
                reinterpret_cast<const __m128i*>(lut_bytes + sub * 16));
        const __m128i codes = _mm_loadu_si128(
                reinterpret_cast<const __m128i*>(block + sub * 16));
        const __m128i lo = _mm_and_si128(codes, low_mask);
        const __m128i hi =
                _mm_and_si128(_mm_srli_epi16(codes, 4), low_mask);
        const __m128i vlo = _mm_shuffle_epi8(table, lo);
        const __m128i vhi = _mm_shuffle_epi8(table, hi);
        a0 = _mm_add_epi16(a0, _mm_unpacklo_epi8(vlo, zero));
        a1 = _mm_add_epi16(a1, _mm_unpackhi_epi8(vlo, zero));
        a2 = _mm_add_epi16(a2, _mm_unpacklo_epi8(vhi, zero));
        a3 = _mm_add_epi16(a3, _mm_unpackhi_epi8(vhi, zero));
    }
    _mm_storeu_si128(reinterpret_cast<__m128i*>(acc), a0);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(acc + 8), a1);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(acc + 16), a2);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(acc + 24), a3);
}

std::uint32_t dequant_filter32_simd128(const std::uint16_t* acc,
                                       float inv_scale,
                                       float bias,
                                       float worst,
                                       float* dist_out) {
    const __m128i zero = _mm_setzero_si128();
    const __m128 inv_v = _mm_set1_ps(inv_scale);
    const __m128 bias_v = _mm_set1_ps(bias);
    const __m128 worst_v = _mm_set1_ps(worst);
    std::uint32_t mask = 0;
    for (std::size_t g = 0; g < 4; ++g) {
        const __m128i v = _mm_loadu_si128(
                reinterpret_cast<const __m128i*>(acc + g * 8));
        const __m128i lo32 = _mm_unpacklo_epi16(v, zero);
        const __m128i hi32 = _mm_unpackhi_epi16(v, zero);
        const __m128 d0 = _mm_add_ps(
                bias_v, _mm_mul_ps(_mm_cvtepi32_ps(lo32), inv_v));
        const __m128 d1 = _mm_add_ps(
                bias_v, _mm_mul_ps(_mm_cvtepi32_ps(hi32), inv_v));
        _mm_storeu_ps(dist_out + g * 8, d0);
        _mm_storeu_ps(dist_out + g * 8 + 4, d1);
        const auto m0 = static_cast<std::uint32_t>(
                _mm_movemask_ps(_mm_cmple_ps(d0, worst_v)));
        const auto m1 = static_cast<std::uint32_t>(
                _mm_movemask_ps(_mm_cmple_ps(d1, worst_v)));
        mask |= (m0 | (m1 << 4)) << (g * 8);
    }
    return mask;
}

#elif defined(NIBBLESCAN_SIMD128_NEON)

const bool kSimd128Compiled = true;

namespace {

inline std::uint32_t movemask16_neon(uint8x16_t v) {
    // Fold each byte's MSB down to one bit per byte, then gather the two
    // 8-bit halves.
    const uint16x8_t high_bits = vreinterpretq_u16_u8(vshrq_n_u8(v, 7));
    const uint32x4_t paired16 =
            vreinterpretq_u32_u16(vsraq_n_u16(high_bits, high_bits, 7));
    const uint64x2_t paired32 =
            vreinterpretq_u64_u32(vsraq_n_u32(paired16, paired16, 14));
    const uint8x16_t paired64 =
            vreinterpretq_u8_u64(vsraq_n_u64(paired32, paired32, 28));
    return static_cast<std::uint32_t>(vgetq_lane_u8(paired64, 0)) |
           (static_cast<std::uint32_t>(vgetq_lane_u8(paired64, 8)) << 8);
}

} // namespace

Reg32 lane_pair_shuffle_simd128(const Reg32& table, const Reg32& idx) {
    const uint8x16_t t0 = vld1q_u8(table.b.data());
    const uint8x16_t t1 = vld1q_u8(table.b.data() + 16);
    const uint8x16_t mask = vdupq_n_u8(0x8F);
    const uint8x16_t i0 = vandq_u8(vld1q_u8(idx.b.data()), mask);
    const uint8x16_t i1 = vandq_u8(vld1q_u8(idx.b.data() + 16), mask);
    Reg32 out;
    vst1q_u8(out.b.data(), vqtbl1q_u8(t0, i0));
    vst1q_u8(out.b.data() + 16, vqtbl1q_u8(t1, i1));
    return out;
}

std::uint32_t movemask32_simd128(const Reg32& v) {
    const std::uint32_t m0 = movemask16_neon(vld1q_u8(v.b.data()));
    const std::uint32_t m1 = movemask16_neon(vld1q_u8(v.b.data() + 16));
    return m0 | (m1 << 16);
}

void block_accumulate_simd128(std::size_t m,
                              const std::uint8_t* lut_bytes,
                              const std::uint8_t* block,
                              std::uint16_t* acc) {
    const uint8x16_t low_mask = vdupq_n_u8(0x0F);
    uint16x8_t a0 = vdupq_n_u16(0);
    uint16x8_t a1 = vdupq_n_u16(0);
    uint16x8_t a2 = vdupq_n_u16(0);
    uint16x8_t a3 = vdupq_n_u16(0);
    for (std::size_t sub = 0; sub < m; ++sub) {
        const uint8x16_t table = vld1q_u8(lut_bytes + sub * 16);
        const uint8x16_t codes = vld1q_u8(block + sub * 16);
        const uint8x16_t lo = vandq_u8(codes, low_mask);
        const uint8x16_t hi = vshrq_n_u8(codes, 4);
        const uint8x16_t vlo = vqtbl1q_u8(table, lo);
        const uint8x16_t vhi = vqtbl1q_u8(table, hi);
        a0 = vaddw_u8(a0, vget_low_u8(vlo));
        a1 = vaddw_u8(a1, vget_high_u8(vlo));
        a2 = vaddw_u8(a2, vget_low_u8(vhi));
        a3 = vaddw_u8(a3, vget_high_u8(vhi));
    }
    vst1q_u16(acc, a0);
    vst1q_u16(acc + 8, a1);
    vst1q_u16(acc + 16, a2);
    vst1q_u16(acc + 24, a3);
}

std::uint32_t dequant_filter32_simd128(const std::uint16_t* acc,
                                       float inv_scale,
                                       float bias,
                                       float worst,
                                       float* dist_out) {
    const float32x4_t inv_v = vdupq_n_f32(inv_scale);
    const float32x4_t bias_v = vdupq_n_f32(bias);
    const float32x4_t worst_v = vdupq_n_f32(worst);
    const uint32x4_t bits = {1u, 2u, 4u, 8u};
    std::uint32_t mask = 0;
    for (std::size_t g = 0; g < 8; ++g) {
        const uint32x4_t v32 = vmovl_u16(vld1_u16(acc + g * 4));
        const float32x4_t d = vaddq_f32(
                bias_v, vmulq_f32(vcvtq_f32_u32(v32), inv_v));
        vst1q_f32(dist_out + g * 4, d);
        const uint32x4_t le = vcleq_f32(d, worst_v);
        mask |= vaddvq_u32(vandq_u32(le, bits)) << (g * 4);
    }
    return mask;
}

#else

const bool kSimd128Compiled = false;

Reg32 lane_pair_shuffle_simd128(const Reg32&, const Reg32&) {
    std::abort(); // unreachable: dispatcher checks backend_compiled first
}

std::uint32_t movemask32_simd128(const Reg32&) {
    std::abort();
}

void block_accumulate_simd128(std::size_t,
                              const std::uint8_t*,
                              const std::uint8_t*,
                              std::uint16_t*) {
    std::abort();
}

std::uint32_t dequant_filter32_simd128(const std::uint16_t*,
                                       float,
                                       float,
                                       float,
                                       float*) {
    std::abort();
}

#endif

} // namespace nibblescan::detail
