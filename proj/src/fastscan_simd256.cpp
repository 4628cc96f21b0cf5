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

// "simd256" backend: native 32-byte operations. The 256-bit byte shuffle
// looks up within each 128-bit half independently, which is exactly the
// lane-pair contract.

#include <cstdint>
#include <cstdlib>

#include "fastscan_kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define NIBBLESCAN_SIMD256_AVX2 1
#include <immintrin.h>
#endif

namespace nibblescan::detail {

#if defined(NIBBLESCAN_SIMD256_AVX2)

const bool kSimd256Compiled = true;

Reg32 lane_pair_shuffle_simd256(const Reg32& table, const Reg32& idx) {
    const __m256i t =
            _mm256_loadu_si256(reinterpret_cast<const __m256i*>(table.b.data()));
    const __m256i i =
            _mm256_loadu_si256(reinterpret_cast<const __m256i*>(idx.b.data()));
    Reg32 out;
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out.b.data()),
                        _mm256_shuffle_epi8(t, i));
    return out;
}

std::uint32_t movemask32_simd256(const Reg32& v) {
    const __m256i x =
            _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v.b.data()));
    return static_cast<std::uint32_t>(_mm256_movemask_epi8(x));
}

void block_accumulate_simd256(std::size_t m,
                              const std::uint8_t* lut_bytes,
                              const std::uint8_t* block,
                              std::uint16_t* acc) {
    const __m128i low_mask = _mm_set1_epi8(0x0F);
    __m256i a_lo = _mm256_setzero_si256(); // vectors 0..15
    __m256i a_hi = _mm256_setzero_si256(); // vectors 16..31
    for (std::size_t sub = 0; sub < m; ++sub) {
        // One table row duplicated into both lanes; low nibbles drive lane
        // 0, high nibbles lane 1, so a single shuffle covers 32 codes.
        const __m256i table = _mm256_broadcastsi128_si256(_mm_loadu_si128(
                reinterpret_cast<const __m128i*>(lut_bytes + sub * 16)));
        const __m128i codes = _mm_loadu_si128(
                reinterpret_cast<const __m128i*>(block + sub * 16));
        const __m128i lo = _mm_and_si128(codes, low_mask);
        const __m128i hi = _mm_and_si128(_mm_srli_epi16(codes, 4), low_mask);
        const __m256i idx = _mm256_set_m128i(hi, lo);
        const __m256i vals = _mm256_shuffle_epi8(table, idx);
        a_lo = _mm256_add_epi16(
                a_lo, _mm256_cvtepu8_epi16(_mm256_castsi256_si128(vals)));
        a_hi = _mm256_add_epi16(
                a_hi, _mm256_cvtepu8_epi16(_mm256_extracti128_si256(vals, 1)));
    }
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(acc), a_lo);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(acc + 16), a_hi);
}

std::uint32_t dequant_filter32_simd256(const std::uint16_t* acc,
                                       float inv_scale,
                                       float bias,
                                       float worst,
                                       float* dist_out) {
    const __m256 inv_v = _mm256_set1_ps(inv_scale);
    const __m256 bias_v = _mm256_set1_ps(bias);
    const __m256 worst_v = _mm256_set1_ps(worst);
    std::uint32_t mask = 0;
    for (std::size_t g = 0; g < 4; ++g) {
        const __m256i v32 = _mm256_cvtepu16_epi32(_mm_loadu_si128(
                reinterpret_cast<const __m128i*>(acc + g * 8)));
        const __m256 d = _mm256_add_ps(
                bias_v, _mm256_mul_ps(_mm256_cvtepi32_ps(v32), inv_v));
        _mm256_storeu_ps(dist_out + g * 8, d);
        const auto m8 = static_cast<std::uint32_t>(_mm256_movemask_ps(
                _mm256_cmp_ps(d, worst_v, _CMP_LE_OQ)));
        mask |= m8 << (g * 8);
    }
    return mask;
}

#else

const bool kSimd256Compiled = false;

Reg32 lane_pair_shuffle_simd256(const Reg32&, const Reg32&) {
    std::abort(); // unreachable: dispatcher checks backend_compiled first
}

std::uint32_t movemask32_simd256(const Reg32&) {
    std::abort();
}

void block_accumulate_simd256(std::size_t,
                              const std::uint8_t*,
                              const std::uint8_t*,
                              std::uint16_t*) {
    std::abort();
}

std::uint32_t dequant_filter32_simd256(const std::uint16_t*,
                                       float,
                                       float,
                                       float,
                                       float*) {
    std::abort();
}

#endif

} // namespace nibblescan::detail
