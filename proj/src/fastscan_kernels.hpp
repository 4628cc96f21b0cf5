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

// Internal linkage between the dispatcher and the per-target kernel
// translation units. Each SIMD TU defines its kCompiled flag plus kernel
// entry points; on targets where the backend cannot be built the TU
// degrades to the flag being false and the entry points trapping.

#pragma once

#include <cstdint>

#include "nibblescan/fastscan.hpp"

namespace nibblescan::detail {

// fastscan_simd128.cpp: two 16-byte lane ops (SSSE3 on x86-64, NEON on
// AArch64).
extern const bool kSimd128Compiled;
Reg32 lane_pair_shuffle_simd128(const Reg32& table, const Reg32& idx);
std::uint32_t movemask32_simd128(const Reg32& v);
void block_accumulate_simd128(std::size_t m,
                              const std::uint8_t* lut_bytes,
                              const std::uint8_t* block,
                              std::uint16_t* acc);
std::uint32_t dequant_filter32_simd128(const std::uint16_t* acc,
                                       float inv_scale,
                                       float bias,
                                       float worst,
                                       float* dist_out);

// fastscan_simd256.cpp: single 32-byte ops (AVX2; x86-64 only).
extern const bool kSimd256Compiled;
Reg32 lane_pair_shuffle_simd256(const Reg32& table, const Reg32& idx);
std::uint32_t movemask32_simd256(const Reg32& v);
void block_accumulate_simd256(std::size_t m,
                              const std::uint8_t* lut_bytes,
                              const std::uint8_t* block,
                              std::uint16_t* acc);
std::uint32_t dequant_filter32_simd256(const std::uint16_t* acc,
                                       float inv_scale,
                                       float bias,
                                       float worst,
                                       float* dist_out);

// dequant_filter32 contract (all backends, bit-identical): dist_out[i] =
// bias + float(acc[i]) * inv_scale with separate IEEE single roundings for
// the multiply and the add; result bit i set when dist_out[i] <= worst.
// <= rather than < so equal-distance candidates survive for the heap's
// lower-id tie rule.

} // namespace nibblescan::detail
