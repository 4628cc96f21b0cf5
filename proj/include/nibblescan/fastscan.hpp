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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nibblescan/pq.hpp"
#include "nibblescan/topk.hpp"

namespace nibblescan {

// 4-bit fast scan: K=16 distance tables scalar-quantized to 16 bytes so one
// table row fits a 128-bit register, codes nibble-packed in blocks of 32
// vectors, and the per-block lookup done with in-register byte shuffles. A
// pair of 16-byte lanes is treated as a single 32-byte unit so the same
// kernel shape covers a native 256-bit shuffle and its two-shuffle
// emulation on 128-bit hardware.

/// Two 16-byte lanes handled as one 32-byte unit. The lane boundary at byte
/// 16 is semantic: lookups never cross it.
struct Reg32 {
    std::array<std::uint8_t, 32> b{};

    friend bool operator==(const Reg32&, const Reg32&) = default;
};

/// 8-bit quantized distance table. Row sub holds 16 bytes; a full distance
/// reconstructs as f(acc) = bias + acc / scale, monotone in acc.
struct QuantizedLUT {
    std::size_t m = 0;
    std::vector<std::uint8_t> bytes; // m * 16
    float bias = 0.0f;
    float scale = 1.0f;

    const std::uint8_t* row(std::size_t sub) const {
        return bytes.data() + sub * 16;
    }

    /// bias + acc / scale up to one float rounding of the reciprocal. The
    /// convert / multiply / add sequence matches the vectorized scan path
    /// bit for bit, so every route (flat scan, IVF merge, test oracles)
    /// sees the identical float.
    float dequantize(std::uint32_t acc) const {
        const float prod = static_cast<float>(acc) * inv_scale_;
        return bias + prod;
    }

    float inv_scale_ = 1.0f; // 1 / scale, cached by quantize_lut
};

/// Nibble-packed codes in blocks of 32 vectors. Within block b, the 16-byte
/// group of sub-quantizer j stores at byte p the code of vector 32b+p in
/// the low nibble and of vector 32b+16+p in the high nibble. Tail padding
/// codes are zero; n records how many slots are real.
struct PackedCodeBlocks {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<std::uint8_t> bytes; // block_count() * m * 16

    std::size_t block_count() const {
        return (n + 31) / 32;
    }
    std::size_t block_stride() const {
        return m * 16;
    }
    const std::uint8_t* block(std::size_t b) const {
        return bytes.data() + b * block_stride();
    }

    /// Code of vector v for sub-quantizer sub, read back from the layout.
    std::uint8_t code_at(std::size_t v, std::size_t sub) const;

    /// Appends one vector's code row (all entries < 16) in place; O(m).
    void append(std::span<const std::uint8_t> code_row);
};

/// Scalar-quantizes a K=16 float table: per-row minimum subtracted, one
/// shared scale = 255 / max row range, entries rounded half away from zero.
/// No entry ever clips and each entry's reconstruction error is at most
/// 0.5 / scale. Raises ArgumentError unless lut.k == 16.
QuantizedLUT quantize_lut(const FloatLUT& lut);

/// Packs a code matrix (entries < 16) into 32-vector blocks.
PackedCodeBlocks pack_codes(const PQCodes& codes);

PQCodes unpack_codes(const PackedCodeBlocks& packed);

// --- Kernel backends -------------------------------------------------------
//
// The scalar reference defines the semantics; SIMD backends must match it
// byte for byte ("simd128x2" = two 128-bit lane ops, "simd256" = one 256-bit
// op). Which backends exist depends on the build target; which can run
// depends on the CPU. The active backend is process-global, defaulting to
// the best available, and can be forced via NIBBLESCAN_BACKEND
// (scalar | simd128x2 | simd256 | auto) or set_active_backend().

enum class Backend {
    scalar,
    simd128x2,
    simd256,
};

std::string_view backend_name(Backend b);

/// Parses a backend name; "auto" or unknown strings give nullopt.
std::optional<Backend> parse_backend(std::string_view name);

/// True if the backend was compiled into this binary.
bool backend_compiled(Backend b);

/// True if the backend is compiled and the running CPU supports it.
bool backend_available(Backend b);

/// The widest available backend.
Backend best_backend();

/// All backends available right now, scalar first.
std::vector<Backend> available_backends();

Backend active_backend();

/// Diagnostics name of the active backend ("scalar" | "simd128x2" |
/// "simd256").
std::string_view active_backend_name();

/// Forces the dispatch target; ArgumentError if unavailable.
void set_active_backend(Backend b);

/// Per-lane table lookup over a 32-byte unit: out[i] is 0 when idx[i] has
/// its high bit set, else table[16*(i/16) + (idx[i] & 15)] — lane 0 indices
/// read the first table lane, lane 1 indices the second.
Reg32 lane_pair_shuffle(const Reg32& table, const Reg32& idx, Backend b);
Reg32 lane_pair_shuffle(const Reg32& table, const Reg32& idx);

/// Bit i of the result is the most significant bit of byte v[i].
std::uint32_t movemask32(const Reg32& v, Backend b);
std::uint32_t movemask32(const Reg32& v);

/// Accumulates one 32-vector block: acc[p] sums qlut rows indexed by the
/// low nibbles, acc[16+p] by the high nibbles, so acc[i] belongs to vector
/// 32b+i. Equivalent to, per sub-quantizer, a nibble split followed by one
/// lane_pair_shuffle with the table row duplicated into both lanes and a
/// widening add. Plain u16 addition; requires qlut.m <= 256 so the maximum
/// total 255*m cannot wrap.
void block_accumulate(const QuantizedLUT& qlut,
                      const std::uint8_t* block,
                      std::span<std::uint16_t, 32> acc,
                      Backend b);
void block_accumulate(const QuantizedLUT& qlut,
                      const std::uint8_t* block,
                      std::span<std::uint16_t, 32> acc);

/// Scan all blocks with the active backend, dequantize per vector and keep
/// the topk closest in ascending (dist, id) order. Padding slots never
/// appear; topk larger than n clamps to n.
std::vector<Neighbor> fastscan_search(const QuantizedLUT& qlut,
                                      const PackedCodeBlocks& packed,
                                      std::size_t topk);

/// Scans one packed set into an existing heap, mapping local slot s to
/// id_map[s] (or to s when id_map is null). The building block shared by
/// fastscan_search and the inverted-index probe loop; results are
/// bit-identical no matter how vectors are split across calls.
void scan_packed_into(const QuantizedLUT& qlut,
                      const PackedCodeBlocks& packed,
                      const std::int64_t* id_map,
                      TopK& heap);

} // namespace nibblescan
