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

#include "nibblescan/fastscan.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <string>

#include "nibblescan/errors.hpp"
#include "fastscan_kernels.hpp"

namespace nibblescan {

// --- Packed layout ----------------------------------------------------------

std::uint8_t PackedCodeBlocks::code_at(std::size_t v, std::size_t sub) const {
    const std::size_t b = v / 32;
    const std::size_t p = v % 32;
    const std::uint8_t byte = bytes[b * block_stride() + sub * 16 + (p % 16)];
    return (p < 16) ? (byte & 0x0F) : (byte >> 4);
}

void PackedCodeBlocks::append(std::span<const std::uint8_t> code_row) {
    if (code_row.size() != m) {
        throw ArgumentError("append: code row width " +
                            std::to_string(code_row.size()) +
                            " does not match m=" + std::to_string(m));
    }
    const std::size_t v = n;
    if (v % 32 == 0) {
        bytes.resize(bytes.size() + block_stride(), 0);
    }
    std::uint8_t* blk = bytes.data() + (v / 32) * block_stride();
    const std::size_t p = v % 32;
    for (std::size_t sub = 0; sub < m; ++sub) {
        const std::uint8_t c = code_row[sub];
        if (c >= 16) {
            throw ArgumentError("append: code " + std::to_string(c) +
                                " does not fit in a nibble");
        }
        std::uint8_t& byte = blk[sub * 16 + (p % 16)];
        if (p < 16) {
            byte = static_cast<std::uint8_t>((byte & 0xF0) | c);
        } else {
            byte = static_cast<std::uint8_t>((byte & 0x0F) | (c << 4));
        }
    }
    ++n;
}

PackedCodeBlocks pack_codes(const PQCodes& codes) {
    PackedCodeBlocks packed;
    packed.m = codes.m;
    packed.n = codes.n;
    packed.bytes.assign(packed.block_count() * packed.block_stride(), 0);
    for (std::size_t i = 0; i < codes.n; ++i) {
        const std::uint8_t* row = codes.row(i);
        std::uint8_t* blk =
                packed.bytes.data() + (i / 32) * packed.block_stride();
        const std::size_t p = i % 32;
        for (std::size_t sub = 0; sub < codes.m; ++sub) {
            const std::uint8_t c = row[sub];
            if (c >= 16) {
                throw ArgumentError("pack_codes: code " + std::to_string(c) +
                                    " does not fit in a nibble (vector " +
                                    std::to_string(i) + ")");
            }
            blk[sub * 16 + (p % 16)] |=
                    static_cast<std::uint8_t>(p < 16 ? c : c << 4);
        }
    }
    return packed;
}

PQCodes unpack_codes(const PackedCodeBlocks& packed) {
    PQCodes codes;
    codes.n = packed.n;
    codes.m = packed.m;
    codes.codes.resize(packed.n * packed.m);
    for (std::size_t i = 0; i < packed.n; ++i) {
        for (std::size_t sub = 0; sub < packed.m; ++sub) {
            codes.codes[i * packed.m + sub] = packed.code_at(i, sub);
        }
    }
    return codes;
}

// --- Table quantization -----------------------------------------------------

QuantizedLUT quantize_lut(const FloatLUT& lut) {
    if (lut.k != 16) {
        throw ArgumentError("quantize_lut requires k == 16, got k=" +
                            std::to_string(lut.k));
    }
    for (const float v : lut.values) {
        if (!std::isfinite(v)) {
            throw ArgumentError("quantize_lut: non-finite table entry");
        }
    }
    QuantizedLUT q;
    q.m = lut.m;
    q.bytes.resize(lut.m * 16);

    std::vector<float> row_min(lut.m);
    double bias = 0.0;
    double delta = 0.0;
    for (std::size_t sub = 0; sub < lut.m; ++sub) {
        const float* row = lut.row(sub);
        float mn = row[0];
        float mx = row[0];
        for (std::size_t t = 1; t < 16; ++t) {
            mn = std::min(mn, row[t]);
            mx = std::max(mx, row[t]);
        }
        row_min[sub] = mn;
        bias += static_cast<double>(mn);
        delta = std::max(delta, static_cast<double>(mx) -
                                        static_cast<double>(mn));
    }
    q.bias = static_cast<float>(bias);
    q.scale = (delta == 0.0) ? 1.0f : static_cast<float>(255.0 / delta);
    q.inv_scale_ = 1.0f / q.scale;

    // Quantize against the stored float scale so reconstruction divides by
    // exactly the constant used here; (max - min) * scale then tops out at
    // 255 * (1 + 2^-24), which still rounds to 255 — no entry can clip.
    const double s = static_cast<double>(q.scale);
    for (std::size_t sub = 0; sub < lut.m; ++sub) {
        const float* row = lut.row(sub);
        const double mn = static_cast<double>(row_min[sub]);
        for (std::size_t t = 0; t < 16; ++t) {
            const double scaled = (static_cast<double>(row[t]) - mn) * s;
            const long long r = std::llround(scaled); // half away from zero
            q.bytes[sub * 16 + t] =
                    static_cast<std::uint8_t>(std::min<long long>(r, 255));
        }
    }
    return q;
}

// --- Scalar reference kernels ----------------------------------------------

namespace {

Reg32 lane_pair_shuffle_scalar(const Reg32& table, const Reg32& idx) {
    Reg32 out;
    for (std::size_t i = 0; i < 32; ++i) {
        const std::uint8_t j = idx.b[i];
        out.b[i] = (j & 0x80) ? 0 : table.b[(i & 16) | (j & 0x0F)];
    }
    return out;
}

std::uint32_t movemask32_scalar(const Reg32& v) {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < 32; ++i) {
        mask |= static_cast<std::uint32_t>(v.b[i] >> 7) << i;
    }
    return mask;
}

void block_accumulate_scalar(std::size_t m,
                             const std::uint8_t* lut_bytes,
                             const std::uint8_t* block,
                             std::uint16_t* acc) {
    for (std::size_t i = 0; i < 32; ++i) {
        acc[i] = 0;
    }
    for (std::size_t sub = 0; sub < m; ++sub) {
        const std::uint8_t* row = lut_bytes + sub * 16;
        const std::uint8_t* group = block + sub * 16;
        for (std::size_t p = 0; p < 16; ++p) {
            acc[p] += row[group[p] & 0x0F];
            acc[16 + p] += row[group[p] >> 4];
        }
    }
}

std::uint32_t dequant_filter32_scalar(const std::uint16_t* acc,
                                      float inv_scale,
                                      float bias,
                                      float worst,
                                      float* dist_out) {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < 32; ++i) {
        const float prod = static_cast<float>(acc[i]) * inv_scale;
        const float dist = bias + prod;
        dist_out[i] = dist;
        mask |= static_cast<std::uint32_t>(dist <= worst) << i;
    }
    return mask;
}

std::uint32_t dequant_filter32(const QuantizedLUT& qlut,
                               const std::uint16_t* acc,
                               float worst,
                               float* dist_out,
                               Backend b) {
    switch (b) {
    case Backend::simd128x2:
        if (backend_available(b)) {
            return detail::dequant_filter32_simd128(
                    acc, qlut.inv_scale_, qlut.bias, worst, dist_out);
        }
        break;
    case Backend::simd256:
        if (backend_available(b)) {
            return detail::dequant_filter32_simd256(
                    acc, qlut.inv_scale_, qlut.bias, worst, dist_out);
        }
        break;
    case Backend::scalar:
        break;
    }
    return dequant_filter32_scalar(acc, qlut.inv_scale_, qlut.bias, worst,
                                   dist_out);
}

// --- Dispatch ----------------------------------------------------------------

bool cpu_supports(Backend b) {
    switch (b) {
    case Backend::scalar:
        return true;
    case Backend::simd128x2:
#if defined(__x86_64__) || defined(_M_X64)
        return __builtin_cpu_supports("ssse3");
#elif defined(__aarch64__)
        return true; // NEON is baseline on AArch64
#else
        return false;
#endif
    case Backend::simd256:
#if defined(__x86_64__) || defined(_M_X64)
        return __builtin_cpu_supports("avx2");
#else
        return false;
#endif
    }
    return false;
}

Backend init_backend_from_env() {
    if (const char* env = std::getenv("NIBBLESCAN_BACKEND")) {
        if (const auto parsed = parse_backend(env);
            parsed && backend_available(*parsed)) {
            return *parsed;
        }
        // "auto", unknown names and unavailable backends all fall through
        // to the default.
    }
    return best_backend();
}

std::atomic<Backend>& active_backend_slot() {
    static std::atomic<Backend> slot{init_backend_from_env()};
    return slot;
}

} // namespace

std::string_view backend_name(Backend b) {
    switch (b) {
    case Backend::scalar:
        return "scalar";
    case Backend::simd128x2:
        return "simd128x2";
    case Backend::simd256:
        return "simd256";
    }
    return "unknown";
}

std::optional<Backend> parse_backend(std::string_view name) {
    if (name == "scalar") {
        return Backend::scalar;
    }
    if (name == "simd128x2") {
        return Backend::simd128x2;
    }
    if (name == "simd256") {
        return Backend::simd256;
    }
    return std::nullopt;
}

bool backend_compiled(Backend b) {
    switch (b) {
    case Backend::scalar:
        return true;
    case Backend::simd128x2:
        return detail::kSimd128Compiled;
    case Backend::simd256:
        return detail::kSimd256Compiled;
    }
    return false;
}

bool backend_available(Backend b) {
    return backend_compiled(b) && cpu_supports(b);
}

Backend best_backend() {
    if (backend_available(Backend::simd256)) {
        return Backend::simd256;
    }
    if (backend_available(Backend::simd128x2)) {
        return Backend::simd128x2;
    }
    return Backend::scalar;
}

std::vector<Backend> available_backends() {
    std::vector<Backend> out;
    for (const Backend b :
         {Backend::scalar, Backend::simd128x2, Backend::simd256}) {
        if (backend_available(b)) {
            out.push_back(b);
        }
    }
    return out;
}

Backend active_backend() {
    return active_backend_slot().load(std::memory_order_relaxed);
}

std::string_view active_backend_name() {
    return backend_name(active_backend());
}

void set_active_backend(Backend b) {
    if (!backend_available(b)) {
        throw ArgumentError(std::string("backend not available: ") +
                            std::string(backend_name(b)));
    }
    active_backend_slot().store(b, std::memory_order_relaxed);
}

// --- Kernel entry points ------------------------------------------------------

Reg32 lane_pair_shuffle(const Reg32& table, const Reg32& idx, Backend b) {
    switch (b) {
    case Backend::simd128x2:
        if (backend_available(b)) {
            return detail::lane_pair_shuffle_simd128(table, idx);
        }
        break;
    case Backend::simd256:
        if (backend_available(b)) {
            return detail::lane_pair_shuffle_simd256(table, idx);
        }
        break;
    case Backend::scalar:
        break;
    }
    return lane_pair_shuffle_scalar(table, idx);
}

Reg32 lane_pair_shuffle(const Reg32& table, const Reg32& idx) {
    return lane_pair_shuffle(table, idx, active_backend());
}

std::uint32_t movemask32(const Reg32& v, Backend b) {
    switch (b) {
    case Backend::simd128x2:
        if (backend_available(b)) {
            return detail::movemask32_simd128(v);
        }
        break;
    case Backend::simd256:
        if (backend_available(b)) {
            return detail::movemask32_simd256(v);
        }
        break;
    case Backend::scalar:
        break;
    }
    return movemask32_scalar(v);
}

std::uint32_t movemask32(const Reg32& v) {
    return movemask32(v, active_backend());
}

void block_accumulate(const QuantizedLUT& qlut,
                      const std::uint8_t* block,
                      std::span<std::uint16_t, 32> acc,
                      Backend b) {
    if (qlut.m > 256) {
        throw ArgumentError(
                "block_accumulate requires m <= 256 to keep 16-bit "
                "accumulators exact, got m=" +
                std::to_string(qlut.m));
    }
    switch (b) {
    case Backend::simd128x2:
        if (backend_available(b)) {
            detail::block_accumulate_simd128(qlut.m, qlut.bytes.data(), block,
                                             acc.data());
            return;
        }
        break;
    case Backend::simd256:
        if (backend_available(b)) {
            detail::block_accumulate_simd256(qlut.m, qlut.bytes.data(), block,
                                             acc.data());
            return;
        }
        break;
    case Backend::scalar:
        break;
    }
    block_accumulate_scalar(qlut.m, qlut.bytes.data(), block, acc.data());
}

void block_accumulate(const QuantizedLUT& qlut,
                      const std::uint8_t* block,
                      std::span<std::uint16_t, 32> acc) {
    block_accumulate(qlut, block, acc, active_backend());
}

void scan_packed_into(const QuantizedLUT& qlut,
                      const PackedCodeBlocks& packed,
                      const std::int64_t* id_map,
                      TopK& heap) {
    if (qlut.m != packed.m) {
        throw ArgumentError("scan_packed_into: table m=" +
                            std::to_string(qlut.m) +
                            " does not match packed m=" +
                            std::to_string(packed.m));
    }
    const Backend backend = active_backend();
    alignas(32) std::uint16_t acc[32];
    alignas(32) float dist[32];
    const std::size_t blocks = packed.block_count();
    for (std::size_t blk = 0; blk < blocks; ++blk) {
        block_accumulate(qlut, packed.block(blk),
                         std::span<std::uint16_t, 32>(acc), backend);
        const std::size_t base = blk * 32;
        const std::size_t valid = std::min<std::size_t>(32, packed.n - base);
        if (valid == 32) {
            // Candidates at exactly the heap's worst distance stay in the
            // mask (<= compare) so the lower-id tie rule still applies.
            std::uint32_t mask = dequant_filter32(qlut, acc,
                                                  heap.worst_dist(), dist,
                                                  backend);
            while (mask != 0) {
                const unsigned i =
                        static_cast<unsigned>(std::countr_zero(mask));
                mask &= mask - 1;
                const std::size_t slot = base + i;
                heap.push(id_map != nullptr
                                  ? id_map[slot]
                                  : static_cast<std::int64_t>(slot),
                          dist[i]);
            }
        } else {
            // tail block: padding slots are never reported
            for (std::size_t i = 0; i < valid; ++i) {
                const std::size_t slot = base + i;
                heap.push(id_map != nullptr
                                  ? id_map[slot]
                                  : static_cast<std::int64_t>(slot),
                          qlut.dequantize(acc[i]));
            }
        }
    }
}

std::vector<Neighbor> fastscan_search(const QuantizedLUT& qlut,
                                      const PackedCodeBlocks& packed,
                                      std::size_t topk) {
    if (topk < 1) {
        throw ArgumentError("fastscan_search requires topk >= 1");
    }
    TopK heap(std::min(topk, packed.n));
    scan_packed_into(qlut, packed, nullptr, heap);
    return heap.take_sorted();
}

} // namespace nibblescan
