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

#include "nibblescan/pq.hpp"

#include <atomic>
#include <limits>
#include <string>

#include "nibblescan/errors.hpp"
#include "nibblescan/kmeans.hpp"

namespace nibblescan {

namespace {

std::atomic<std::uint64_t> g_lut_builds{0};

void check_dim(const Codebook& cb, std::size_t got, const char* op) {
    if (got != cb.dim()) {
        throw ArgumentError(std::string(op) + ": dimension mismatch (expected " +
                            std::to_string(cb.dim()) + ", got " +
                            std::to_string(got) + ")");
    }
}

} // namespace

Codebook train_pq(const VectorSet& training,
                  std::size_t m,
                  std::size_t k,
                  std::uint64_t seed) {
    if (m < 1 || training.d == 0 || training.d % m != 0) {
        throw ArgumentError("train_pq: d=" + std::to_string(training.d) +
                            " is not divisible by m=" + std::to_string(m));
    }
    if (training.n < k) {
        throw ArgumentError("train_pq requires n >= k (n=" +
                            std::to_string(training.n) + ", k=" +
                            std::to_string(k) + ")");
    }
    const std::size_t dsub = training.d / m;

    Codebook cb;
    cb.m = m;
    cb.k = k;
    cb.dsub = dsub;
    cb.centroids.resize(m * k * dsub);

    VectorSet slice(training.n, dsub);
    for (std::size_t sub = 0; sub < m; ++sub) {
        for (std::size_t i = 0; i < training.n; ++i) {
            std::copy_n(training.row(i) + sub * dsub, dsub, slice.row(i));
        }
        const VectorSet cents = kmeans(slice, {k, 25, seed});
        std::copy(cents.data.begin(), cents.data.end(),
                  cb.centroids.begin() + sub * k * dsub);
    }
    return cb;
}

std::vector<std::uint8_t> encode(const Codebook& cb, std::span<const float> x) {
    check_dim(cb, x.size(), "encode");
    std::vector<std::uint8_t> row(cb.m);
    for (std::size_t sub = 0; sub < cb.m; ++sub) {
        const float* xs = x.data() + sub * cb.dsub;
        std::size_t best = 0;
        float best_dist = std::numeric_limits<float>::infinity();
        for (std::size_t c = 0; c < cb.k; ++c) {
            const float dist = squared_l2(cb.centroid(sub, c), xs, cb.dsub);
            if (dist < best_dist) {
                best_dist = dist;
                best = c;
            }
        }
        row[sub] = static_cast<std::uint8_t>(best);
    }
    return row;
}

PQCodes encode_all(const Codebook& cb, const VectorSet& xs) {
    check_dim(cb, xs.d, "encode_all");
    PQCodes out;
    out.n = xs.n;
    out.m = cb.m;
    out.codes.resize(xs.n * cb.m);
    for (std::size_t i = 0; i < xs.n; ++i) {
        const auto row = encode(cb, xs.vec(i));
        std::copy(row.begin(), row.end(), out.row(i));
    }
    return out;
}

VectorSet decode(const Codebook& cb, const PQCodes& codes) {
    if (codes.m != cb.m) {
        throw ArgumentError("decode: code width " + std::to_string(codes.m) +
                            " does not match codebook m=" +
                            std::to_string(cb.m));
    }
    VectorSet out(codes.n, cb.dim());
    for (std::size_t i = 0; i < codes.n; ++i) {
        const std::uint8_t* row = codes.row(i);
        float* dst = out.row(i);
        for (std::size_t sub = 0; sub < cb.m; ++sub) {
            if (row[sub] >= cb.k) {
                throw CorruptionError(
                        "decode: stored code " + std::to_string(row[sub]) +
                        " out of range for k=" + std::to_string(cb.k) +
                        " (vector " + std::to_string(i) + ", sub-quantizer " +
                        std::to_string(sub) + ")");
            }
            std::copy_n(cb.centroid(sub, row[sub]), cb.dsub,
                        dst + sub * cb.dsub);
        }
    }
    return out;
}

FloatLUT build_lut(const Codebook& cb, std::span<const float> q) {
    check_dim(cb, q.size(), "build_lut");
    FloatLUT lut;
    lut.m = cb.m;
    lut.k = cb.k;
    lut.values.resize(cb.m * cb.k);
    for (std::size_t sub = 0; sub < cb.m; ++sub) {
        const float* qs = q.data() + sub * cb.dsub;
        float* row = lut.values.data() + sub * cb.k;
        for (std::size_t c = 0; c < cb.k; ++c) {
            row[c] = squared_l2(cb.centroid(sub, c), qs, cb.dsub);
        }
    }
    g_lut_builds.fetch_add(1, std::memory_order_relaxed);
    return lut;
}

std::vector<Neighbor> adc_scan(const FloatLUT& lut,
                               const PQCodes& codes,
                               std::size_t topk) {
    if (codes.m != lut.m) {
        throw ArgumentError("adc_scan: code width " + std::to_string(codes.m) +
                            " does not match table m=" + std::to_string(lut.m));
    }
    if (topk < 1) {
        throw ArgumentError("adc_scan requires topk >= 1");
    }
    TopK heap(std::min(topk, codes.n));
    const std::size_t m = lut.m;
    const std::size_t k = lut.k;
    for (std::size_t i = 0; i < codes.n; ++i) {
        const std::uint8_t* row = codes.row(i);
        float dist = 0.0f;
        for (std::size_t sub = 0; sub < m; ++sub) {
            dist += lut.values[sub * k + row[sub]];
        }
        heap.push(static_cast<std::int64_t>(i), dist);
    }
    return heap.take_sorted();
}

std::size_t serialized_code_bytes(std::size_t n, std::size_t m, std::size_t k) {
    if (k == 16) {
        return (n * m + 1) / 2;
    }
    if (k == 256) {
        return n * m;
    }
    throw ArgumentError("serialized code size defined for k in {16, 256}");
}

std::vector<std::uint8_t> serialize_codes(const PQCodes& codes, std::size_t k) {
    std::vector<std::uint8_t> out(serialized_code_bytes(codes.n, codes.m, k), 0);
    if (k == 256) {
        std::copy(codes.codes.begin(), codes.codes.end(), out.begin());
        return out;
    }
    for (std::size_t f = 0; f < codes.codes.size(); ++f) {
        const std::uint8_t c = codes.codes[f];
        if (c >= 16) {
            throw ArgumentError("serialize_codes: code " + std::to_string(c) +
                                " does not fit in a nibble");
        }
        out[f / 2] |= static_cast<std::uint8_t>((f % 2 == 0) ? c : c << 4);
    }
    return out;
}

PQCodes deserialize_codes(std::span<const std::uint8_t> bytes,
                          std::size_t n,
                          std::size_t m,
                          std::size_t k) {
    if (bytes.size() != serialized_code_bytes(n, m, k)) {
        throw FormatError("serialized code blob has wrong size: expected " +
                          std::to_string(serialized_code_bytes(n, m, k)) +
                          " bytes, got " + std::to_string(bytes.size()));
    }
    PQCodes codes;
    codes.n = n;
    codes.m = m;
    codes.codes.resize(n * m);
    if (k == 256) {
        std::copy(bytes.begin(), bytes.end(), codes.codes.begin());
        return codes;
    }
    for (std::size_t f = 0; f < codes.codes.size(); ++f) {
        const std::uint8_t b = bytes[f / 2];
        codes.codes[f] = (f % 2 == 0) ? (b & 0x0F) : (b >> 4);
    }
    return codes;
}

std::uint64_t lut_build_count() {
    return g_lut_builds.load(std::memory_order_relaxed);
}

void reset_lut_build_count() {
    g_lut_builds.store(0, std::memory_order_relaxed);
}

} // namespace nibblescan
