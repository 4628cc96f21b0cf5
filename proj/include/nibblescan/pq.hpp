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

#include <cstdint>
#include <span>
#include <vector>

#include "nibblescan/dataset.hpp"
#include "nibblescan/topk.hpp"

namespace nibblescan {

/// Product-quantization codebook: m sub-codebooks of k centroids over
/// dsub = d/m dimensional slices.
struct Codebook {
    std::size_t m = 0;
    std::size_t k = 0;
    std::size_t dsub = 0;
    std::vector<float> centroids; // m * k * dsub, sub-codebook major

    std::size_t dim() const {
        return m * dsub;
    }
    const float* centroid(std::size_t sub, std::size_t code) const {
        return centroids.data() + (sub * k + code) * dsub;
    }
    float* centroid(std::size_t sub, std::size_t code) {
        return centroids.data() + (sub * k + code) * dsub;
    }
};

/// n encoded vectors, one byte per sub-quantizer code (codes < k <= 256).
struct PQCodes {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<std::uint8_t> codes; // n * m, row-major

    const std::uint8_t* row(std::size_t i) const {
        return codes.data() + i * m;
    }
    std::uint8_t* row(std::size_t i) {
        return codes.data() + i * m;
    }
};

/// Per-query float distance table: values[sub][code] is the squared L2
/// distance between the query's slice and that codeword.
struct FloatLUT {
    std::size_t m = 0;
    std::size_t k = 0;
    std::vector<float> values; // m * k, row-major

    float at(std::size_t sub, std::size_t code) const {
        return values[sub * k + code];
    }
    const float* row(std::size_t sub) const {
        return values.data() + sub * k;
    }
};

/// Trains one k-means sub-codebook per dsub-dimensional slice of the
/// training set. Every slice uses the caller's seed unchanged, so
/// sub-codebook j equals an independent kmeans run on slice j.
Codebook train_pq(const VectorSet& training,
                  std::size_t m,
                  std::size_t k,
                  std::uint64_t seed);

/// Per-slice nearest-codeword indices for one vector, ties toward the
/// lower code.
std::vector<std::uint8_t> encode(const Codebook& cb, std::span<const float> x);

PQCodes encode_all(const Codebook& cb, const VectorSet& xs);

/// Lossy reconstruction: row i is the concatenation of the codewords
/// selected by codes row i. A stored code >= k raises CorruptionError.
VectorSet decode(const Codebook& cb, const PQCodes& codes);

FloatLUT build_lut(const Codebook& cb, std::span<const float> q);

/// Baseline table-lookup scan: distance(i) = sum over sub-quantizers of
/// lut[sub][code]. Returns the topk closest in ascending (dist, id) order;
/// topk larger than n clamps to n.
std::vector<Neighbor> adc_scan(const FloatLUT& lut,
                               const PQCodes& codes,
                               std::size_t topk);

/// Compact byte size of n*m codes: one byte per code for k=256, one nibble
/// for k=16 (total ceil(n*m*log2(k)/8)).
std::size_t serialized_code_bytes(std::size_t n, std::size_t m, std::size_t k);

/// Flat serialization matching serialized_code_bytes. For k=16 codes are
/// nibble-packed in row-major stream order (even stream index -> low
/// nibble). Only k=16 and k=256 are supported.
std::vector<std::uint8_t> serialize_codes(const PQCodes& codes, std::size_t k);
PQCodes deserialize_codes(std::span<const std::uint8_t> bytes,
                          std::size_t n,
                          std::size_t m,
                          std::size_t k);

/// Number of build_lut calls since process start (or the last reset).
/// Lets tests pin down how many table builds a search performed.
std::uint64_t lut_build_count();
void reset_lut_build_count();

} // namespace nibblescan
