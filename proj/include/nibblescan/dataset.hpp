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
#include <filesystem>
#include <span>
#include <vector>

namespace nibblescan {

/// Dense row-major set of n d-dimensional float vectors.
struct VectorSet {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<float> data; // length n * d

    VectorSet() = default;
    VectorSet(std::size_t n_, std::size_t d_)
            : n(n_), d(d_), data(n_ * d_, 0.0f) {}

    const float* row(std::size_t i) const {
        return data.data() + i * d;
    }
    float* row(std::size_t i) {
        return data.data() + i * d;
    }
    std::span<const float> vec(std::size_t i) const {
        return {row(i), d};
    }
};

/// Rectangular int32 matrix; the in-memory shape of an ivecs file.
struct IntMatrix {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<std::int32_t> values; // length n * d

    const std::int32_t* row(std::size_t i) const {
        return values.data() + i * d;
    }
};

/// Exact nearest neighbors per query, row-sorted by ascending true distance,
/// ties broken toward the lower index.
struct GroundTruth {
    std::size_t nq = 0;
    std::size_t k = 0;
    std::vector<std::int32_t> ids; // nq * k

    const std::int32_t* row(std::size_t q) const {
        return ids.data() + q * k;
    }
};

// fvecs / ivecs / bvecs: repeated [int32 LE dim][dim * payload], payload =
// f32 LE / i32 LE / u8. Readers reject truncated or dimension-inconsistent
// files with a FormatError carrying the byte offset; fvecs additionally
// rejects non-finite values. An empty file is a valid empty set.
VectorSet read_fvecs(const std::filesystem::path& path);
IntMatrix read_ivecs(const std::filesystem::path& path);
VectorSet read_bvecs(const std::filesystem::path& path); // bytes widened to float

void write_fvecs(const std::filesystem::path& path, const VectorSet& vs);
void write_ivecs(const std::filesystem::path& path, const IntMatrix& m);
/// All values must be integers in [0, 255].
void write_bvecs(const std::filesystem::path& path, const VectorSet& vs);

/// Deterministic synthetic dataset: n_clusters centers uniform in [0,1)^d,
/// point i = center(i mod n_clusters) + N(0, 0.05) noise per coordinate.
/// Same (n, d, n_clusters, seed) gives bit-identical output (SplitMix64 +
/// Box-Muller, see rng.hpp).
VectorSet gen_synthetic(std::size_t n,
                        std::size_t d,
                        std::size_t n_clusters,
                        std::uint64_t seed);

/// Exact k-nearest-neighbor scan (squared L2, double accumulation), the
/// evaluation oracle for recall. Ties break toward the lower index.
GroundTruth ground_truth(const VectorSet& base,
                         const VectorSet& queries,
                         std::size_t k);

} // namespace nibblescan
