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

namespace nibblescan {

struct KMeansParams {
    std::size_t k = 1;
    std::size_t iters = 25;
    std::uint64_t seed = 0;
};

/// Lloyd's k-means. Initialization is Forgy: k distinct data points sampled
/// uniformly with the seeded generator. Empty clusters are repaired by
/// moving the empty centroid onto the point currently farthest from its
/// assigned centroid. Fully deterministic given the seed; distances
/// accumulate in float, the objective in double.
///
/// If objective_trace is non-null it receives the total quantization error
/// (sum of squared distances to the nearest centroid) measured against the
/// centroids at the start of each iteration; the sequence is non-increasing.
VectorSet kmeans(const VectorSet& data,
                 const KMeansParams& params,
                 std::vector<double>* objective_trace = nullptr);

/// Index of the centroid nearest to x (squared L2, float accumulation),
/// ties toward the lower index.
std::size_t assign(const VectorSet& centroids, std::span<const float> x);

/// Squared Euclidean distance with float accumulation. Shared by every
/// argmin in the library so assignment decisions agree bit-for-bit across
/// modules.
float squared_l2(const float* a, const float* b, std::size_t d);

} // namespace nibblescan
