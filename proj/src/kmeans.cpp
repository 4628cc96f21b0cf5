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

#include "nibblescan/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "nibblescan/errors.hpp"
#include "nibblescan/rng.hpp"

namespace nibblescan {

float squared_l2(const float* a, const float* b, std::size_t d) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < d; ++i) {
        const float diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

namespace {

std::size_t nearest(const float* cents,
                    std::size_t k,
                    std::size_t d,
                    const float* x,
                    float* dist_out = nullptr) {
    std::size_t best = 0;
    float best_dist = std::numeric_limits<float>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
        const float dist = squared_l2(cents + c * d, x, d);
        if (dist < best_dist) {
            best_dist = dist;
            best = c;
        }
    }
    if (dist_out != nullptr) {
        *dist_out = best_dist;
    }
    return best;
}

// Forgy: k distinct row indices by partial Fisher-Yates.
std::vector<std::size_t> sample_distinct(std::size_t n,
                                         std::size_t k,
                                         std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.next_below(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

} // namespace

std::size_t assign(const VectorSet& centroids, std::span<const float> x) {
    if (x.size() != centroids.d) {
        throw ArgumentError("assign: dimension mismatch (centroids d=" +
                            std::to_string(centroids.d) + ", x d=" +
                            std::to_string(x.size()) + ")");
    }
    if (centroids.n == 0) {
        throw ArgumentError("assign: empty centroid set");
    }
    return nearest(centroids.data.data(), centroids.n, centroids.d, x.data());
}

VectorSet kmeans(const VectorSet& data,
                 const KMeansParams& params,
                 std::vector<double>* objective_trace) {
    if (params.k < 1 || params.iters < 1) {
        throw ArgumentError("kmeans requires k >= 1 and iters >= 1");
    }
    if (data.n < params.k) {
        throw ArgumentError("kmeans requires n >= k (n=" +
                            std::to_string(data.n) + ", k=" +
                            std::to_string(params.k) + ")");
    }
    const std::size_t k = params.k;
    const std::size_t d = data.d;

    VectorSet cents(k, d);
    {
        const auto seeds = sample_distinct(data.n, k, params.seed);
        for (std::size_t c = 0; c < k; ++c) {
            std::copy_n(data.row(seeds[c]), d, cents.row(c));
        }
    }
    if (objective_trace != nullptr) {
        objective_trace->clear();
    }

    std::vector<std::size_t> labels(data.n);
    std::vector<float> point_dist(data.n);
    std::vector<double> sums(k * d);
    std::vector<std::size_t> counts(k);

    for (std::size_t iter = 0; iter < params.iters; ++iter) {
        // Assignment against the current centroids; the objective uses
        // 64-bit accumulation to keep the monotonicity check stable.
        double objective = 0.0;
        for (std::size_t i = 0; i < data.n; ++i) {
            labels[i] = nearest(cents.data.data(), k, d, data.row(i),
                                &point_dist[i]);
            objective += static_cast<double>(point_dist[i]);
        }
        if (objective_trace != nullptr) {
            objective_trace->push_back(objective);
        }

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < data.n; ++i) {
            double* s = sums.data() + labels[i] * d;
            const float* x = data.row(i);
            for (std::size_t j = 0; j < d; ++j) {
                s[j] += static_cast<double>(x[j]);
            }
            ++counts[labels[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                continue; // repaired below
            }
            float* out = cents.row(c);
            const double inv = 1.0 / static_cast<double>(counts[c]);
            for (std::size_t j = 0; j < d; ++j) {
                out[j] = static_cast<float>(sums[c * d + j] * inv);
            }
        }

        // Empty-cluster repair: park the empty centroid on the point
        // farthest from its assigned centroid. Claimed points are excluded
        // so two empty clusters cannot grab the same donor.
        std::vector<bool> claimed(data.n, false);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) {
                continue;
            }
            std::size_t donor = data.n;
            float worst = -1.0f;
            for (std::size_t i = 0; i < data.n; ++i) {
                if (!claimed[i] && counts[labels[i]] > 1 &&
                    point_dist[i] > worst) {
                    worst = point_dist[i];
                    donor = i;
                }
            }
            if (donor == data.n) {
                continue; // fewer distinct points than clusters
            }
            claimed[donor] = true;
            std::copy_n(data.row(donor), d, cents.row(c));
            --counts[labels[donor]];
            counts[c] = 1;
        }
    }
    return cents;
}

} // namespace nibblescan
