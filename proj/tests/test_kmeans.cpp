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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "nibblescan/errors.hpp"
#include "nibblescan/kmeans.hpp"
#include "nibblescan/rng.hpp"
#include "test_util.hpp"

using namespace nibblescan;

namespace {

double objective_of(const VectorSet& data, const VectorSet& cents) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        float best = std::numeric_limits<float>::infinity();
        for (std::size_t c = 0; c < cents.n; ++c) {
            best = std::min(best, squared_l2(cents.row(c), data.row(i),
                                             data.d));
        }
        total += static_cast<double>(best);
    }
    return total;
}

} // namespace

TEST_CASE("kmeans with k distinct points is a fixed point") {
    VectorSet data(3, 2);
    data.data = {0.0f, 0.0f, 5.0f, 0.0f, 0.0f, 5.0f};
    const VectorSet cents = kmeans(data, {3, 10, 1});
    REQUIRE(cents.n == 3);

    std::set<std::pair<float, float>> want = {{0, 0}, {5, 0}, {0, 5}};
    std::set<std::pair<float, float>> got;
    for (std::size_t c = 0; c < 3; ++c) {
        got.insert({cents.row(c)[0], cents.row(c)[1]});
    }
    CHECK(got == want);
    CHECK(objective_of(data, cents) == 0.0);
}

TEST_CASE("kmeans with identical points and k=1") {
    VectorSet data(10, 3);
    for (std::size_t i = 0; i < 10; ++i) {
        data.row(i)[0] = 2.5f;
        data.row(i)[1] = -1.0f;
        data.row(i)[2] = 0.25f;
    }
    const VectorSet cents = kmeans(data, {1, 5, 9});
    CHECK(cents.row(0)[0] == 2.5f);
    CHECK(cents.row(0)[1] == -1.0f);
    CHECK(cents.row(0)[2] == 0.25f);
}

TEST_CASE("kmeans recovers well-separated blobs") {
    // Two clouds around (0,0) and (10,10), sigma 0.5.
    SplitMix64 rng(123);
    const std::size_t per_blob = 250;
    VectorSet data(2 * per_blob, 2);
    double blob_mean[2][2] = {};
    for (std::size_t i = 0; i < 2 * per_blob; ++i) {
        const int blob = i < per_blob ? 0 : 1;
        const double cx = blob == 0 ? 0.0 : 10.0;
        for (std::size_t j = 0; j < 2; ++j) {
            const double v = cx + 0.5 * rng.next_gaussian();
            data.row(i)[j] = static_cast<float>(v);
            blob_mean[blob][j] += v;
        }
    }
    for (auto& bm : blob_mean) {
        bm[0] /= per_blob;
        bm[1] /= per_blob;
    }

    const VectorSet cents = kmeans(data, {2, 25, 4});
    // match each blob mean to its nearest centroid; 3 sigma = 1.5, and the
    // sample mean is only sigma/sqrt(250) off.
    for (const auto& bm : blob_mean) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < 2; ++c) {
            const double dx = cents.row(c)[0] - bm[0];
            const double dy = cents.row(c)[1] - bm[1];
            best = std::min(best, std::sqrt(dx * dx + dy * dy));
        }
        CHECK(best < 1.5);
    }
}

TEST_CASE("kmeans objective is non-increasing") {
    const VectorSet data = test::random_vectors(400, 6, 55);
    std::vector<double> trace;
    kmeans(data, {8, 15, 3}, &trace);
    REQUIRE(trace.size() == 15);
    for (std::size_t t = 1; t < trace.size(); ++t) {
        CHECK(trace[t] <= trace[t - 1] * (1.0 + 1e-4));
    }
}

TEST_CASE("kmeans leaves no empty cluster") {
    // k close to n with duplicate-heavy data forces the repair path.
    SplitMix64 rng(8);
    VectorSet data(64, 2);
    for (std::size_t i = 0; i < data.n; ++i) {
        const double v = static_cast<double>(rng.next_below(6));
        data.row(i)[0] = static_cast<float>(v);
        data.row(i)[1] = static_cast<float>(v * 0.5);
    }
    const KMeansParams params{6, 10, 2};
    const VectorSet cents = kmeans(data, params);
    std::vector<std::size_t> count(params.k, 0);
    for (std::size_t i = 0; i < data.n; ++i) {
        ++count[assign(cents, data.vec(i))];
    }
    for (std::size_t c = 0; c < params.k; ++c) {
        CHECK(count[c] > 0);
    }
}

TEST_CASE("kmeans is deterministic and validates arguments") {
    const VectorSet data = test::random_vectors(50, 4, 77);
    const VectorSet a = kmeans(data, {5, 10, 42});
    const VectorSet b = kmeans(data, {5, 10, 42});
    CHECK(a.data == b.data);

    CHECK_THROWS_AS(kmeans(data, {51, 10, 0}), ArgumentError);
    CHECK_THROWS_AS(kmeans(data, {0, 10, 0}), ArgumentError);
}

TEST_CASE("assign basics") {
    VectorSet cents(4, 1);
    cents.data = {0.0f, 10.0f, 20.0f, 30.0f};

    float x0[1] = {4.0f};
    VectorSet two(2, 1);
    two.data = {0.0f, 10.0f};
    CHECK(assign(two, std::span<const float>(x0, 1)) == 0);

    float x3[1] = {30.0f};
    CHECK(assign(cents, std::span<const float>(x3, 1)) == 3);

    float bad[2] = {0.0f, 0.0f};
    CHECK_THROWS_AS(assign(cents, std::span<const float>(bad, 2)),
                    ArgumentError);
}

TEST_CASE("assign matches an exhaustive scalar loop") {
    const VectorSet cents = test::random_vectors(17, 5, 91);
    const VectorSet xs = test::random_vectors(40, 5, 92);
    for (std::size_t i = 0; i < xs.n; ++i) {
        std::size_t best = 0;
        float best_dist = std::numeric_limits<float>::infinity();
        for (std::size_t c = 0; c < cents.n; ++c) {
            float acc = 0.0f;
            for (std::size_t j = 0; j < cents.d; ++j) {
                const float diff = cents.row(c)[j] - xs.row(i)[j];
                acc += diff * diff;
            }
            if (acc < best_dist) {
                best_dist = acc;
                best = c;
            }
        }
        CHECK(assign(cents, xs.vec(i)) == best);
    }
}

TEST_CASE("assign is invariant under positive scaling") {
    const VectorSet cents = test::random_vectors(9, 3, 13);
    const VectorSet xs = test::random_vectors(25, 3, 14);
    SplitMix64 rng(15);
    for (std::size_t i = 0; i < xs.n; ++i) {
        const float lambda = static_cast<float>(0.1 + 5.0 * rng.next_double());
        VectorSet scaled_cents = cents;
        for (auto& v : scaled_cents.data) {
            v *= lambda;
        }
        std::vector<float> scaled_x(xs.row(i), xs.row(i) + xs.d);
        for (auto& v : scaled_x) {
            v *= lambda;
        }
        CHECK(assign(cents, xs.vec(i)) ==
              assign(scaled_cents, std::span<const float>(scaled_x)));
    }
}
