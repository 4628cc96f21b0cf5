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

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "nibblescan/dataset.hpp"
#include "nibblescan/errors.hpp"
#include "nibblescan/rng.hpp"
#include "test_util.hpp"

using namespace nibblescan;
using test::TempFile;

namespace {

void write_raw(const std::filesystem::path& path,
               const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

template <typename T>
void append_le(std::vector<std::uint8_t>& buf, T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    buf.insert(buf.end(), p, p + sizeof(T));
}

} // namespace

TEST_CASE("read_fvecs parses records") {
    TempFile f(".fvecs");
    std::vector<std::uint8_t> bytes;
    append_le<std::int32_t>(bytes, 2);
    append_le<float>(bytes, 1.0f);
    append_le<float>(bytes, 2.0f);
    append_le<std::int32_t>(bytes, 2);
    append_le<float>(bytes, 3.0f);
    append_le<float>(bytes, 4.0f);
    write_raw(f.path(), bytes);

    const VectorSet vs = read_fvecs(f.path());
    CHECK(vs.n == 2);
    CHECK(vs.d == 2);
    CHECK(vs.data == std::vector<float>{1.0f, 2.0f, 3.0f, 4.0f});
}

TEST_CASE("read_fvecs on empty file gives empty set") {
    TempFile f(".fvecs");
    write_raw(f.path(), {});
    const VectorSet vs = read_fvecs(f.path());
    CHECK(vs.n == 0);
    CHECK(vs.d == 0);
}

TEST_CASE("fvecs round trip is bit-exact") {
    TempFile f(".fvecs");
    const VectorSet vs = test::random_vectors(10, 7, 123, -5.0, 5.0);
    write_fvecs(f.path(), vs);
    const VectorSet back = read_fvecs(f.path());
    REQUIRE(back.n == vs.n);
    REQUIRE(back.d == vs.d);
    CHECK(std::memcmp(back.data.data(), vs.data.data(),
                      vs.data.size() * sizeof(float)) == 0);
}

TEST_CASE("read_fvecs rejects malformed files") {
    SUBCASE("truncated payload reports the offset") {
        TempFile f(".fvecs");
        std::vector<std::uint8_t> bytes;
        append_le<std::int32_t>(bytes, 3);
        append_le<float>(bytes, 1.0f); // 2 floats missing
        write_raw(f.path(), bytes);
        CHECK_THROWS_AS(read_fvecs(f.path()), FormatError);
        try {
            read_fvecs(f.path());
        } catch (const FormatError& e) {
            CHECK(e.offset() == 8);
        }
    }
    SUBCASE("inconsistent dimension") {
        TempFile f(".fvecs");
        std::vector<std::uint8_t> bytes;
        append_le<std::int32_t>(bytes, 1);
        append_le<float>(bytes, 1.0f);
        append_le<std::int32_t>(bytes, 2);
        append_le<float>(bytes, 1.0f);
        append_le<float>(bytes, 2.0f);
        write_raw(f.path(), bytes);
        CHECK_THROWS_AS(read_fvecs(f.path()), FormatError);
    }
    SUBCASE("non-positive dimension") {
        TempFile f(".fvecs");
        std::vector<std::uint8_t> bytes;
        append_le<std::int32_t>(bytes, 0);
        write_raw(f.path(), bytes);
        CHECK_THROWS_AS(read_fvecs(f.path()), FormatError);
    }
    SUBCASE("non-finite value") {
        TempFile f(".fvecs");
        std::vector<std::uint8_t> bytes;
        append_le<std::int32_t>(bytes, 1);
        append_le<float>(bytes, std::numeric_limits<float>::quiet_NaN());
        write_raw(f.path(), bytes);
        CHECK_THROWS_AS(read_fvecs(f.path()), FormatError);
    }
}

TEST_CASE("read_ivecs parses records") {
    TempFile f(".ivecs");
    std::vector<std::uint8_t> bytes;
    append_le<std::int32_t>(bytes, 3);
    append_le<std::int32_t>(bytes, 7);
    append_le<std::int32_t>(bytes, 1);
    append_le<std::int32_t>(bytes, 9);
    write_raw(f.path(), bytes);
    const IntMatrix m = read_ivecs(f.path());
    REQUIRE(m.n == 1);
    REQUIRE(m.d == 3);
    CHECK(m.values == std::vector<std::int32_t>{7, 1, 9});
}

TEST_CASE("ivecs round trip") {
    TempFile f(".ivecs");
    SplitMix64 rng(99);
    IntMatrix m;
    m.n = 20;
    m.d = 5;
    m.values.resize(m.n * m.d);
    for (auto& v : m.values) {
        v = static_cast<std::int32_t>(rng.next());
    }
    write_ivecs(f.path(), m);
    const IntMatrix back = read_ivecs(f.path());
    CHECK(back.n == m.n);
    CHECK(back.d == m.d);
    CHECK(back.values == m.values);
}

TEST_CASE("read_bvecs widens bytes to float") {
    TempFile f(".bvecs");
    std::vector<std::uint8_t> bytes;
    append_le<std::int32_t>(bytes, 2);
    bytes.push_back(0);
    bytes.push_back(255);
    write_raw(f.path(), bytes);
    const VectorSet vs = read_bvecs(f.path());
    REQUIRE(vs.n == 1);
    REQUIRE(vs.d == 2);
    CHECK(vs.data == std::vector<float>{0.0f, 255.0f});
}

TEST_CASE("bvecs round trip and validation") {
    TempFile f(".bvecs");
    SplitMix64 rng(7);
    VectorSet vs(12, 4);
    for (auto& v : vs.data) {
        v = static_cast<float>(rng.next_below(256));
    }
    write_bvecs(f.path(), vs);
    const VectorSet back = read_bvecs(f.path());
    CHECK(back.data == vs.data);

    VectorSet bad(1, 1);
    bad.data[0] = 0.5f;
    CHECK_THROWS_AS(write_bvecs(f.path(), bad), ArgumentError);
}

TEST_CASE("gen_synthetic is deterministic and well-shaped") {
    const VectorSet a = gen_synthetic(10, 4, 1, 42);
    const VectorSet b = gen_synthetic(10, 4, 1, 42);
    CHECK(a.data == b.data);

    const VectorSet c = gen_synthetic(1000, 8, 10, 7);
    CHECK(c.n == 1000);
    CHECK(c.d == 8);
    for (const float v : c.data) {
        CHECK(std::isfinite(v));
    }

    CHECK_THROWS_AS(gen_synthetic(0, 4, 1, 0), ArgumentError);
    CHECK_THROWS_AS(gen_synthetic(4, 0, 1, 0), ArgumentError);
    CHECK_THROWS_AS(gen_synthetic(4, 2, 5, 0), ArgumentError);
}

TEST_CASE("gen_synthetic noise std is close to 0.05") {
    const std::size_t n = 10000;
    const std::size_t d = 8;
    const std::size_t clusters = 10;
    const VectorSet vs = gen_synthetic(n, d, clusters, 3);

    // Points are assigned round-robin, so cluster of point i is i mod
    // clusters; estimate each center by the cluster mean and pool the
    // per-coordinate deviations.
    std::vector<double> mean(clusters * d, 0.0);
    std::vector<std::size_t> count(clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % clusters;
        for (std::size_t j = 0; j < d; ++j) {
            mean[c * d + j] += vs.row(i)[j];
        }
        ++count[c];
    }
    for (std::size_t c = 0; c < clusters; ++c) {
        for (std::size_t j = 0; j < d; ++j) {
            mean[c * d + j] /= static_cast<double>(count[c]);
        }
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % clusters;
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = vs.row(i)[j] - mean[c * d + j];
            ss += dev * dev;
        }
    }
    const double std_est = std::sqrt(ss / static_cast<double>(n * d));
    CHECK(std_est > 0.05 * 0.8);
    CHECK(std_est < 0.05 * 1.2);
}

TEST_CASE("gen_synthetic prefix stability") {
    // The first n rows of a larger draw equal the n-row draw, which is what
    // lets one seed produce a base/query split sharing cluster centers.
    const VectorSet small = gen_synthetic(50, 6, 5, 11);
    const VectorSet big = gen_synthetic(80, 6, 5, 11);
    CHECK(std::equal(small.data.begin(), small.data.end(), big.data.begin()));
}

TEST_CASE("ground_truth basics") {
    VectorSet base(2, 2);
    base.data = {0.0f, 0.0f, 1.0f, 1.0f};
    VectorSet q(1, 2);
    q.data = {0.1f, 0.1f};
    const GroundTruth gt = ground_truth(base, q, 1);
    CHECK(gt.ids == std::vector<std::int32_t>{0});

    // query equal to a base vector
    VectorSet q2(1, 2);
    q2.data = {1.0f, 1.0f};
    const GroundTruth gt2 = ground_truth(base, q2, 2);
    CHECK(gt2.ids[0] == 1);

    VectorSet qbad(1, 3);
    CHECK_THROWS_AS(ground_truth(base, qbad, 1), ArgumentError);
    CHECK_THROWS_AS(ground_truth(base, q, 3), ArgumentError);
}

TEST_CASE("ground_truth matches brute force") {
    const VectorSet base = test::random_vectors(100, 8, 17);
    const VectorSet queries = test::random_vectors(10, 8, 18);
    const std::size_t k = 5;
    const GroundTruth gt = ground_truth(base, queries, k);

    for (std::size_t q = 0; q < queries.n; ++q) {
        std::vector<std::pair<double, std::int32_t>> all;
        for (std::size_t i = 0; i < base.n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < base.d; ++j) {
                const double diff = static_cast<double>(queries.row(q)[j]) -
                                    static_cast<double>(base.row(i)[j]);
                acc += diff * diff;
            }
            all.emplace_back(acc, static_cast<std::int32_t>(i));
        }
        std::sort(all.begin(), all.end());
        for (std::size_t j = 0; j < k; ++j) {
            CHECK(gt.row(q)[j] == all[j].second);
        }
    }
}

TEST_CASE("ground_truth rows have no duplicates") {
    const VectorSet base = test::random_vectors(60, 4, 21);
    const VectorSet queries = test::random_vectors(8, 4, 22);
    const GroundTruth gt = ground_truth(base, queries, 10);
    for (std::size_t q = 0; q < gt.nq; ++q) {
        std::set<std::int32_t> uniq(gt.row(q), gt.row(q) + gt.k);
        CHECK(uniq.size() == gt.k);
    }
}

TEST_CASE("ground_truth unaffected by a far-away vector") {
    VectorSet base = test::random_vectors(50, 4, 31);
    const VectorSet queries = test::random_vectors(5, 4, 32);
    const GroundTruth before = ground_truth(base, queries, 5);

    base.data.insert(base.data.end(), {1e6f, 1e6f, 1e6f, 1e6f});
    base.n += 1;
    const GroundTruth after = ground_truth(base, queries, 5);
    CHECK(before.ids == after.ids);
}
