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

#include "nibblescan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "nibblescan/errors.hpp"
#include "nibblescan/rng.hpp"
#include "binary_io.hpp"

namespace nibblescan {

namespace {

// Shared record-stream parser for the *vecs family. PayloadReader pulls one
// payload element from the reader and appends it to the output vector.
template <typename Out, typename PayloadReader>
std::pair<std::size_t, std::size_t> parse_vecs(detail::Reader& r,
                                               std::vector<Out>& out,
                                               PayloadReader read_one) {
    std::size_t n = 0;
    std::size_t d = 0;
    while (!r.at_end()) {
        const std::size_t record_start = r.offset();
        const auto dim = r.get<std::int32_t>("record header");
        if (dim <= 0) {
            throw FormatError("record dimension must be positive, got " +
                                      std::to_string(dim),
                              record_start);
        }
        if (n == 0) {
            d = static_cast<std::size_t>(dim);
        } else if (static_cast<std::size_t>(dim) != d) {
            throw FormatError("inconsistent record dimension: expected " +
                                      std::to_string(d) + ", got " +
                                      std::to_string(dim),
                              record_start);
        }
        for (std::size_t i = 0; i < d; ++i) {
            read_one(r, out);
        }
        ++n;
    }
    return {n, d};
}

} // namespace

VectorSet read_fvecs(const std::filesystem::path& path) {
    const auto buf = detail::read_file(path);
    detail::Reader r(buf.data(), buf.size());
    VectorSet vs;
    auto [n, d] = parse_vecs(r, vs.data,
                             [](detail::Reader& rr, std::vector<float>& out) {
                                 const std::size_t at = rr.offset();
                                 const auto v = rr.get<float>("record payload");
                                 if (!std::isfinite(v)) {
                                     throw FormatError("non-finite value", at);
                                 }
                                 out.push_back(v);
                             });
    vs.n = n;
    vs.d = d;
    return vs;
}

IntMatrix read_ivecs(const std::filesystem::path& path) {
    const auto buf = detail::read_file(path);
    detail::Reader r(buf.data(), buf.size());
    IntMatrix m;
    auto [n, d] =
            parse_vecs(r, m.values,
                       [](detail::Reader& rr, std::vector<std::int32_t>& out) {
                           out.push_back(rr.get<std::int32_t>("record payload"));
                       });
    m.n = n;
    m.d = d;
    return m;
}

VectorSet read_bvecs(const std::filesystem::path& path) {
    const auto buf = detail::read_file(path);
    detail::Reader r(buf.data(), buf.size());
    VectorSet vs;
    auto [n, d] = parse_vecs(r, vs.data,
                             [](detail::Reader& rr, std::vector<float>& out) {
                                 const auto v =
                                         rr.get<std::uint8_t>("record payload");
                                 out.push_back(static_cast<float>(v));
                             });
    vs.n = n;
    vs.d = d;
    return vs;
}

void write_fvecs(const std::filesystem::path& path, const VectorSet& vs) {
    if (vs.n > 0 && vs.d == 0) {
        throw ArgumentError("cannot write vectors of dimension 0");
    }
    detail::Writer w;
    for (std::size_t i = 0; i < vs.n; ++i) {
        w.put(static_cast<std::int32_t>(vs.d));
        w.put_array(vs.row(i), vs.d);
    }
    detail::write_file(path, w.bytes());
}

void write_ivecs(const std::filesystem::path& path, const IntMatrix& m) {
    if (m.n > 0 && m.d == 0) {
        throw ArgumentError("cannot write rows of dimension 0");
    }
    detail::Writer w;
    for (std::size_t i = 0; i < m.n; ++i) {
        w.put(static_cast<std::int32_t>(m.d));
        w.put_array(m.row(i), m.d);
    }
    detail::write_file(path, w.bytes());
}

void write_bvecs(const std::filesystem::path& path, const VectorSet& vs) {
    if (vs.n > 0 && vs.d == 0) {
        throw ArgumentError("cannot write vectors of dimension 0");
    }
    detail::Writer w;
    for (std::size_t i = 0; i < vs.n; ++i) {
        w.put(static_cast<std::int32_t>(vs.d));
        for (std::size_t j = 0; j < vs.d; ++j) {
            const float v = vs.row(i)[j];
            if (!(v >= 0.0f && v <= 255.0f) || v != std::floor(v)) {
                throw ArgumentError(
                        "bvecs values must be integers in [0, 255], got " +
                        std::to_string(v));
            }
            w.put(static_cast<std::uint8_t>(v));
        }
    }
    detail::write_file(path, w.bytes());
}

VectorSet gen_synthetic(std::size_t n,
                        std::size_t d,
                        std::size_t n_clusters,
                        std::uint64_t seed) {
    if (n < 1 || d < 1) {
        throw ArgumentError("gen_synthetic requires n >= 1 and d >= 1");
    }
    if (n_clusters < 1 || n_clusters > n) {
        throw ArgumentError("gen_synthetic requires 1 <= n_clusters <= n");
    }
    SplitMix64 rng(seed);
    std::vector<double> centers(n_clusters * d);
    for (auto& c : centers) {
        c = rng.next_double();
    }
    VectorSet vs(n, d);
    constexpr double kSigma = 0.05;
    for (std::size_t i = 0; i < n; ++i) {
        const double* center = centers.data() + (i % n_clusters) * d;
        float* out = vs.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            out[j] = static_cast<float>(center[j] +
                                        kSigma * rng.next_gaussian());
        }
    }
    return vs;
}

GroundTruth ground_truth(const VectorSet& base,
                         const VectorSet& queries,
                         std::size_t k) {
    if (base.d != queries.d) {
        throw ArgumentError("ground_truth: dimension mismatch (base d=" +
                            std::to_string(base.d) + ", queries d=" +
                            std::to_string(queries.d) + ")");
    }
    if (k < 1 || k > base.n) {
        throw ArgumentError("ground_truth requires 1 <= k <= base.n");
    }
    GroundTruth gt;
    gt.nq = queries.n;
    gt.k = k;
    gt.ids.resize(queries.n * k);

    std::vector<std::pair<double, std::int32_t>> dists(base.n);
    for (std::size_t q = 0; q < queries.n; ++q) {
        const float* qp = queries.row(q);
        for (std::size_t i = 0; i < base.n; ++i) {
            const float* bp = base.row(i);
            double acc = 0.0;
            for (std::size_t j = 0; j < base.d; ++j) {
                const double diff = static_cast<double>(qp[j]) -
                                    static_cast<double>(bp[j]);
                acc += diff * diff;
            }
            dists[i] = {acc, static_cast<std::int32_t>(i)};
        }
        std::partial_sort(dists.begin(), dists.begin() + k, dists.end());
        for (std::size_t j = 0; j < k; ++j) {
            gt.ids[q * k + j] = dists[j].second;
        }
    }
    return gt;
}

} // namespace nibblescan
