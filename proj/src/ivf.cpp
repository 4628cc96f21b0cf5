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

#include "nibblescan/ivf.hpp"

#include <algorithm>
#include <cstring>

#include "nibblescan/errors.hpp"
#include "nibblescan/kmeans.hpp"
#include "nibblescan/rng.hpp"
#include "binary_io.hpp"

namespace nibblescan {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'P', 'Q', 'F', 'S'};
constexpr std::uint32_t kFormatVersion = 1;

std::vector<Neighbor> exact_nearest_lists(const VectorSet& centroids,
                                          std::span<const float> q,
                                          std::size_t nprobe) {
    TopK heap(nprobe);
    for (std::size_t i = 0; i < centroids.n; ++i) {
        heap.push(static_cast<std::int64_t>(i),
                  squared_l2(centroids.row(i), q.data(), centroids.d));
    }
    return heap.take_sorted();
}

} // namespace

IVFIndex::IVFIndex(VectorSet centroids, Codebook codebook)
        : centroids_(std::move(centroids)), codebook_(std::move(codebook)) {
    if (centroids_.d != codebook_.dim()) {
        throw ArgumentError("IVFIndex: centroid dimension " +
                            std::to_string(centroids_.d) +
                            " does not match codebook dimension " +
                            std::to_string(codebook_.dim()));
    }
    if (codebook_.k != 16) {
        throw ArgumentError("IVFIndex stores 4-bit codes and requires k == 16");
    }
    lists_.resize(centroids_.n);
    for (auto& list : lists_) {
        list.packed.m = codebook_.m;
    }
}

void IVFIndex::add(const VectorSet& xs, std::int64_t base_id) {
    if (xs.d != dim()) {
        throw ArgumentError("add: vector dimension " + std::to_string(xs.d) +
                            " does not match index dimension " +
                            std::to_string(dim()));
    }
    for (std::size_t i = 0; i < xs.n; ++i) {
        const std::size_t list = assign(centroids_, xs.vec(i));
        const auto code_row = encode(codebook_, xs.vec(i));
        lists_[list].ids.push_back(base_id + static_cast<std::int64_t>(i));
        lists_[list].packed.append(code_row);
    }
    ntotal_ += xs.n;
}

std::vector<Neighbor> IVFIndex::search(std::span<const float> q,
                                       const SearchParams& params) const {
    if (q.size() != dim()) {
        throw ArgumentError("search: query dimension " +
                            std::to_string(q.size()) +
                            " does not match index dimension " +
                            std::to_string(dim()));
    }
    if (params.nprobe < 1 || params.nprobe > nlist()) {
        throw ArgumentError("search requires 1 <= nprobe <= nlist");
    }
    if (params.topk < 1) {
        throw ArgumentError("search requires topk >= 1");
    }

    const auto probes = coarse_override_ != nullptr
                                ? coarse_override_->nearest_lists(
                                          q, params.nprobe)
                                : exact_nearest_lists(centroids_, q,
                                                      params.nprobe);

    // Raw (non-residual) encoding: one table serves every probed list, so
    // build and quantize exactly once per query.
    const FloatLUT lut = build_lut(codebook_, q);
    const QuantizedLUT qlut = quantize_lut(lut);

    TopK heap(params.topk);
    for (const Neighbor& probe : probes) {
        const InvList& list = lists_[static_cast<std::size_t>(probe.id)];
        scan_packed_into(qlut, list.packed, list.ids.data(), heap);
    }
    return heap.take_sorted();
}

PQCodes IVFIndex::flat_codes() const {
    PQCodes out;
    out.n = ntotal_;
    out.m = codebook_.m;
    out.codes.resize(ntotal_ * codebook_.m);
    std::vector<bool> seen(ntotal_, false);
    for (const InvList& list : lists_) {
        for (std::size_t i = 0; i < list.ids.size(); ++i) {
            const std::int64_t id = list.ids[i];
            if (id < 0 || static_cast<std::size_t>(id) >= ntotal_ ||
                seen[static_cast<std::size_t>(id)]) {
                throw ArgumentError(
                        "flat_codes requires contiguous ids 0..ntotal-1");
            }
            seen[static_cast<std::size_t>(id)] = true;
            for (std::size_t sub = 0; sub < codebook_.m; ++sub) {
                out.codes[static_cast<std::size_t>(id) * codebook_.m + sub] =
                        list.packed.code_at(i, sub);
            }
        }
    }
    return out;
}

void IVFIndex::save(const std::filesystem::path& path) const {
    detail::Writer w;
    w.put_bytes(kMagic.data(), kMagic.size());
    w.put<std::uint32_t>(kFormatVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(dim()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(codebook_.m));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(codebook_.k));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(nlist()));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(ntotal_));
    w.put_array(centroids_.data.data(), centroids_.data.size());
    w.put_array(codebook_.centroids.data(), codebook_.centroids.size());
    for (const InvList& list : lists_) {
        w.put<std::uint64_t>(static_cast<std::uint64_t>(list.ids.size()));
        w.put_array(list.ids.data(), list.ids.size());
        w.put_bytes(list.packed.bytes.data(), list.packed.bytes.size());
    }
    detail::write_file(path, w.bytes());
}

IVFIndex IVFIndex::load(const std::filesystem::path& path) {
    const auto buf = detail::read_file(path);
    detail::Reader r(buf.data(), buf.size());

    std::array<std::uint8_t, 4> magic{};
    r.get_bytes(magic.data(), magic.size(), "magic");
    if (magic != kMagic) {
        throw FormatError("bad magic: not an index file", 0);
    }
    const auto version = r.get<std::uint32_t>("version");
    if (version != kFormatVersion) {
        throw FormatError("unsupported format version " +
                                  std::to_string(version),
                          4);
    }
    const auto d = r.get<std::uint32_t>("header");
    const auto m = r.get<std::uint32_t>("header");
    const auto k = r.get<std::uint32_t>("header");
    const auto nlist = r.get<std::uint32_t>("header");
    const auto ntotal = r.get<std::uint64_t>("header");
    if (d == 0 || m == 0 || k != 16 || d % m != 0) {
        throw FormatError("invalid header fields (d=" + std::to_string(d) +
                                  ", m=" + std::to_string(m) + ", k=" +
                                  std::to_string(k) + ")",
                          8);
    }

    VectorSet centroids(nlist, d);
    r.get_array(centroids.data.data(), centroids.data.size(), "centroids");

    Codebook cb;
    cb.m = m;
    cb.k = k;
    cb.dsub = d / m;
    cb.centroids.resize(static_cast<std::size_t>(m) * k * cb.dsub);
    r.get_array(cb.centroids.data(), cb.centroids.size(), "codebook");

    IVFIndex index(std::move(centroids), std::move(cb));
    std::uint64_t total = 0;
    for (std::uint32_t i = 0; i < nlist; ++i) {
        const std::size_t count_at = r.offset();
        const auto count = r.get<std::uint64_t>("list header");
        if (count > r.remaining() / sizeof(std::int64_t)) {
            throw FormatError("list size " + std::to_string(count) +
                                      " exceeds remaining file data",
                              count_at);
        }
        InvList& list = index.lists_[i];
        list.ids.resize(count);
        r.get_array(list.ids.data(), count, "list ids");
        list.packed.n = count;
        list.packed.bytes.resize(list.packed.block_count() *
                                 list.packed.block_stride());
        r.get_bytes(list.packed.bytes.data(), list.packed.bytes.size(),
                    "list codes");
        total += count;
    }
    if (!r.at_end()) {
        throw FormatError("trailing bytes after index data", r.offset());
    }
    if (total != ntotal) {
        throw FormatError("list sizes sum to " + std::to_string(total) +
                                  " but header claims " +
                                  std::to_string(ntotal),
                          16);
    }
    index.ntotal_ = total;
    return index;
}

IVFIndex train_ivf(const VectorSet& training,
                   std::size_t nlist,
                   std::size_t m,
                   std::uint64_t seed) {
    if (nlist < 1 || training.n < nlist) {
        throw ArgumentError("train_ivf requires 1 <= nlist <= n");
    }
    VectorSet centroids =
            kmeans(training, {nlist, 25, mix_seed(seed, 0)});
    Codebook cb = train_pq(training, m, 16, mix_seed(seed, 1));
    return IVFIndex(std::move(centroids), std::move(cb));
}

} // namespace nibblescan
