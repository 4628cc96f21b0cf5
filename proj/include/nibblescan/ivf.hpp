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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "nibblescan/dataset.hpp"
#include "nibblescan/fastscan.hpp"
#include "nibblescan/pq.hpp"
#include "nibblescan/topk.hpp"

namespace nibblescan {

struct SearchParams {
    std::size_t nprobe = 1;
    std::size_t topk = 1;
};

/// Search-time selection of the lists to probe. The built-in behavior is an
/// exact linear scan over the coarse centroids; an approximate structure
/// (e.g. a graph index built over the centroids) plugs in here without
/// touching the rest of the search path. Implementations hold whatever
/// state they need; the index does not retain a reference to its own
/// centroids inside the quantizer.
class CoarseQuantizer {
  public:
    virtual ~CoarseQuantizer() = default;

    /// The nprobe nearest centroids, ascending (dist, id), ties toward the
    /// lower list index.
    virtual std::vector<Neighbor> nearest_lists(std::span<const float> q,
                                                std::size_t nprobe) const = 0;
};

/// Inverted index over coarse centroids with 4-bit PQ codes per list.
/// Vectors are PQ-encoded raw (no residual), so a single quantized table
/// serves every probed list and the table is built exactly once per query.
class IVFIndex {
  public:
    IVFIndex() = default;
    IVFIndex(VectorSet centroids, Codebook codebook);

    std::size_t nlist() const {
        return lists_.size();
    }
    std::size_t dim() const {
        return centroids_.d;
    }
    std::size_t ntotal() const {
        return ntotal_;
    }
    const VectorSet& centroids() const {
        return centroids_;
    }
    const Codebook& codebook() const {
        return codebook_;
    }
    const std::vector<std::int64_t>& list_ids(std::size_t i) const {
        return lists_[i].ids;
    }
    const PackedCodeBlocks& list_codes(std::size_t i) const {
        return lists_[i].packed;
    }

    /// Encodes and appends each vector to the list of its nearest centroid;
    /// vector i gets id base_id + i.
    void add(const VectorSet& xs, std::int64_t base_id);

    /// Coarse scan, probe the nprobe nearest lists, fast-scan each probed
    /// list with one shared quantized table, merge by (dist, id).
    std::vector<Neighbor> search(std::span<const float> q,
                                 const SearchParams& params) const;

    /// Replaces the exact coarse scan with a custom probe selector (pass
    /// nullptr to restore the exact scan).
    void set_coarse_quantizer(std::unique_ptr<CoarseQuantizer> cq) {
        coarse_override_ = std::move(cq);
    }

    /// All codes gathered into id order. Requires the stored ids to be
    /// exactly 0..ntotal-1 (the contiguous-add case).
    PQCodes flat_codes() const;

    void save(const std::filesystem::path& path) const;
    static IVFIndex load(const std::filesystem::path& path);

  private:
    struct InvList {
        std::vector<std::int64_t> ids;
        PackedCodeBlocks packed;
    };

    VectorSet centroids_;
    Codebook codebook_;
    std::vector<InvList> lists_;
    std::size_t ntotal_ = 0;
    std::unique_ptr<CoarseQuantizer> coarse_override_;
};

/// Trains coarse centroids (kmeans over the training set) and a K=16 PQ
/// codebook, returning an index with empty lists. Deterministic given seed.
IVFIndex train_ivf(const VectorSet& training,
                   std::size_t nlist,
                   std::size_t m,
                   std::uint64_t seed);

/// The sqrt(N) rule of thumb for choosing nlist.
inline std::size_t default_nlist(std::size_t n) {
    return std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(std::sqrt(
                       static_cast<double>(n)))));
}

} // namespace nibblescan
