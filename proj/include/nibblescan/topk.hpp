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

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

namespace nibblescan {

struct Neighbor {
    std::int64_t id = -1;
    float dist = 0.0f;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Ascending (dist, id) order; the tie rule used by every ranked result in
/// the library.
inline bool closer(const Neighbor& a, const Neighbor& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.id < b.id);
}

/// Bounded max-heap keeping the k closest (dist, id) pairs seen so far.
/// O(log k) per push once full; ties resolve toward the lower id.
class TopK {
  public:
    explicit TopK(std::size_t k) : k_(k) {
        heap_.reserve(k);
    }

    void push(std::int64_t id, float dist) {
        const Neighbor cand{id, dist};
        if (heap_.size() < k_) {
            heap_.push_back(cand);
            std::push_heap(heap_.begin(), heap_.end(), closer);
        } else if (k_ > 0 && closer(cand, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), closer);
            heap_.back() = cand;
            std::push_heap(heap_.begin(), heap_.end(), closer);
        }
    }

    /// Largest kept distance, or +inf while the heap is filling. Anything
    /// strictly above it cannot enter; equal distances still can (lower id
    /// wins), so prefilters must compare with <=.
    float worst_dist() const {
        return heap_.size() < k_ ? std::numeric_limits<float>::infinity()
                                 : heap_.front().dist;
    }

    /// Drains the heap, ascending (dist, id).
    std::vector<Neighbor> take_sorted() {
        std::sort(heap_.begin(), heap_.end(), closer);
        return std::move(heap_);
    }

  private:
    std::size_t k_;
    std::vector<Neighbor> heap_;
};

} // namespace nibblescan
