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
#include <cstdio>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include "nibblescan/dataset.hpp"
#include "nibblescan/pq.hpp"
#include "nibblescan/rng.hpp"

namespace nibblescan::test {

/// Unique temp path; removed on destruction.
class TempFile {
  public:
    explicit TempFile(const std::string& suffix = ".bin") {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("nibblescan_test_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++) + suffix);
    }
    ~TempFile() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    const std::filesystem::path& path() const {
        return path_;
    }
    std::string str() const {
        return path_.string();
    }

  private:
    std::filesystem::path path_;
};

inline VectorSet random_vectors(std::size_t n,
                                std::size_t d,
                                std::uint64_t seed,
                                double lo = 0.0,
                                double hi = 1.0) {
    SplitMix64 rng(seed);
    VectorSet vs(n, d);
    for (auto& v : vs.data) {
        v = static_cast<float>(lo + (hi - lo) * rng.next_double());
    }
    return vs;
}

inline PQCodes random_codes(std::size_t n,
                            std::size_t m,
                            std::size_t k,
                            std::uint64_t seed) {
    SplitMix64 rng(seed);
    PQCodes codes;
    codes.n = n;
    codes.m = m;
    codes.codes.resize(n * m);
    for (auto& c : codes.codes) {
        c = static_cast<std::uint8_t>(rng.next_below(k));
    }
    return codes;
}

} // namespace nibblescan::test
