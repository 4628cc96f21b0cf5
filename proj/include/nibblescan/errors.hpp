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
#include <stdexcept>
#include <string>

namespace nibblescan {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument or precondition violation (maps to CLI exit code 1).
class ArgumentError : public Error {
  public:
    explicit ArgumentError(const std::string& msg) : Error(msg) {}
};

/// Malformed file contents. Carries the byte offset where parsing failed
/// (maps to CLI exit code 2).
class FormatError : public Error {
  public:
    FormatError(const std::string& msg, std::uint64_t byte_offset)
            : Error(msg + " (at byte " + std::to_string(byte_offset) + ")"),
              offset_(byte_offset) {}

    explicit FormatError(const std::string& msg) : Error(msg), offset_(0) {}

    std::uint64_t offset() const noexcept {
        return offset_;
    }

  private:
    std::uint64_t offset_;
};

/// In-memory data that violates a structural invariant (e.g. a stored code
/// out of codebook range).
class CorruptionError : public Error {
  public:
    explicit CorruptionError(const std::string& msg) : Error(msg) {}
};

/// Benchmark evaluation cannot proceed (e.g. missing ground truth).
class EvaluationError : public Error {
  public:
    explicit EvaluationError(const std::string& msg) : Error(msg) {}
};

} // namespace nibblescan
