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

// Internal little-endian (de)serialization helpers shared by the dataset
// readers and the index container.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nibblescan/errors.hpp"

namespace nibblescan::detail {

static_assert(std::endian::native == std::endian::little ||
                      std::endian::native == std::endian::big,
              "mixed-endian targets are not supported");

template <typename T>
T byteswap_if_big(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    } else {
        return v;
    }
}

/// Cursor over an in-memory buffer; every read is bounds-checked and
/// failures report the absolute byte offset.
class Reader {
  public:
    Reader(const std::uint8_t* data, std::size_t size)
            : data_(data), size_(size) {}

    std::size_t offset() const {
        return pos_;
    }
    std::size_t remaining() const {
        return size_ - pos_;
    }
    bool at_end() const {
        return pos_ == size_;
    }

    template <typename T>
    T get(const char* what) {
        static_assert(std::is_trivially_copyable_v<T>);
        if (remaining() < sizeof(T)) {
            throw FormatError(std::string("truncated ") + what, pos_);
        }
        T v;
        std::memcpy(&v, data_ + pos_, sizeof(T));
        pos_ += sizeof(T);
        return byteswap_if_big(v);
    }

    void get_bytes(std::uint8_t* out, std::size_t count, const char* what) {
        if (remaining() < count) {
            throw FormatError(std::string("truncated ") + what, pos_);
        }
        std::memcpy(out, data_ + pos_, count);
        pos_ += count;
    }

    template <typename T>
    void get_array(T* out, std::size_t count, const char* what) {
        static_assert(std::is_trivially_copyable_v<T>);
        if (remaining() < count * sizeof(T)) {
            throw FormatError(std::string("truncated ") + what, pos_);
        }
        std::memcpy(out, data_ + pos_, count * sizeof(T));
        pos_ += count * sizeof(T);
        if constexpr (std::endian::native == std::endian::big) {
            for (std::size_t i = 0; i < count; ++i) {
                out[i] = byteswap_if_big(out[i]);
            }
        }
    }

  private:
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

class Writer {
  public:
    template <typename T>
    void put(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        v = byteswap_if_big(v);
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        buf_.insert(buf_.end(), p, p + sizeof(T));
    }

    void put_bytes(const std::uint8_t* data, std::size_t count) {
        buf_.insert(buf_.end(), data, data + count);
    }

    template <typename T>
    void put_array(const T* data, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            put(data[i]);
        }
    }

    const std::vector<std::uint8_t>& bytes() const {
        return buf_;
    }

  private:
    std::vector<std::uint8_t> buf_;
};

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open file: " + path.string());
    }
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    std::vector<std::uint8_t> buf(size);
    if (size > 0) {
        in.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(size));
    }
    if (!in) {
        throw FormatError("cannot read file: " + path.string());
    }
    return buf;
}

inline void write_file(const std::filesystem::path& path,
                       const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FormatError("cannot open file for writing: " + path.string());
    }
    if (!bytes.empty()) {
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    }
    out.flush();
    if (!out) {
        throw FormatError("cannot write file: " + path.string());
    }
}

} // namespace nibblescan::detail
