// SPDX-License-Identifier: Apache-2.0
// Little-endian readers/writers shared by the WAV, feature-cache and
// checkpoint codecs. Private to the library.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "diar/error.hpp"

namespace diar::detail {

static_assert(std::endian::native == std::endian::little,
              "binary codecs assume a little-endian host");

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_bytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  template <typename T>
  void put_array(std::span<const T> values) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
    bytes_.insert(bytes_.end(), p, p + values.size_bytes());
  }
  // Length-prefixed UTF-8 string; the prefix type fixes the maximum length.
  template <typename Len>
  void put_string(std::string_view s) {
    if (s.size() > std::numeric_limits<Len>::max()) {
      throw Error(ErrorCode::InvalidArgument, "string too long to encode: " + std::string(s.substr(0, 32)));
    }
    put(static_cast<Len>(s.size()));
    put_bytes(s);
  }

  std::vector<std::uint8_t>& bytes() { return bytes_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string what)
      : data_(data), what_(std::move(what)) {}

  template <typename T>
  T get() {
    T value;
    std::memcpy(&value, take(sizeof(T)).data(), sizeof(T));
    return value;
  }
  std::string get_bytes(std::size_t n) {
    auto s = take(n);
    return {reinterpret_cast<const char*>(s.data()), s.size()};
  }
  template <typename Len>
  std::string get_string() { return get_bytes(get<Len>()); }
  template <typename T>
  void get_array(std::span<T> out) {
    auto s = take(out.size_bytes());
    std::memcpy(out.data(), s.data(), s.size());
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > remaining()) {
      throw Error(ErrorCode::Truncated, what_ + ": unexpected end of file");
    }
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  void skip(std::size_t n) { take(n); }
  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace diar::detail
