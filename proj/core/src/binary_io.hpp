// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

// Little-endian byte encoding shared by the binary file formats.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "nnaqat/error.hpp"

namespace nnaqat::detail {

class ByteWriter {
 public:
  void bytes(std::string_view s) { out_.append(s); }

  template <typename T>
  void le(T v) {
    using U = std::make_unsigned_t<T>;
    const auto u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
    }
  }

  void u32(std::uint32_t v) { le(v); }
  void i32(std::int32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }

  const std::string& data() const { return out_; }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  ByteReader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    std::string_view s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  template <typename T>
  T le() {
    using U = std::make_unsigned_t<T>;
    need(sizeof(T));
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::int32_t i32() { return le<std::int32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  std::uint8_t u8() { return le<std::uint8_t>(); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  std::string str(std::size_t max_len = 1 << 16) {
    const std::uint32_t n = u32();
    if (n > max_len) fail(fmt::format("string length {} exceeds limit", n));
    return std::string(bytes(n));
  }

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::kParse, fmt::format("{} at byte {}: {}", what_, pos_, msg));
  }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) fail("truncated file");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
  std::string what_;
};

// FNV-1a, used to tie golden traces to the exact files they came from.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace nnaqat::detail
