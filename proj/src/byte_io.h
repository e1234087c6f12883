// Copyright 2026 The GraphSentry Authors. All Rights Reserved.
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

// Little-endian fixed-width encoding for the toolkit's binary side files.

#ifndef GRAPHSENTRY_SRC_BYTE_IO_H_
#define GRAPHSENTRY_SRC_BYTE_IO_H_

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "graphsentry/error.h"

namespace graphsentry::bytes {

class Writer {
 public:
  void Magic(std::string_view m) { buf_.insert(buf_.end(), m.begin(), m.end()); }

  template <typename T>
  void Put(T v) {
    static_assert(std::is_arithmetic_v<T>);
    const auto* p = reinterpret_cast<const uint8_t*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }

  template <typename T>
  void PutArray(std::span<const T> values) {
    const auto* p = reinterpret_cast<const uint8_t*>(values.data());
    buf_.insert(buf_.end(), p, p + values.size_bytes());
  }

  void PutString(std::string_view s) {
    Put(static_cast<uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }

  std::vector<uint8_t> Take() { return std::move(buf_); }

 private:
  std::vector<uint8_t> buf_;
};

// Every short read throws `code` with a message naming `what`.
class Reader {
 public:
  Reader(std::span<const uint8_t> data, ErrorCode code)
      : data_(data), code_(code) {}

  size_t remaining() const { return data_.size() - pos_; }
  size_t position() const { return pos_; }

  void ExpectMagic(std::string_view m) {
    Need(m.size(), "magic");
    if (std::memcmp(data_.data() + pos_, m.data(), m.size()) != 0) {
      Fail("bad magic, expected '" + std::string(m) + "'");
    }
    pos_ += m.size();
  }

  template <typename T>
  T Get(const char* what) {
    Need(sizeof(T), what);
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  template <typename T>
  std::vector<T> GetArray(size_t count, const char* what) {
    if (count > remaining() / sizeof(T)) Fail(std::string("truncated ") + what);
    std::vector<T> out(count);
    std::memcpy(out.data(), data_.data() + pos_, count * sizeof(T));
    pos_ += count * sizeof(T);
    return out;
  }

  std::string GetString(const char* what) {
    const auto n = Get<uint32_t>(what);
    Need(n, what);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void ExpectEnd() {
    if (remaining() != 0) {
      Fail(std::to_string(remaining()) + " trailing bytes");
    }
  }

  [[noreturn]] void Fail(const std::string& msg) const { throw Error(code_, msg); }

 private:
  void Need(size_t n, const char* what) const {
    if (n > remaining()) Fail(std::string("truncated ") + what);
  }

  std::span<const uint8_t> data_;
  ErrorCode code_;
  size_t pos_ = 0;
};

}  // namespace graphsentry::bytes

#endif  // GRAPHSENTRY_SRC_BYTE_IO_H_
