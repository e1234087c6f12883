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

// Minimal protocol-buffers wire format reader and writer. Only the pieces the
// ONNX codec needs: varints, fixed32/fixed64, length-delimited fields.

#ifndef GRAPHSENTRY_SRC_PROTO_WIRE_H_
#define GRAPHSENTRY_SRC_PROTO_WIRE_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graphsentry/error.h"

namespace graphsentry::wire {

enum WireType : uint32_t {
  kVarint = 0,
  kFixed64 = 1,
  kLengthDelimited = 2,
  kStartGroup = 3,
  kEndGroup = 4,
  kFixed32 = 5,
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> data) : data_(data) {}

  bool done() const { return pos_ >= data_.size(); }

  // Reads the next tag. Returns false at end of buffer.
  bool NextField(uint32_t& field, WireType& type) {
    if (done()) return false;
    uint64_t tag = ReadVarint();
    field = static_cast<uint32_t>(tag >> 3);
    type = static_cast<WireType>(tag & 7);
    if (field == 0) Fail("field number 0");
    return true;
  }

  uint64_t ReadVarint() {
    uint64_t result = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      if (pos_ >= data_.size()) Fail("truncated varint");
      uint8_t b = data_[pos_++];
      result |= static_cast<uint64_t>(b & 0x7f) << shift;
      if ((b & 0x80) == 0) return result;
    }
    Fail("varint longer than 10 bytes");
    return 0;
  }

  uint32_t ReadFixed32() {
    if (data_.size() - pos_ < 4) Fail("truncated fixed32");
    uint32_t v;
    std::memcpy(&v, data_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }

  uint64_t ReadFixed64() {
    if (data_.size() - pos_ < 8) Fail("truncated fixed64");
    uint64_t v;
    std::memcpy(&v, data_.data() + pos_, 8);
    pos_ += 8;
    return v;
  }

  std::span<const uint8_t> ReadBytes() {
    uint64_t len = ReadVarint();
    if (len > data_.size() - pos_) Fail("length-delimited field overruns");
    auto out = data_.subspan(pos_, static_cast<size_t>(len));
    pos_ += static_cast<size_t>(len);
    return out;
  }

  std::string ReadString() {
    auto b = ReadBytes();
    return std::string(b.begin(), b.end());
  }

  void Skip(WireType type) {
    switch (type) {
      case kVarint: ReadVarint(); return;
      case kFixed64: ReadFixed64(); return;
      case kLengthDelimited: ReadBytes(); return;
      case kFixed32: ReadFixed32(); return;
      default: Fail("unsupported wire type " + std::to_string(type));
    }
  }

  [[noreturn]] static void Fail(const std::string& what) {
    throw Error(ErrorCode::kMalformedEncoding, "protobuf: " + what);
  }

 private:
  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

class Writer {
 public:
  const std::vector<uint8_t>& bytes() const { return out_; }
  std::vector<uint8_t> Take() { return std::move(out_); }

  void Varint(uint64_t v) {
    while (v >= 0x80) {
      out_.push_back(static_cast<uint8_t>(v | 0x80));
      v >>= 7;
    }
    out_.push_back(static_cast<uint8_t>(v));
  }

  void Tag(uint32_t field, WireType type) {
    Varint((static_cast<uint64_t>(field) << 3) | type);
  }

  void Int64Field(uint32_t field, int64_t v) {
    Tag(field, kVarint);
    Varint(static_cast<uint64_t>(v));
  }

  void FloatField(uint32_t field, float v) {
    Tag(field, kFixed32);
    uint32_t bits = std::bit_cast<uint32_t>(v);
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(bits >> (8 * i)));
  }

  void BytesField(uint32_t field, std::span<const uint8_t> b) {
    Tag(field, kLengthDelimited);
    Varint(b.size());
    out_.insert(out_.end(), b.begin(), b.end());
  }

  void StringField(uint32_t field, std::string_view s) {
    BytesField(field, std::span<const uint8_t>(
                          reinterpret_cast<const uint8_t*>(s.data()), s.size()));
  }

  void MessageField(uint32_t field, const Writer& sub) {
    BytesField(field, sub.out_);
  }

  void PackedInt64(uint32_t field, std::span<const int64_t> values) {
    Writer body;
    for (int64_t v : values) body.Varint(static_cast<uint64_t>(v));
    MessageField(field, body);
  }

  void PackedFloat(uint32_t field, std::span<const float> values) {
    Writer body;
    for (float v : values) {
      uint32_t bits = std::bit_cast<uint32_t>(v);
      for (int i = 0; i < 4; ++i) {
        body.out_.push_back(static_cast<uint8_t>(bits >> (8 * i)));
      }
    }
    MessageField(field, body);
  }

 private:
  std::vector<uint8_t> out_;
};

}  // namespace graphsentry::wire

#endif  // GRAPHSENTRY_SRC_PROTO_WIRE_H_
