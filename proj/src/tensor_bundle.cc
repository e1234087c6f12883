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


#include "graphsentry/tensor_bundle.h"

#include "byte_io.h"
#include "graphsentry/error.h"
#include "graphsentry/onnx_io.h"

namespace graphsentry {

namespace {

constexpr std::string_view kMagic = "ATB1";

uint8_t DTypeCode(DType d) { return static_cast<uint8_t>(d); }

}  // namespace

std::vector<uint8_t> EncodeBundle(const TensorMap& tensors) {
  bytes::Writer w;
  w.Magic(kMagic);
  w.Put(static_cast<uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    w.PutString(name);
    w.Put(DTypeCode(t.dtype()));
    w.Put(static_cast<uint32_t>(t.rank()));
    w.PutArray(std::span<const int64_t>(t.shape()));
    const std::vector<uint8_t> raw = t.RawBytes();
    w.Put(static_cast<uint64_t>(raw.size()));
    w.PutArray(std::span<const uint8_t>(raw));
  }
  return w.Take();
}

TensorMap DecodeBundle(std::span<const uint8_t> data) {
  bytes::Reader r(data, ErrorCode::kMalformedEncoding);
  r.ExpectMagic(kMagic);
  const auto count = r.Get<uint32_t>("tensor count");
  TensorMap out;
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = r.GetString("tensor name");
    const auto code = r.Get<uint8_t>("dtype");
    if (code > DTypeCode(DType::kBool)) {
      r.Fail("tensor '" + name + "' has unknown dtype " + std::to_string(code));
    }
    const auto rank = r.Get<uint32_t>("rank");
    Shape shape = r.GetArray<int64_t>(rank, "dims");
    const auto length = r.Get<uint64_t>("payload length");
    if (length > r.remaining()) r.Fail("truncated payload of '" + name + "'");
    const std::vector<uint8_t> raw = r.GetArray<uint8_t>(length, "payload");
    Tensor t;
    try {
      t = Tensor::FromRawBytes(static_cast<DType>(code), std::move(shape), raw);
    } catch (const Error& e) {
      r.Fail("tensor '" + name + "': " + e.what());
    }
    if (!out.emplace(std::move(name), std::move(t)).second) r.Fail("duplicate tensor name");
  }
  r.ExpectEnd();
  return out;
}

void WriteBundle(const std::filesystem::path& path, const TensorMap& tensors) {
  WriteFileBytes(path, EncodeBundle(tensors));
}

TensorMap ReadBundle(const std::filesystem::path& path) {
  return DecodeBundle(ReadFileBytes(path));
}

}  // namespace graphsentry
