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

#include "graphsentry/tensor.h"

#include <bit>
#include <cstring>
#include <sstream>

#include "graphsentry/error.h"

static_assert(std::endian::native == std::endian::little,
              "raw tensor payloads assume a little-endian host");

namespace graphsentry {

std::string_view DTypeName(DType dtype) {
  switch (dtype) {
    case DType::kFloat32: return "f32";
    case DType::kInt64: return "i64";
    case DType::kBool: return "bool";
  }
  return "?";
}

DType DTypeFromName(std::string_view name) {
  if (name == "f32") return DType::kFloat32;
  if (name == "i64") return DType::kInt64;
  if (name == "bool") return DType::kBool;
  throw Error(ErrorCode::kUnsupportedDtype,
              "unsupported dtype '" + std::string(name) + "'");
}

int32_t OnnxDataType(DType dtype) {
  switch (dtype) {
    case DType::kFloat32: return 1;
    case DType::kInt64: return 7;
    case DType::kBool: return 9;
  }
  return 0;
}

DType DTypeFromOnnx(int32_t onnx_type) {
  switch (onnx_type) {
    case 1: return DType::kFloat32;
    case 7: return DType::kInt64;
    case 9: return DType::kBool;
    default:
      throw Error(ErrorCode::kUnsupportedDtype,
                  "unsupported ONNX data type " + std::to_string(onnx_type));
  }
}

int64_t ShapeNumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void CheckShape(const Shape& shape, size_t payload) {
  for (int64_t d : shape) {
    if (d < 0) {
      throw Error(ErrorCode::kInvalidTensor,
                  "negative extent in shape " + ShapeToString(shape));
    }
  }
  if (static_cast<size_t>(ShapeNumElements(shape)) != payload) {
    throw Error(ErrorCode::kInvalidTensor,
                "shape " + ShapeToString(shape) + " expects " +
                    std::to_string(ShapeNumElements(shape)) +
                    " elements, payload has " + std::to_string(payload));
  }
}

}  // namespace

Tensor Tensor::F32(Shape shape, std::vector<float> data) {
  CheckShape(shape, data.size());
  Tensor t;
  t.dtype_ = DType::kFloat32;
  t.shape_ = std::move(shape);
  t.f32_ = std::move(data);
  return t;
}

Tensor Tensor::I64(Shape shape, std::vector<int64_t> data) {
  CheckShape(shape, data.size());
  Tensor t;
  t.dtype_ = DType::kInt64;
  t.shape_ = std::move(shape);
  t.i64_ = std::move(data);
  return t;
}

Tensor Tensor::Bool(Shape shape, std::vector<uint8_t> data) {
  CheckShape(shape, data.size());
  for (uint8_t b : data) {
    if (b > 1) throw Error(ErrorCode::kInvalidTensor, "bool payload not 0/1");
  }
  Tensor t;
  t.dtype_ = DType::kBool;
  t.shape_ = std::move(shape);
  t.bool_ = std::move(data);
  return t;
}

Tensor Tensor::Zeros(DType dtype, Shape shape) {
  for (int64_t d : shape) {
    if (d < 0) {
      throw Error(ErrorCode::kInvalidTensor,
                  "negative extent in shape " + ShapeToString(shape));
    }
  }
  const auto n = static_cast<size_t>(ShapeNumElements(shape));
  switch (dtype) {
    case DType::kFloat32: return F32(std::move(shape), std::vector<float>(n));
    case DType::kInt64: return I64(std::move(shape), std::vector<int64_t>(n));
    case DType::kBool: return Bool(std::move(shape), std::vector<uint8_t>(n));
  }
  return {};
}

int64_t Tensor::size() const { return ShapeNumElements(shape_); }

std::span<const float> Tensor::f32() const {
  if (dtype_ != DType::kFloat32) {
    throw Error(ErrorCode::kUnsupportedDtype, "tensor is not f32");
  }
  return f32_;
}
std::span<float> Tensor::mutable_f32() {
  if (dtype_ != DType::kFloat32) {
    throw Error(ErrorCode::kUnsupportedDtype, "tensor is not f32");
  }
  return f32_;
}
std::span<const int64_t> Tensor::i64() const {
  if (dtype_ != DType::kInt64) {
    throw Error(ErrorCode::kUnsupportedDtype, "tensor is not i64");
  }
  return i64_;
}
std::span<int64_t> Tensor::mutable_i64() {
  if (dtype_ != DType::kInt64) {
    throw Error(ErrorCode::kUnsupportedDtype, "tensor is not i64");
  }
  return i64_;
}
std::span<const uint8_t> Tensor::boolean() const {
  if (dtype_ != DType::kBool) {
    throw Error(ErrorCode::kUnsupportedDtype, "tensor is not bool");
  }
  return bool_;
}
std::span<uint8_t> Tensor::mutable_boolean() {
  if (dtype_ != DType::kBool) {
    throw Error(ErrorCode::kUnsupportedDtype, "tensor is not bool");
  }
  return bool_;
}

std::vector<uint8_t> Tensor::RawBytes() const {
  std::vector<uint8_t> out;
  switch (dtype_) {
    case DType::kFloat32:
      out.resize(f32_.size() * sizeof(float));
      if (!out.empty()) std::memcpy(out.data(), f32_.data(), out.size());
      break;
    case DType::kInt64:
      out.resize(i64_.size() * sizeof(int64_t));
      if (!out.empty()) std::memcpy(out.data(), i64_.data(), out.size());
      break;
    case DType::kBool:
      out = bool_;
      break;
  }
  return out;
}

Tensor Tensor::FromRawBytes(DType dtype, Shape shape,
                            std::span<const uint8_t> bytes) {
  switch (dtype) {
    case DType::kFloat32: {
      if (bytes.size() % sizeof(float) != 0) {
        throw Error(ErrorCode::kInvalidTensor, "f32 raw payload misaligned");
      }
      std::vector<float> v(bytes.size() / sizeof(float));
      if (!v.empty()) std::memcpy(v.data(), bytes.data(), bytes.size());
      return F32(std::move(shape), std::move(v));
    }
    case DType::kInt64: {
      if (bytes.size() % sizeof(int64_t) != 0) {
        throw Error(ErrorCode::kInvalidTensor, "i64 raw payload misaligned");
      }
      std::vector<int64_t> v(bytes.size() / sizeof(int64_t));
      if (!v.empty()) std::memcpy(v.data(), bytes.data(), bytes.size());
      return I64(std::move(shape), std::move(v));
    }
    case DType::kBool:
      return Bool(std::move(shape),
                  std::vector<uint8_t>(bytes.begin(), bytes.end()));
  }
  return {};
}

void Tensor::Validate() const {
  switch (dtype_) {
    case DType::kFloat32:
      CheckShape(shape_, f32_.size());
      if (!i64_.empty() || !bool_.empty()) break;
      return;
    case DType::kInt64:
      CheckShape(shape_, i64_.size());
      if (!f32_.empty() || !bool_.empty()) break;
      return;
    case DType::kBool:
      CheckShape(shape_, bool_.size());
      if (!f32_.empty() || !i64_.empty()) break;
      return;
  }
  throw Error(ErrorCode::kInvalidTensor, "payload does not match dtype");
}

bool operator==(const Tensor& a, const Tensor& b) {
  if (a.dtype_ != b.dtype_ || a.shape_ != b.shape_) return false;
  switch (a.dtype_) {
    case DType::kFloat32:
      return a.f32_.size() == b.f32_.size() &&
             (a.f32_.empty() ||
              std::memcmp(a.f32_.data(), b.f32_.data(),
                          a.f32_.size() * sizeof(float)) == 0);
    case DType::kInt64: return a.i64_ == b.i64_;
    case DType::kBool: return a.bool_ == b.bool_;
  }
  return false;
}

std::string TensorSummary(const Tensor& t) {
  return std::string(DTypeName(t.dtype())) + ShapeToString(t.shape());
}

}  // namespace graphsentry
