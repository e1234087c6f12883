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

#ifndef GRAPHSENTRY_TENSOR_H_
#define GRAPHSENTRY_TENSOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace graphsentry {

enum class DType : uint8_t { kFloat32, kInt64, kBool };

std::string_view DTypeName(DType dtype);   // "f32", "i64", "bool"
DType DTypeFromName(std::string_view name);  // throws kUnsupportedDtype

// ONNX TensorProto.DataType codes for the supported subset.
int32_t OnnxDataType(DType dtype);
DType DTypeFromOnnx(int32_t onnx_type);  // throws kUnsupportedDtype

using Shape = std::vector<int64_t>;

int64_t ShapeNumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Dense row-major tensor. Exactly one of the three payload vectors is in use,
// selected by dtype. Booleans are stored one byte per element (0 or 1).
class Tensor {
 public:
  Tensor() : dtype_(DType::kFloat32) {}

  // All factories validate that the payload length matches the shape and
  // throw Error(kInvalidTensor) otherwise.
  static Tensor F32(Shape shape, std::vector<float> data);
  static Tensor I64(Shape shape, std::vector<int64_t> data);
  static Tensor Bool(Shape shape, std::vector<uint8_t> data);
  static Tensor Zeros(DType dtype, Shape shape);
  static Tensor ScalarF32(float v) { return F32({}, {v}); }
  static Tensor ScalarI64(int64_t v) { return I64({}, {v}); }
  static Tensor ScalarBool(bool v) { return Bool({}, {uint8_t{v}}); }

  DType dtype() const { return dtype_; }
  const Shape& shape() const { return shape_; }
  int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
  int64_t size() const;

  std::span<const float> f32() const;
  std::span<float> mutable_f32();
  std::span<const int64_t> i64() const;
  std::span<int64_t> mutable_i64();
  std::span<const uint8_t> boolean() const;
  std::span<uint8_t> mutable_boolean();

  // Little-endian payload bytes (bools one byte each).
  std::vector<uint8_t> RawBytes() const;
  static Tensor FromRawBytes(DType dtype, Shape shape,
                             std::span<const uint8_t> bytes);

  // Re-checks the payload invariants; throws kInvalidTensor.
  void Validate() const;

  // Bitwise equality: dtype, shape and payload bytes. NaN payloads compare by
  // bit pattern, +0 and -0 are distinct.
  friend bool operator==(const Tensor& a, const Tensor& b);

 private:
  DType dtype_;
  Shape shape_;
  std::vector<float> f32_;
  std::vector<int64_t> i64_;
  std::vector<uint8_t> bool_;
};

std::string TensorSummary(const Tensor& t);  // "f32[2,3]"

}  // namespace graphsentry

#endif  // GRAPHSENTRY_TENSOR_H_
