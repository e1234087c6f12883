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

// Shape planning and scalar semantics shared by the parallel and reference
// kernels. Anything that decides *what* a value is lives here; the two
// kernel files only differ in *how* they loop.

#ifndef GRAPHSENTRY_SRC_KERNEL_COMMON_H_
#define GRAPHSENTRY_SRC_KERNEL_COMMON_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "graphsentry/error.h"
#include "graphsentry/kernels.h"
#include "graphsentry/tensor.h"

namespace graphsentry::kernels::detail {

[[noreturn]] inline void ShapeError(const std::string& what) {
  throw Error(ErrorCode::kShapeMismatch, what);
}

inline int64_t NormalizeAxis(int64_t axis, int64_t rank) {
  if (axis < -rank || axis >= rank || (rank == 0 && axis != 0)) {
    ShapeError("axis " + std::to_string(axis) + " out of range for rank " +
               std::to_string(rank));
  }
  return axis < 0 ? axis + rank : axis;
}

inline std::vector<int64_t> RowMajorStrides(const Shape& shape) {
  std::vector<int64_t> strides(shape.size(), 1);
  for (int64_t i = static_cast<int64_t>(shape.size()) - 2; i >= 0; --i) {
    strides[i] = strides[i + 1] * shape[i + 1];
  }
  return strides;
}

// Strides of `in` viewed at the rank of `out`, zero on broadcast dims.
inline std::vector<int64_t> BroadcastStrides(const Shape& in, const Shape& out) {
  std::vector<int64_t> strides(out.size(), 0);
  const auto own = RowMajorStrides(in);
  const size_t offset = out.size() - in.size();
  for (size_t i = 0; i < in.size(); ++i) {
    strides[offset + i] = in[i] == 1 ? 0 : own[i];
  }
  return strides;
}

// Result dtype of a binary op; throws kUnsupportedDtype on bad operands.
inline DType BinaryResultType(BinaryOp op, DType a, DType b) {
  if (a != b) {
    throw Error(ErrorCode::kUnsupportedDtype,
                std::string("operand dtypes differ: ") +
                    std::string(DTypeName(a)) + " vs " +
                    std::string(DTypeName(b)));
  }
  switch (op) {
    case BinaryOp::kAdd:
    case BinaryOp::kSub:
    case BinaryOp::kMul:
    case BinaryOp::kDiv:
      if (a == DType::kBool) break;
      return a;
    case BinaryOp::kEqual: return DType::kBool;
    case BinaryOp::kGreater:
      if (a == DType::kBool) break;
      return DType::kBool;
    case BinaryOp::kAnd:
    case BinaryOp::kOr:
      if (a != DType::kBool) break;
      return DType::kBool;
  }
  throw Error(ErrorCode::kUnsupportedDtype,
              std::string("operator does not accept ") +
                  std::string(DTypeName(a)));
}

inline float ApplyF32(BinaryOp op, float a, float b) {
  switch (op) {
    case BinaryOp::kAdd: return a + b;
    case BinaryOp::kSub: return a - b;
    case BinaryOp::kMul: return a * b;
    case BinaryOp::kDiv: return a / b;
    default: return 0.0f;
  }
}

// Two's-complement wraparound for + - *; division pre-checked by caller.
inline int64_t ApplyI64(BinaryOp op, int64_t a, int64_t b) {
  const auto ua = static_cast<uint64_t>(a);
  const auto ub = static_cast<uint64_t>(b);
  switch (op) {
    case BinaryOp::kAdd: return static_cast<int64_t>(ua + ub);
    case BinaryOp::kSub: return static_cast<int64_t>(ua - ub);
    case BinaryOp::kMul: return static_cast<int64_t>(ua * ub);
    case BinaryOp::kDiv: return a / b;
    default: return 0;
  }
}

template <typename T>
inline uint8_t CompareScalar(BinaryOp op, T a, T b) {
  return op == BinaryOp::kEqual ? uint8_t{a == b} : uint8_t{a > b};
}

inline uint8_t LogicScalar(BinaryOp op, uint8_t a, uint8_t b) {
  return op == BinaryOp::kAnd ? uint8_t(a & b) : uint8_t(a | b);
}

inline void CheckIntegerDivision(std::span<const int64_t> divisor,
                                 std::span<const int64_t> dividend) {
  for (int64_t d : divisor) {
    if (d == 0) {
      throw Error(ErrorCode::kNumericDomain, "integer division by zero");
    }
  }
  bool has_min = false;
  for (int64_t v : dividend) {
    has_min |= v == std::numeric_limits<int64_t>::min();
  }
  if (has_min) {
    for (int64_t d : divisor) {
      if (d == -1) {
        throw Error(ErrorCode::kNumericDomain, "integer division overflow");
      }
    }
  }
}

// NaN-propagating max/min so the reduction is order-deterministic.
template <typename T>
inline T CombineMax(T acc, T v) {
  if constexpr (std::is_floating_point_v<T>) {
    if (std::isnan(v) || std::isnan(acc)) return std::isnan(acc) ? acc : v;
  }
  return v > acc ? v : acc;
}

template <typename T>
inline T CombineMin(T acc, T v) {
  if constexpr (std::is_floating_point_v<T>) {
    if (std::isnan(v) || std::isnan(acc)) return std::isnan(acc) ? acc : v;
  }
  return v < acc ? v : acc;
}

template <typename T>
inline T ReduceIdentity(ReduceOp op) {
  if constexpr (std::is_same_v<T, uint8_t>) {
    return op == ReduceOp::kMin ? 1 : 0;
  } else if constexpr (std::is_floating_point_v<T>) {
    if (op == ReduceOp::kMax) return -std::numeric_limits<T>::infinity();
    if (op == ReduceOp::kMin) return std::numeric_limits<T>::infinity();
    return T{0};
  } else {
    if (op == ReduceOp::kMax) return std::numeric_limits<T>::min();
    if (op == ReduceOp::kMin) return std::numeric_limits<T>::max();
    return T{0};
  }
}

struct MatMulPlan {
  Shape out_shape;
  int64_t batch = 1;
  int64_t m = 0;
  int64_t k = 0;
  int64_t n = 0;
  std::vector<int64_t> a_offset;  // per batch index, element offset into a
  std::vector<int64_t> b_offset;
};

inline MatMulPlan PlanMatMul(const Shape& a_in, const Shape& b_in) {
  if (a_in.empty() || b_in.empty()) ShapeError("MatMul of a scalar");
  Shape a = a_in;
  Shape b = b_in;
  const bool a_vec = a.size() == 1;
  const bool b_vec = b.size() == 1;
  if (a_vec) a.insert(a.begin(), 1);
  if (b_vec) b.push_back(1);
  MatMulPlan p;
  p.m = a[a.size() - 2];
  p.k = a[a.size() - 1];
  p.n = b[b.size() - 1];
  if (b[b.size() - 2] != p.k) {
    ShapeError("MatMul inner dims differ: " + ShapeToString(a_in) + " x " +
               ShapeToString(b_in));
  }
  Shape a_batch(a.begin(), a.end() - 2);
  Shape b_batch(b.begin(), b.end() - 2);
  Shape batch = BroadcastShapes(a_batch, b_batch);
  p.batch = ShapeNumElements(batch);
  const auto a_strides = BroadcastStrides(a_batch, batch);
  const auto b_strides = BroadcastStrides(b_batch, batch);
  const auto out_strides = RowMajorStrides(batch);
  p.a_offset.resize(static_cast<size_t>(p.batch));
  p.b_offset.resize(static_cast<size_t>(p.batch));
  for (int64_t idx = 0; idx < p.batch; ++idx) {
    int64_t rem = idx;
    int64_t ao = 0;
    int64_t bo = 0;
    for (size_t d = 0; d < batch.size(); ++d) {
      const int64_t coord = rem / out_strides[d];
      rem %= out_strides[d];
      ao += coord * a_strides[d];
      bo += coord * b_strides[d];
    }
    p.a_offset[idx] = ao * p.m * p.k;
    p.b_offset[idx] = bo * p.k * p.n;
  }
  p.out_shape = batch;
  if (!a_vec) p.out_shape.push_back(p.m);
  if (!b_vec) p.out_shape.push_back(p.n);
  return p;
}

struct GemmPlan {
  int64_t m = 0;
  int64_t k = 0;
  int64_t n = 0;
  // Element strides of A[i][kk] and B[kk][j] after transposition.
  int64_t a_row = 0, a_col = 0, b_row = 0, b_col = 0;
  std::vector<int64_t> c_strides;  // broadcast strides of C at [m, n]
};

inline GemmPlan PlanGemm(const Tensor& a, const Tensor& b, const Tensor* c,
                         bool trans_a, bool trans_b) {
  if (a.rank() != 2 || b.rank() != 2) ShapeError("Gemm operands must be 2-D");
  if (a.dtype() != DType::kFloat32 || b.dtype() != DType::kFloat32) {
    throw Error(ErrorCode::kUnsupportedDtype, "Gemm requires f32");
  }
  GemmPlan p;
  const int64_t a0 = a.shape()[0], a1 = a.shape()[1];
  const int64_t b0 = b.shape()[0], b1 = b.shape()[1];
  p.m = trans_a ? a1 : a0;
  p.k = trans_a ? a0 : a1;
  const int64_t kb = trans_b ? b1 : b0;
  p.n = trans_b ? b0 : b1;
  if (kb != p.k) ShapeError("Gemm inner dims differ");
  p.a_row = trans_a ? 1 : a1;
  p.a_col = trans_a ? a1 : 1;
  p.b_row = trans_b ? 1 : b1;
  p.b_col = trans_b ? b1 : 1;
  if (c) {
    if (c->dtype() != DType::kFloat32) {
      throw Error(ErrorCode::kUnsupportedDtype, "Gemm C must be f32");
    }
    const Shape out = {p.m, p.n};
    if (BroadcastShapes(c->shape(), out) != out) {
      ShapeError("Gemm C not broadcastable to output");
    }
    p.c_strides = BroadcastStrides(c->shape(), out);
  }
  return p;
}

struct ReducePlan {
  Shape out_shape;
  std::vector<bool> reduced;  // per input dim
};

inline ReducePlan PlanReduce(const Shape& in,
                             const std::optional<std::vector<int64_t>>& axes,
                             bool keepdims) {
  const auto rank = static_cast<int64_t>(in.size());
  ReducePlan p;
  p.reduced.assign(in.size(), !axes.has_value() || axes->empty());
  if (axes && !axes->empty()) {
    for (int64_t ax : *axes) {
      const int64_t a = NormalizeAxis(ax, rank);
      if (p.reduced[a]) ShapeError("duplicate reduce axis");
      p.reduced[a] = true;
    }
  }
  for (size_t i = 0; i < in.size(); ++i) {
    if (!p.reduced[i]) {
      p.out_shape.push_back(in[i]);
    } else if (keepdims) {
      p.out_shape.push_back(1);
    }
  }
  return p;
}

// Splits a shape at `axis` into outer x extent x inner.
struct AxisSplit {
  int64_t outer = 1;
  int64_t extent = 1;
  int64_t inner = 1;
};

inline AxisSplit SplitAtAxis(const Shape& shape, int64_t axis) {
  AxisSplit s;
  for (int64_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (size_t i = static_cast<size_t>(axis) + 1; i < shape.size(); ++i) {
    s.inner *= shape[i];
  }
  return s;
}

struct LayerNormPlan {
  int64_t rows = 1;
  int64_t width = 1;
  std::vector<int64_t> scale_strides;  // broadcast at normalized shape
  std::vector<int64_t> bias_strides;
  Shape normalized;
};

inline LayerNormPlan PlanLayerNorm(const Tensor& x, const Tensor& scale,
                                   const Tensor* bias, int64_t axis_attr) {
  if (x.dtype() != DType::kFloat32 || scale.dtype() != DType::kFloat32 ||
      (bias && bias->dtype() != DType::kFloat32)) {
    throw Error(ErrorCode::kUnsupportedDtype, "LayerNormalization needs f32");
  }
  const int64_t axis = NormalizeAxis(axis_attr, x.rank());
  LayerNormPlan p;
  p.normalized.assign(x.shape().begin() + axis, x.shape().end());
  for (int64_t i = 0; i < axis; ++i) p.rows *= x.shape()[i];
  p.width = ShapeNumElements(p.normalized);
  auto strides_for = [&](const Tensor& t) {
    if (t.rank() > static_cast<int64_t>(p.normalized.size()) ||
        BroadcastShapes(t.shape(), p.normalized) != p.normalized) {
      ShapeError("LayerNormalization scale/bias " + ShapeToString(t.shape()) +
                 " incompatible with " + ShapeToString(p.normalized));
    }
    return BroadcastStrides(t.shape(), p.normalized);
  };
  p.scale_strides = strides_for(scale);
  if (bias) p.bias_strides = strides_for(*bias);
  return p;
}

inline int64_t BroadcastOffset(int64_t flat, const std::vector<int64_t>& out_strides,
                               const std::vector<int64_t>& in_strides) {
  int64_t off = 0;
  for (size_t d = 0; d < out_strides.size(); ++d) {
    const int64_t coord = flat / out_strides[d];
    flat %= out_strides[d];
    off += coord * in_strides[d];
  }
  return off;
}

}  // namespace graphsentry::kernels::detail

#endif  // GRAPHSENTRY_SRC_KERNEL_COMMON_H_
