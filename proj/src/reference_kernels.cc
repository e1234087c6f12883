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

// Serial reference kernels. Deliberately naive: odometer-style index walks,
// textbook triple loops, no threading.

#include <cmath>

#include "graphsentry/kernels.h"
#include "kernel_common.h"

namespace graphsentry::kernels::reference {

namespace {

using namespace detail;  // NOLINT

// Row-major odometer over `shape` that tracks one offset per operand.
class Odometer {
 public:
  Odometer(const Shape& shape, std::vector<std::vector<int64_t>> strides)
      : shape_(shape), strides_(std::move(strides)),
        coord_(shape.size(), 0), offsets_(strides_.size(), 0) {}

  int64_t offset(size_t operand) const { return offsets_[operand]; }

  void Advance() {
    for (int64_t d = static_cast<int64_t>(shape_.size()) - 1; d >= 0; --d) {
      if (++coord_[d] < shape_[d]) {
        for (size_t o = 0; o < strides_.size(); ++o) offsets_[o] += strides_[o][d];
        return;
      }
      for (size_t o = 0; o < strides_.size(); ++o) {
        offsets_[o] -= strides_[o][d] * (shape_[d] - 1);
      }
      coord_[d] = 0;
    }
  }

 private:
  Shape shape_;
  std::vector<std::vector<int64_t>> strides_;
  std::vector<int64_t> coord_;
  std::vector<int64_t> offsets_;
};

template <typename In, typename Out, typename F>
std::vector<Out> Map2(std::span<const In> a, const Shape& a_shape,
                      std::span<const In> b, const Shape& b_shape,
                      const Shape& out, F f) {
  const int64_t n = ShapeNumElements(out);
  std::vector<Out> r(static_cast<size_t>(n));
  Odometer it(out, {BroadcastStrides(a_shape, out), BroadcastStrides(b_shape, out)});
  for (int64_t i = 0; i < n; ++i) {
    r[i] = f(a[it.offset(0)], b[it.offset(1)]);
    it.Advance();
  }
  return r;
}

template <typename T>
std::vector<T> Select(std::span<const uint8_t> c, const Shape& c_shape,
                      std::span<const T> x, const Shape& x_shape,
                      std::span<const T> y, const Shape& y_shape,
                      const Shape& out) {
  const int64_t n = ShapeNumElements(out);
  std::vector<T> r(static_cast<size_t>(n));
  Odometer it(out, {BroadcastStrides(c_shape, out), BroadcastStrides(x_shape, out),
                    BroadcastStrides(y_shape, out)});
  for (int64_t i = 0; i < n; ++i) {
    r[i] = c[it.offset(0)] ? x[it.offset(1)] : y[it.offset(2)];
    it.Advance();
  }
  return r;
}

template <typename T>
std::vector<T> ReduceScan(ReduceOp op, std::span<const T> x, const Shape& in,
                          const ReducePlan& plan) {
  // Output strides laid over the input rank; zero on reduced dims.
  Shape kept;
  for (size_t d = 0; d < in.size(); ++d) {
    kept.push_back(plan.reduced[d] ? 1 : in[d]);
  }
  std::vector<int64_t> out_strides = RowMajorStrides(kept);
  for (size_t d = 0; d < in.size(); ++d) {
    if (plan.reduced[d]) out_strides[d] = 0;
  }
  std::vector<T> r(static_cast<size_t>(ShapeNumElements(plan.out_shape)),
                   ReduceIdentity<T>(op));
  Odometer it(in, {out_strides});
  for (size_t i = 0; i < x.size(); ++i) {
    T& acc = r[it.offset(0)];
    if (op == ReduceOp::kSum) {
      acc = static_cast<T>(acc + x[i]);
    } else if (op == ReduceOp::kMax) {
      acc = CombineMax(acc, x[i]);
    } else {
      acc = CombineMin(acc, x[i]);
    }
    it.Advance();
  }
  return r;
}

}  // namespace

Tensor Binary(BinaryOp op, const Tensor& a, const Tensor& b) {
  const DType rt = BinaryResultType(op, a.dtype(), b.dtype());
  const Shape out = BroadcastShapes(a.shape(), b.shape());
  if (a.dtype() == DType::kFloat32) {
    if (rt == DType::kBool) {
      return Tensor::Bool(out, Map2<float, uint8_t>(
                                   a.f32(), a.shape(), b.f32(), b.shape(), out,
                                   [op](float x, float y) { return CompareScalar(op, x, y); }));
    }
    return Tensor::F32(out, Map2<float, float>(
                                a.f32(), a.shape(), b.f32(), b.shape(), out,
                                [op](float x, float y) { return ApplyF32(op, x, y); }));
  }
  if (a.dtype() == DType::kInt64) {
    if (rt == DType::kBool) {
      return Tensor::Bool(out, Map2<int64_t, uint8_t>(
                                   a.i64(), a.shape(), b.i64(), b.shape(), out,
                                   [op](int64_t x, int64_t y) { return CompareScalar(op, x, y); }));
    }
    if (op == BinaryOp::kDiv) CheckIntegerDivision(b.i64(), a.i64());
    return Tensor::I64(out, Map2<int64_t, int64_t>(
                                a.i64(), a.shape(), b.i64(), b.shape(), out,
                                [op](int64_t x, int64_t y) { return ApplyI64(op, x, y); }));
  }
  return Tensor::Bool(out, Map2<uint8_t, uint8_t>(
                               a.boolean(), a.shape(), b.boolean(), b.shape(), out,
                               [op](uint8_t x, uint8_t y) {
                                 return op == BinaryOp::kEqual ? CompareScalar(op, x, y)
                                                               : LogicScalar(op, x, y);
                               }));
}

Tensor Where(const Tensor& cond, const Tensor& x, const Tensor& y) {
  if (cond.dtype() != DType::kBool) {
    throw Error(ErrorCode::kUnsupportedDtype, "Where condition must be bool");
  }
  if (x.dtype() != y.dtype()) {
    throw Error(ErrorCode::kUnsupportedDtype, "Where branches differ in dtype");
  }
  const Shape out =
      BroadcastShapes(BroadcastShapes(cond.shape(), x.shape()), y.shape());
  switch (x.dtype()) {
    case DType::kFloat32:
      return Tensor::F32(out, Select<float>(cond.boolean(), cond.shape(), x.f32(),
                                            x.shape(), y.f32(), y.shape(), out));
    case DType::kInt64:
      return Tensor::I64(out, Select<int64_t>(cond.boolean(), cond.shape(), x.i64(),
                                              x.shape(), y.i64(), y.shape(), out));
    case DType::kBool:
      return Tensor::Bool(out, Select<uint8_t>(cond.boolean(), cond.shape(),
                                               x.boolean(), x.shape(), y.boolean(),
                                               y.shape(), out));
  }
  return {};
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  if (a.dtype() != DType::kFloat32 || b.dtype() != DType::kFloat32) {
    throw Error(ErrorCode::kUnsupportedDtype, "MatMul requires f32");
  }
  const MatMulPlan p = PlanMatMul(a.shape(), b.shape());
  std::vector<float> out(static_cast<size_t>(p.batch * p.m * p.n));
  auto av = a.f32();
  auto bv = b.f32();
  for (int64_t bi = 0; bi < p.batch; ++bi) {
    for (int64_t i = 0; i < p.m; ++i) {
      for (int64_t j = 0; j < p.n; ++j) {
        float acc = 0.0f;
        for (int64_t kk = 0; kk < p.k; ++kk) {
          acc = acc + av[p.a_offset[bi] + i * p.k + kk] *
                          bv[p.b_offset[bi] + kk * p.n + j];
        }
        out[(bi * p.m + i) * p.n + j] = acc;
      }
    }
  }
  return Tensor::F32(p.out_shape, std::move(out));
}

Tensor Gemm(const Tensor& a, const Tensor& b, const Tensor* c, float alpha,
            float beta, bool trans_a, bool trans_b) {
  const GemmPlan p = PlanGemm(a, b, c, trans_a, trans_b);
  std::vector<float> out(static_cast<size_t>(p.m * p.n));
  auto av = a.f32();
  auto bv = b.f32();
  const std::vector<int64_t> os = {p.n, 1};
  for (int64_t i = 0; i < p.m; ++i) {
    for (int64_t j = 0; j < p.n; ++j) {
      float acc = 0.0f;
      for (int64_t kk = 0; kk < p.k; ++kk) {
        acc = acc + av[i * p.a_row + kk * p.a_col] * bv[kk * p.b_row + j * p.b_col];
      }
      float y = alpha * acc;
      if (c) y = y + beta * c->f32()[BroadcastOffset(i * p.n + j, os, p.c_strides)];
      out[i * p.n + j] = y;
    }
  }
  return Tensor::F32({p.m, p.n}, std::move(out));
}

Tensor Reduce(ReduceOp op, const Tensor& x,
              const std::optional<std::vector<int64_t>>& axes, bool keepdims) {
  const ReducePlan plan = PlanReduce(x.shape(), axes, keepdims);
  switch (x.dtype()) {
    case DType::kFloat32:
      return Tensor::F32(plan.out_shape, ReduceScan<float>(op, x.f32(), x.shape(), plan));
    case DType::kInt64:
      return Tensor::I64(plan.out_shape, ReduceScan<int64_t>(op, x.i64(), x.shape(), plan));
    case DType::kBool:
      if (op == ReduceOp::kSum) {
        throw Error(ErrorCode::kUnsupportedDtype, "ReduceSum over bool");
      }
      return Tensor::Bool(plan.out_shape,
                          ReduceScan<uint8_t>(op, x.boolean(), x.shape(), plan));
  }
  return {};
}

Tensor Softmax(const Tensor& x, int64_t axis_attr) {
  if (x.dtype() != DType::kFloat32) {
    throw Error(ErrorCode::kUnsupportedDtype, "Softmax requires f32");
  }
  const int64_t axis = NormalizeAxis(axis_attr, x.rank());
  const AxisSplit s = SplitAtAxis(x.shape(), axis);
  auto xv = x.f32();
  std::vector<float> out(xv.size());
  for (int64_t o = 0; o < s.outer; ++o) {
    for (int64_t in = 0; in < s.inner; ++in) {
      auto at = [&](int64_t e) { return (o * s.extent + e) * s.inner + in; };
      float mx = -std::numeric_limits<float>::infinity();
      for (int64_t e = 0; e < s.extent; ++e) mx = CombineMax(mx, xv[at(e)]);
      float sum = 0.0f;
      for (int64_t e = 0; e < s.extent; ++e) {
        out[at(e)] = std::exp(xv[at(e)] - mx);
        sum = sum + out[at(e)];
      }
      for (int64_t e = 0; e < s.extent; ++e) out[at(e)] = out[at(e)] / sum;
    }
  }
  return Tensor::F32(x.shape(), std::move(out));
}

Tensor LayerNorm(const Tensor& x, const Tensor& scale, const Tensor* bias,
                 int64_t axis, float epsilon) {
  const LayerNormPlan p = PlanLayerNorm(x, scale, bias, axis);
  auto xv = x.f32();
  std::vector<float> out(xv.size());
  const auto ns = RowMajorStrides(p.normalized);
  const float width = static_cast<float>(p.width);
  for (int64_t r = 0; r < p.rows; ++r) {
    float sum = 0.0f;
    for (int64_t j = 0; j < p.width; ++j) sum = sum + xv[r * p.width + j];
    const float mean = sum / width;
    float sq = 0.0f;
    for (int64_t j = 0; j < p.width; ++j) {
      const float d = xv[r * p.width + j] - mean;
      sq = sq + d * d;
    }
    const float inv = 1.0f / std::sqrt(sq / width + epsilon);
    for (int64_t j = 0; j < p.width; ++j) {
      float y = (xv[r * p.width + j] - mean) * inv *
                scale.f32()[BroadcastOffset(j, ns, p.scale_strides)];
      if (bias) y = y + bias->f32()[BroadcastOffset(j, ns, p.bias_strides)];
      out[r * p.width + j] = y;
    }
  }
  return Tensor::F32(x.shape(), std::move(out));
}

}  // namespace graphsentry::kernels::reference
