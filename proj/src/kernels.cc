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

// OpenMP kernels. Work is split over independent output elements (or rows);
// no reduction is ever split across threads, which keeps the summation
// order fixed and the output independent of the thread count.

#include <algorithm>
#include <cmath>

#include "graphsentry/kernels.h"
#include "kernel_common.h"

namespace graphsentry::kernels {

namespace {

using namespace detail;  // NOLINT

// Below this many output elements the fork/join cost dominates.
constexpr int64_t kParallelMin = 2048;

template <typename In, typename Out, typename F>
std::vector<Out> BroadcastMap(std::span<const In> a, const Shape& a_shape,
                              std::span<const In> b, const Shape& b_shape,
                              const Shape& out, F f) {
  const int64_t n = ShapeNumElements(out);
  std::vector<Out> r(static_cast<size_t>(n));
  const In* pa = a.data();
  const In* pb = b.data();
  Out* pr = r.data();
  if (a_shape == out && b_shape == out) {
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
    for (int64_t i = 0; i < n; ++i) pr[i] = f(pa[i], pb[i]);
    return r;
  }
  const auto os = RowMajorStrides(out);
  const auto as = BroadcastStrides(a_shape, out);
  const auto bs = BroadcastStrides(b_shape, out);
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
  for (int64_t i = 0; i < n; ++i) {
    pr[i] = f(pa[BroadcastOffset(i, os, as)], pb[BroadcastOffset(i, os, bs)]);
  }
  return r;
}

template <typename T>
std::vector<T> WhereMap(std::span<const uint8_t> c, const Shape& c_shape,
                        std::span<const T> x, const Shape& x_shape,
                        std::span<const T> y, const Shape& y_shape,
                        const Shape& out) {
  const int64_t n = ShapeNumElements(out);
  std::vector<T> r(static_cast<size_t>(n));
  const auto os = RowMajorStrides(out);
  const auto cs = BroadcastStrides(c_shape, out);
  const auto xs = BroadcastStrides(x_shape, out);
  const auto ys = BroadcastStrides(y_shape, out);
  const uint8_t* pc = c.data();
  const T* px = x.data();
  const T* py = y.data();
  T* pr = r.data();
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
  for (int64_t i = 0; i < n; ++i) {
    pr[i] = pc[BroadcastOffset(i, os, cs)] ? px[BroadcastOffset(i, os, xs)]
                                           : py[BroadcastOffset(i, os, ys)];
  }
  return r;
}

// Ascending offsets (row-major) of every element covered by the reduced
// dims, plus the base offset of each output element.
struct ReduceIndex {
  std::vector<int64_t> reduced_offsets;
  std::vector<int64_t> base_offsets;
};

ReduceIndex BuildReduceIndex(const Shape& in, const ReducePlan& plan) {
  const auto strides = RowMajorStrides(in);
  ReduceIndex idx;
  idx.reduced_offsets = {0};
  idx.base_offsets = {0};
  for (size_t d = 0; d < in.size(); ++d) {
    auto& target = plan.reduced[d] ? idx.reduced_offsets : idx.base_offsets;
    std::vector<int64_t> next;
    next.reserve(target.size() * static_cast<size_t>(in[d]));
    for (int64_t prev : target) {
      for (int64_t c = 0; c < in[d]; ++c) next.push_back(prev + c * strides[d]);
    }
    target = std::move(next);
  }
  return idx;
}

template <typename T>
std::vector<T> ReduceMap(ReduceOp op, std::span<const T> x,
                         const ReduceIndex& idx) {
  const auto n = static_cast<int64_t>(idx.base_offsets.size());
  std::vector<T> r(static_cast<size_t>(n));
  const int64_t work = n * static_cast<int64_t>(idx.reduced_offsets.size());
#pragma omp parallel for schedule(static) if (work >= kParallelMin)
  for (int64_t o = 0; o < n; ++o) {
    const int64_t base = idx.base_offsets[o];
    T acc = ReduceIdentity<T>(op);
    for (int64_t off : idx.reduced_offsets) {
      const T v = x[base + off];
      if (op == ReduceOp::kSum) {
        acc = static_cast<T>(acc + v);
      } else if (op == ReduceOp::kMax) {
        acc = CombineMax(acc, v);
      } else {
        acc = CombineMin(acc, v);
      }
    }
    r[o] = acc;
  }
  return r;
}

}  // namespace

Shape BroadcastShapes(const Shape& a, const Shape& b) {
  Shape out(std::max(a.size(), b.size()));
  for (size_t i = 0; i < out.size(); ++i) {
    const int64_t da = i < out.size() - a.size() ? 1 : a[i - (out.size() - a.size())];
    const int64_t db = i < out.size() - b.size() ? 1 : b[i - (out.size() - b.size())];
    if (da != db && da != 1 && db != 1) {
      detail::ShapeError("cannot broadcast " + ShapeToString(a) + " with " +
                         ShapeToString(b));
    }
    out[i] = da == 1 ? db : da;
  }
  return out;
}

Tensor Binary(BinaryOp op, const Tensor& a, const Tensor& b) {
  const DType rt = BinaryResultType(op, a.dtype(), b.dtype());
  const Shape out = BroadcastShapes(a.shape(), b.shape());
  switch (a.dtype()) {
    case DType::kFloat32:
      if (rt == DType::kBool) {
        return Tensor::Bool(out, BroadcastMap<float, uint8_t>(
                                     a.f32(), a.shape(), b.f32(), b.shape(), out,
                                     [op](float x, float y) {
                                       return CompareScalar(op, x, y);
                                     }));
      }
      return Tensor::F32(out, BroadcastMap<float, float>(
                                  a.f32(), a.shape(), b.f32(), b.shape(), out,
                                  [op](float x, float y) {
                                    return ApplyF32(op, x, y);
                                  }));
    case DType::kInt64:
      if (rt == DType::kBool) {
        return Tensor::Bool(out, BroadcastMap<int64_t, uint8_t>(
                                     a.i64(), a.shape(), b.i64(), b.shape(), out,
                                     [op](int64_t x, int64_t y) {
                                       return CompareScalar(op, x, y);
                                     }));
      }
      if (op == BinaryOp::kDiv) CheckIntegerDivision(b.i64(), a.i64());
      return Tensor::I64(out, BroadcastMap<int64_t, int64_t>(
                                  a.i64(), a.shape(), b.i64(), b.shape(), out,
                                  [op](int64_t x, int64_t y) {
                                    return ApplyI64(op, x, y);
                                  }));
    case DType::kBool:
      return Tensor::Bool(out, BroadcastMap<uint8_t, uint8_t>(
                                   a.boolean(), a.shape(), b.boolean(), b.shape(),
                                   out, [op](uint8_t x, uint8_t y) {
                                     return op == BinaryOp::kEqual
                                                ? CompareScalar(op, x, y)
                                                : LogicScalar(op, x, y);
                                   }));
  }
  return {};
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
      return Tensor::F32(out, WhereMap<float>(cond.boolean(), cond.shape(),
                                              x.f32(), x.shape(), y.f32(),
                                              y.shape(), out));
    case DType::kInt64:
      return Tensor::I64(out, WhereMap<int64_t>(cond.boolean(), cond.shape(),
                                                x.i64(), x.shape(), y.i64(),
                                                y.shape(), out));
    case DType::kBool:
      return Tensor::Bool(out, WhereMap<uint8_t>(cond.boolean(), cond.shape(),
                                                 x.boolean(), x.shape(),
                                                 y.boolean(), y.shape(), out));
  }
  return {};
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  if (a.dtype() != DType::kFloat32 || b.dtype() != DType::kFloat32) {
    throw Error(ErrorCode::kUnsupportedDtype, "MatMul requires f32");
  }
  const MatMulPlan p = PlanMatMul(a.shape(), b.shape());
  std::vector<float> out(static_cast<size_t>(p.batch * p.m * p.n), 0.0f);
  const float* pa = a.f32().data();
  const float* pb = b.f32().data();
  float* po = out.data();
  const int64_t rows = p.batch * p.m;
  const int64_t k = p.k;
  const int64_t n = p.n;
#pragma omp parallel for schedule(static) if (rows * k * n >= kParallelMin)
  for (int64_t r = 0; r < rows; ++r) {
    const int64_t bi = r / p.m;
    const int64_t i = r % p.m;
    const float* arow = pa + p.a_offset[bi] + i * k;
    const float* bmat = pb + p.b_offset[bi];
    float* orow = po + r * n;
    // i-k-j order: each orow[j] still accumulates kk = 0, 1, ... in turn.
    for (int64_t kk = 0; kk < k; ++kk) {
      const float av = arow[kk];
      const float* brow = bmat + kk * n;
      for (int64_t j = 0; j < n; ++j) orow[j] = orow[j] + av * brow[j];
    }
  }
  return Tensor::F32(p.out_shape, std::move(out));
}

Tensor Gemm(const Tensor& a, const Tensor& b, const Tensor* c, float alpha,
            float beta, bool trans_a, bool trans_b) {
  const GemmPlan p = PlanGemm(a, b, c, trans_a, trans_b);
  std::vector<float> out(static_cast<size_t>(p.m * p.n), 0.0f);
  const float* pa = a.f32().data();
  const float* pb = b.f32().data();
  const float* pc = c ? c->f32().data() : nullptr;
  const std::vector<int64_t> os = {p.n, 1};
#pragma omp parallel for schedule(static) if (p.m * p.k * p.n >= kParallelMin)
  for (int64_t i = 0; i < p.m; ++i) {
    float* orow = out.data() + i * p.n;
    for (int64_t kk = 0; kk < p.k; ++kk) {
      const float av = pa[i * p.a_row + kk * p.a_col];
      for (int64_t j = 0; j < p.n; ++j) {
        orow[j] = orow[j] + av * pb[kk * p.b_row + j * p.b_col];
      }
    }
    for (int64_t j = 0; j < p.n; ++j) {
      float y = alpha * orow[j];
      if (pc) y = y + beta * pc[BroadcastOffset(i * p.n + j, os, p.c_strides)];
      orow[j] = y;
    }
  }
  return Tensor::F32({p.m, p.n}, std::move(out));
}

Tensor Reduce(ReduceOp op, const Tensor& x,
              const std::optional<std::vector<int64_t>>& axes, bool keepdims) {
  const ReducePlan plan = PlanReduce(x.shape(), axes, keepdims);
  const ReduceIndex idx = BuildReduceIndex(x.shape(), plan);
  switch (x.dtype()) {
    case DType::kFloat32:
      return Tensor::F32(plan.out_shape, ReduceMap<float>(op, x.f32(), idx));
    case DType::kInt64:
      return Tensor::I64(plan.out_shape, ReduceMap<int64_t>(op, x.i64(), idx));
    case DType::kBool:
      if (op == ReduceOp::kSum) {
        throw Error(ErrorCode::kUnsupportedDtype, "ReduceSum over bool");
      }
      return Tensor::Bool(plan.out_shape,
                          ReduceMap<uint8_t>(op, x.boolean(), idx));
  }
  return {};
}

Tensor Softmax(const Tensor& x, int64_t axis_attr) {
  if (x.dtype() != DType::kFloat32) {
    throw Error(ErrorCode::kUnsupportedDtype, "Softmax requires f32");
  }
  const int64_t axis = NormalizeAxis(axis_attr, x.rank());
  const AxisSplit s = SplitAtAxis(x.shape(), axis);
  std::vector<float> out(static_cast<size_t>(x.size()));
  const float* px = x.f32().data();
  float* po = out.data();
  const int64_t lanes = s.outer * s.inner;
#pragma omp parallel for schedule(static) if (lanes * s.extent >= kParallelMin)
  for (int64_t lane = 0; lane < lanes; ++lane) {
    const int64_t base = (lane / s.inner) * s.extent * s.inner + lane % s.inner;
    float mx = -std::numeric_limits<float>::infinity();
    for (int64_t e = 0; e < s.extent; ++e) {
      mx = CombineMax(mx, px[base + e * s.inner]);
    }
    float sum = 0.0f;
    for (int64_t e = 0; e < s.extent; ++e) {
      const float v = std::exp(px[base + e * s.inner] - mx);
      po[base + e * s.inner] = v;
      sum = sum + v;
    }
    for (int64_t e = 0; e < s.extent; ++e) po[base + e * s.inner] /= sum;
  }
  return Tensor::F32(x.shape(), std::move(out));
}

Tensor LayerNorm(const Tensor& x, const Tensor& scale, const Tensor* bias,
                 int64_t axis, float epsilon) {
  const LayerNormPlan p = PlanLayerNorm(x, scale, bias, axis);
  std::vector<float> out(static_cast<size_t>(x.size()));
  const float* px = x.f32().data();
  const float* ps = scale.f32().data();
  const float* pb = bias ? bias->f32().data() : nullptr;
  const auto ns = RowMajorStrides(p.normalized);
  const float width = static_cast<float>(p.width);
#pragma omp parallel for schedule(static) if (p.rows * p.width >= kParallelMin)
  for (int64_t r = 0; r < p.rows; ++r) {
    const float* row = px + r * p.width;
    float* orow = out.data() + r * p.width;
    float sum = 0.0f;
    for (int64_t j = 0; j < p.width; ++j) sum = sum + row[j];
    const float mean = sum / width;
    float sq = 0.0f;
    for (int64_t j = 0; j < p.width; ++j) {
      const float d = row[j] - mean;
      sq = sq + d * d;
    }
    const float inv = 1.0f / std::sqrt(sq / width + epsilon);
    for (int64_t j = 0; j < p.width; ++j) {
      float y = (row[j] - mean) * inv * ps[BroadcastOffset(j, ns, p.scale_strides)];
      if (pb) y = y + pb[BroadcastOffset(j, ns, p.bias_strides)];
      orow[j] = y;
    }
  }
  return Tensor::F32(x.shape(), std::move(out));
}

}  // namespace graphsentry::kernels
