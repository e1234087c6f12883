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

// Numeric kernels behind the interpreter.
//
// Two implementations share one contract. graphsentry::kernels is
// OpenMP-parallel over independent output elements; kernels::reference is a
// plain serial version kept for cross-checking and benchmarking. Every
// summation runs in ascending index order in single precision, so both give
// bit-identical results regardless of thread count.

#ifndef GRAPHSENTRY_KERNELS_H_
#define GRAPHSENTRY_KERNELS_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "graphsentry/tensor.h"

namespace graphsentry::kernels {

enum class BinaryOp { kAdd, kSub, kMul, kDiv, kEqual, kGreater, kAnd, kOr };
enum class ReduceOp { kSum, kMax, kMin };

// Numpy-style broadcast. Throws kShapeMismatch.
Shape BroadcastShapes(const Shape& a, const Shape& b);

Tensor Binary(BinaryOp op, const Tensor& a, const Tensor& b);
Tensor Where(const Tensor& cond, const Tensor& x, const Tensor& y);
// Numpy matmul semantics: batch dims broadcast, rank-1 operands promoted.
Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Gemm(const Tensor& a, const Tensor& b, const Tensor* c, float alpha,
            float beta, bool trans_a, bool trans_b);
// Absent axes reduce everything. Empty reductions yield the identity
// (0, -inf / +inf, false / true).
Tensor Reduce(ReduceOp op, const Tensor& x,
              const std::optional<std::vector<int64_t>>& axes, bool keepdims);
Tensor Softmax(const Tensor& x, int64_t axis);
// Normalizes over dims [axis, rank).
Tensor LayerNorm(const Tensor& x, const Tensor& scale, const Tensor* bias,
                 int64_t axis, float epsilon);

namespace reference {

Tensor Binary(BinaryOp op, const Tensor& a, const Tensor& b);
Tensor Where(const Tensor& cond, const Tensor& x, const Tensor& y);
Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Gemm(const Tensor& a, const Tensor& b, const Tensor* c, float alpha,
            float beta, bool trans_a, bool trans_b);
Tensor Reduce(ReduceOp op, const Tensor& x,
              const std::optional<std::vector<int64_t>>& axes, bool keepdims);
Tensor Softmax(const Tensor& x, int64_t axis);
Tensor LayerNorm(const Tensor& x, const Tensor& scale, const Tensor* bias,
                 int64_t axis, float epsilon);

}  // namespace reference

}  // namespace graphsentry::kernels

#endif  // GRAPHSENTRY_KERNELS_H_
