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

#include "graphsentry/interpreter.h"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <type_traits>
#include <unordered_map>

#include "graphsentry/error.h"
#include "graphsentry/kernels.h"

namespace graphsentry {

namespace {

struct KernelSet {
  decltype(&kernels::Binary) binary;
  decltype(&kernels::Where) where;
  decltype(&kernels::MatMul) matmul;
  decltype(&kernels::Gemm) gemm;
  decltype(&kernels::Reduce) reduce;
  decltype(&kernels::Softmax) softmax;
  decltype(&kernels::LayerNorm) layer_norm;
};

constexpr KernelSet kParallelKernels = {
    &kernels::Binary, &kernels::Where,   &kernels::MatMul,   &kernels::Gemm,
    &kernels::Reduce, &kernels::Softmax, &kernels::LayerNorm,
};

constexpr KernelSet kReferenceKernels = {
    &kernels::reference::Binary,  &kernels::reference::Where,
    &kernels::reference::MatMul,  &kernels::reference::Gemm,
    &kernels::reference::Reduce,  &kernels::reference::Softmax,
    &kernels::reference::LayerNorm,
};

// Lexical scope: values computed here, then this graph's initializers, then
// the enclosing scope.
class Scope {
 public:
  Scope(const Scope* parent, const std::map<std::string, Tensor>* initializers)
      : parent_(parent), initializers_(initializers) {}

  const Tensor* Find(const std::string& name) const {
    if (auto it = values_.find(name); it != values_.end()) return &it->second;
    if (auto it = initializers_->find(name); it != initializers_->end()) {
      return &it->second;
    }
    return parent_ ? parent_->Find(name) : nullptr;
  }

  void Set(const std::string& name, Tensor t) { values_[name] = std::move(t); }

  // Moves a locally computed value out; other visible values are copied.
  std::optional<Tensor> Take(const std::string& name) {
    if (auto it = values_.find(name); it != values_.end()) {
      Tensor t = std::move(it->second);
      values_.erase(it);
      return t;
    }
    return Copy(name);
  }

  std::optional<Tensor> Copy(const std::string& name) const {
    if (const Tensor* t = Find(name)) return *t;
    return std::nullopt;
  }

 private:
  const Scope* parent_;
  const std::map<std::string, Tensor>* initializers_;
  std::unordered_map<std::string, Tensor> values_;
};

struct RunContext {
  const KernelSet* kernels;
  TensorMap* captured;  // null when not capturing
};

void RunGraph(const Graph& g, Scope& scope, const RunContext& ctx);

[[noreturn]] void Fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

Tensor CastTensor(const Tensor& x, int64_t to) {
  const DType target = DTypeFromOnnx(static_cast<int32_t>(to));
  const auto n = static_cast<size_t>(x.size());
  if (target == x.dtype()) return x;
  switch (target) {
    case DType::kFloat32: {
      std::vector<float> out(n);
      if (x.dtype() == DType::kInt64) {
        for (size_t i = 0; i < n; ++i) out[i] = static_cast<float>(x.i64()[i]);
      } else {
        for (size_t i = 0; i < n; ++i) out[i] = x.boolean()[i] ? 1.0f : 0.0f;
      }
      return Tensor::F32(x.shape(), std::move(out));
    }
    case DType::kInt64: {
      std::vector<int64_t> out(n);
      if (x.dtype() == DType::kFloat32) {
        for (size_t i = 0; i < n; ++i) {
          const float v = x.f32()[i];
          // 2^63 is exactly representable; anything at or beyond overflows.
          if (!std::isfinite(v) || v >= 9.2233720368547758e18f ||
              v < -9.2233720368547758e18f) {
            Fail(ErrorCode::kNumericDomain, "Cast of non-representable value");
          }
          out[i] = static_cast<int64_t>(v);
        }
      } else {
        for (size_t i = 0; i < n; ++i) out[i] = x.boolean()[i];
      }
      return Tensor::I64(x.shape(), std::move(out));
    }
    case DType::kBool: {
      std::vector<uint8_t> out(n);
      if (x.dtype() == DType::kFloat32) {
        for (size_t i = 0; i < n; ++i) out[i] = x.f32()[i] != 0.0f;
      } else {
        for (size_t i = 0; i < n; ++i) out[i] = x.i64()[i] != 0;
      }
      return Tensor::Bool(x.shape(), std::move(out));
    }
  }
  return {};
}

// Element-type-agnostic gather of `count` contiguous runs.
template <typename T>
std::vector<T> CopyRuns(std::span<const T> src,
                        const std::vector<std::pair<int64_t, int64_t>>& runs) {
  std::vector<T> out;
  for (const auto& [start, len] : runs) {
    out.insert(out.end(), src.begin() + start, src.begin() + start + len);
  }
  return out;
}

Tensor FromRuns(const Tensor& src, Shape shape,
                const std::vector<std::pair<int64_t, int64_t>>& runs) {
  switch (src.dtype()) {
    case DType::kFloat32: return Tensor::F32(std::move(shape), CopyRuns(src.f32(), runs));
    case DType::kInt64: return Tensor::I64(std::move(shape), CopyRuns(src.i64(), runs));
    case DType::kBool: return Tensor::Bool(std::move(shape), CopyRuns(src.boolean(), runs));
  }
  return {};
}

int64_t NormalizeAxis(int64_t axis, int64_t rank) {
  if (axis < -rank || axis >= rank) {
    Fail(ErrorCode::kShapeMismatch, "axis " + std::to_string(axis) +
                                        " out of range for rank " +
                                        std::to_string(rank));
  }
  return axis < 0 ? axis + rank : axis;
}

Tensor SliceTensor(const Node& n, const Tensor& x) {
  const auto starts = n.IntsAttr("starts");
  const auto ends = n.IntsAttr("ends");
  if (!starts || !ends || starts->size() != ends->size()) {
    Fail(ErrorCode::kInvalidGraph, "Slice needs matching starts/ends");
  }
  std::vector<int64_t> axes = n.IntsAttr("axes").value_or(std::vector<int64_t>{});
  if (axes.empty()) {
    for (size_t i = 0; i < starts->size(); ++i) axes.push_back(static_cast<int64_t>(i));
  }
  std::vector<int64_t> steps =
      n.IntsAttr("steps").value_or(std::vector<int64_t>(starts->size(), 1));
  if (axes.size() != starts->size() || steps.size() != starts->size()) {
    Fail(ErrorCode::kInvalidGraph, "Slice attribute lengths differ");
  }
  const Shape& in = x.shape();
  const int64_t rank = x.rank();
  std::vector<int64_t> begin(rank, 0), step(rank, 1);
  Shape out = in;
  std::vector<bool> seen(rank, false);
  for (size_t i = 0; i < axes.size(); ++i) {
    const int64_t ax = NormalizeAxis(axes[i], rank);
    if (seen[ax]) Fail(ErrorCode::kInvalidGraph, "Slice repeats an axis");
    seen[ax] = true;
    const int64_t dim = in[ax];
    const int64_t st = steps[i];
    if (st == 0) Fail(ErrorCode::kInvalidGraph, "Slice step of zero");
    int64_t s = (*starts)[i];
    int64_t e = (*ends)[i];
    if (s < 0) s += dim;
    if (e < 0) e += dim;
    if (st > 0) {
      s = std::clamp<int64_t>(s, 0, dim);
      e = std::clamp<int64_t>(e, 0, dim);
    } else {
      s = std::clamp<int64_t>(s, 0, dim - 1);
      e = std::clamp<int64_t>(e, -1, dim - 1);
    }
    int64_t len = st > 0 ? (e - s + st - 1) / st : (s - e + (-st) - 1) / (-st);
    if (len < 0 || dim == 0) len = 0;
    begin[ax] = s;
    step[ax] = st;
    out[ax] = len;
  }
  // Gather as contiguous runs; a unit-step innermost axis yields one run per
  // row.
  const int64_t total = ShapeNumElements(out);
  std::vector<int64_t> in_strides(rank, 1);
  for (int64_t d = rank - 2; d >= 0; --d) in_strides[d] = in_strides[d + 1] * in[d + 1];
  std::vector<std::pair<int64_t, int64_t>> runs;
  if (total == 0) return FromRuns(x, out, runs);
  const bool row_runs = rank > 0 && step[rank - 1] == 1;
  const int64_t row = row_runs ? out[rank - 1] : 1;
  const int64_t outer_axes = row_runs ? rank - 1 : rank;
  runs.reserve(static_cast<size_t>(total / row));
  std::vector<int64_t> coord(rank, 0);
  for (int64_t i = 0; i < total; i += row) {
    int64_t off = 0;
    for (int64_t d = 0; d < rank; ++d) off += (begin[d] + coord[d] * step[d]) * in_strides[d];
    if (!runs.empty() && runs.back().first + runs.back().second == off) {
      runs.back().second += row;
    } else {
      runs.emplace_back(off, row);
    }
    for (int64_t d = outer_axes - 1; d >= 0; --d) {
      if (++coord[d] < out[d]) break;
      coord[d] = 0;
    }
  }
  return FromRuns(x, out, runs);
}

Tensor ConcatTensors(const std::vector<const Tensor*>& parts, int64_t axis_attr) {
  if (parts.empty()) Fail(ErrorCode::kInvalidGraph, "Concat without inputs");
  const Tensor& first = *parts[0];
  const int64_t rank = first.rank();
  const int64_t axis = NormalizeAxis(axis_attr, rank);
  Shape out = first.shape();
  out[axis] = 0;
  for (const Tensor* p : parts) {
    if (p->dtype() != first.dtype() || p->rank() != rank) {
      Fail(ErrorCode::kShapeMismatch, "Concat inputs differ in dtype or rank");
    }
    for (int64_t d = 0; d < rank; ++d) {
      if (d != axis && p->shape()[d] != first.shape()[d]) {
        Fail(ErrorCode::kShapeMismatch,
             "Concat inputs " + ShapeToString(first.shape()) + " and " +
                 ShapeToString(p->shape()) + " disagree off-axis");
      }
    }
    out[axis] += p->shape()[axis];
  }
  int64_t outer = 1;
  for (int64_t d = 0; d < axis; ++d) outer *= out[d];
  int64_t inner = 1;
  for (int64_t d = axis + 1; d < rank; ++d) inner *= out[d];
  // Produce the runs over a virtual concatenated buffer per dtype.
  auto build = [&](auto tag) {
    using T = decltype(tag);
    std::vector<T> data;
    data.reserve(static_cast<size_t>(ShapeNumElements(out)));
    for (int64_t o = 0; o < outer; ++o) {
      for (const Tensor* p : parts) {
        const int64_t chunk = p->shape()[axis] * inner;
        std::span<const T> src;
        if constexpr (std::is_same_v<T, float>) src = p->f32();
        else if constexpr (std::is_same_v<T, int64_t>) src = p->i64();
        else src = p->boolean();
        data.insert(data.end(), src.begin() + o * chunk, src.begin() + (o + 1) * chunk);
      }
    }
    return data;
  };
  switch (first.dtype()) {
    case DType::kFloat32: return Tensor::F32(out, build(float{}));
    case DType::kInt64: return Tensor::I64(out, build(int64_t{}));
    case DType::kBool: return Tensor::Bool(out, build(uint8_t{}));
  }
  return {};
}

Tensor GatherTensor(const Tensor& data, const Tensor& indices, int64_t axis_attr) {
  if (indices.dtype() != DType::kInt64) {
    Fail(ErrorCode::kUnsupportedDtype, "Gather indices must be i64");
  }
  const int64_t rank = data.rank();
  if (rank == 0) Fail(ErrorCode::kShapeMismatch, "Gather on a scalar");
  const int64_t axis = NormalizeAxis(axis_attr, rank);
  const int64_t dim = data.shape()[axis];
  Shape out(data.shape().begin(), data.shape().begin() + axis);
  out.insert(out.end(), indices.shape().begin(), indices.shape().end());
  out.insert(out.end(), data.shape().begin() + axis + 1, data.shape().end());
  int64_t outer = 1;
  for (int64_t d = 0; d < axis; ++d) outer *= data.shape()[d];
  int64_t inner = 1;
  for (int64_t d = axis + 1; d < rank; ++d) inner *= data.shape()[d];
  std::vector<std::pair<int64_t, int64_t>> runs;
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t idx : indices.i64()) {
      if (idx < -dim || idx >= dim) {
        Fail(ErrorCode::kShapeMismatch,
             "Gather index " + std::to_string(idx) + " out of range for extent " +
                 std::to_string(dim));
      }
      const int64_t i = idx < 0 ? idx + dim : idx;
      runs.emplace_back((o * dim + i) * inner, inner);
    }
  }
  return FromRuns(data, out, runs);
}

std::optional<std::vector<int64_t>> ReduceAxes(const Node& n,
                                               const Scope& scope) {
  if (n.inputs.size() > 1 && !n.inputs[1].empty()) {
    const Tensor* axes = scope.Find(n.inputs[1]);
    if (!axes || axes->dtype() != DType::kInt64) {
      Fail(ErrorCode::kInvalidGraph, "reduce axes input must be i64");
    }
    return std::vector<int64_t>(axes->i64().begin(), axes->i64().end());
  }
  return n.IntsAttr("axes");
}

// Single-result helper; a braced list would copy the tensor.
std::vector<Tensor> One(Tensor t) {
  std::vector<Tensor> out;
  out.push_back(std::move(t));
  return out;
}

std::vector<Tensor> EvalNode(const Node& n, Scope& scope, const RunContext& ctx) {
  auto input = [&](size_t slot) -> const Tensor& {
    if (slot >= n.inputs.size() || n.inputs[slot].empty()) {
      Fail(ErrorCode::kMissingInput, "input slot " + std::to_string(slot) + " not wired");
    }
    const Tensor* t = scope.Find(n.inputs[slot]);
    if (!t) Fail(ErrorCode::kMissingInput, "value '" + n.inputs[slot] + "' unavailable");
    return *t;
  };
  auto optional_input = [&](size_t slot) -> const Tensor* {
    if (slot >= n.inputs.size() || n.inputs[slot].empty()) return nullptr;
    return &input(slot);
  };
  const KernelSet& k = *ctx.kernels;
  const std::string& op = n.op_type;

  if (op == "Constant") {
    if (const Tensor* t = n.TensorAttr("value")) return One(*t);
    if (n.HasAttr("value_float")) return One(Tensor::ScalarF32(n.FloatAttr("value_float", 0)));
    if (n.HasAttr("value_int")) return One(Tensor::ScalarI64(n.IntAttr("value_int", 0)));
    if (auto ints = n.IntsAttr("value_ints")) {
      const auto len = static_cast<int64_t>(ints->size());
      return One(Tensor::I64({len}, *ints));
    }
    Fail(ErrorCode::kInvalidGraph, "Constant without a supported value");
  }
  if (op == "Identity") return One(input(0));
  if (op == "Add") return One(k.binary(kernels::BinaryOp::kAdd, input(0), input(1)));
  if (op == "Sub") return One(k.binary(kernels::BinaryOp::kSub, input(0), input(1)));
  if (op == "Mul") return One(k.binary(kernels::BinaryOp::kMul, input(0), input(1)));
  if (op == "Div") return One(k.binary(kernels::BinaryOp::kDiv, input(0), input(1)));
  if (op == "Equal") return One(k.binary(kernels::BinaryOp::kEqual, input(0), input(1)));
  if (op == "Greater") return One(k.binary(kernels::BinaryOp::kGreater, input(0), input(1)));
  if (op == "And") return One(k.binary(kernels::BinaryOp::kAnd, input(0), input(1)));
  if (op == "Or") return One(k.binary(kernels::BinaryOp::kOr, input(0), input(1)));
  if (op == "Not") {
    const Tensor& x = input(0);
    std::vector<uint8_t> out(x.boolean().begin(), x.boolean().end());
    for (uint8_t& b : out) b = b ? 0 : 1;
    return One(Tensor::Bool(x.shape(), std::move(out)));
  }
  if (op == "Relu") {
    const Tensor& x = input(0);
    if (x.dtype() == DType::kFloat32) {
      std::vector<float> out(x.f32().begin(), x.f32().end());
      for (float& v : out) v = v < 0.0f ? 0.0f : v;
      return One(Tensor::F32(x.shape(), std::move(out)));
    }
    std::vector<int64_t> out(x.i64().begin(), x.i64().end());
    for (int64_t& v : out) v = v < 0 ? 0 : v;
    return One(Tensor::I64(x.shape(), std::move(out)));
  }
  if (op == "Where") return One(k.where(input(0), input(1), input(2)));
  if (op == "Cast") {
    if (!n.HasAttr("to")) Fail(ErrorCode::kInvalidGraph, "Cast without 'to'");
    return One(CastTensor(input(0), n.IntAttr("to", 0)));
  }
  if (op == "MatMul") return One(k.matmul(input(0), input(1)));
  if (op == "Gemm") {
    return One(k.gemm(input(0), input(1), optional_input(2), n.FloatAttr("alpha", 1.0f),
                   n.FloatAttr("beta", 1.0f), n.IntAttr("transA", 0) != 0,
                   n.IntAttr("transB", 0) != 0));
  }
  if (op == "Slice") return One(SliceTensor(n, input(0)));
  if (op == "Concat") {
    std::vector<const Tensor*> parts;
    for (size_t i = 0; i < n.inputs.size(); ++i) parts.push_back(&input(i));
    if (!n.HasAttr("axis")) Fail(ErrorCode::kInvalidGraph, "Concat without axis");
    return One(ConcatTensors(parts, n.IntAttr("axis", 0)));
  }
  if (op == "Gather") return One(GatherTensor(input(0), input(1), n.IntAttr("axis", 0)));
  if (op == "Shape") {
    const Tensor& x = input(0);
    return One(Tensor::I64({x.rank()}, x.shape()));
  }
  if (op == "ReduceSum" || op == "ReduceMax" || op == "ReduceMin") {
    const auto rop = op == "ReduceSum"   ? kernels::ReduceOp::kSum
                     : op == "ReduceMax" ? kernels::ReduceOp::kMax
                                         : kernels::ReduceOp::kMin;
    return One(k.reduce(rop, input(0), ReduceAxes(n, scope), n.IntAttr("keepdims", 1) != 0));
  }
  if (op == "Softmax") return One(k.softmax(input(0), n.IntAttr("axis", -1)));
  if (op == "LayerNormalization") {
    if (n.outputs.size() > 1) {
      Fail(ErrorCode::kUnsupportedFeature, "LayerNormalization Mean/InvStdDev outputs");
    }
    return One(k.layer_norm(input(0), input(1), optional_input(2), n.IntAttr("axis", -1),
                         n.FloatAttr("epsilon", kDefaultLayerNormEpsilon)));
  }
  if (op == "If") {
    const Tensor& cond = input(0);
    if (cond.dtype() != DType::kBool || cond.size() != 1) {
      Fail(ErrorCode::kShapeMismatch, "If condition must be a single bool");
    }
    GraphPtr branch = n.GraphAttr(cond.boolean()[0] ? "then_branch" : "else_branch");
    if (!branch) Fail(ErrorCode::kInvalidGraph, "If branch missing");
    Scope inner(&scope, &branch->initializers);
    RunGraph(*branch, inner, ctx);
    std::vector<Tensor> outs;
    for (const std::string& o : branch->outputs) {
      const bool once = std::count(branch->outputs.begin(), branch->outputs.end(), o) == 1;
      std::optional<Tensor> t = once ? inner.Take(o) : inner.Copy(o);
      if (!t) Fail(ErrorCode::kMissingInput, "branch output '" + o + "' unavailable");
      outs.push_back(std::move(*t));
    }
    return outs;
  }
  Fail(ErrorCode::kUnsupportedOperator, op);
}

void RunGraph(const Graph& g, Scope& scope, const RunContext& ctx) {
  for (size_t idx : TopoOrder(g)) {
    const Node& n = g.nodes[idx];
    std::vector<Tensor> outs;
    try {
      outs = EvalNode(n, scope, ctx);
    } catch (const Error& e) {
      throw Error(e.code(), "node '" + n.name + "' (" + n.op_type + "): " + e.what());
    }
    if (outs.size() != n.outputs.size()) {
      throw Error(ErrorCode::kInvalidGraph,
                  "node '" + n.name + "' produced " + std::to_string(outs.size()) +
                      " outputs, declares " + std::to_string(n.outputs.size()));
    }
    for (size_t i = 0; i < outs.size(); ++i) {
      if (ctx.captured) (*ctx.captured)[n.outputs[i]] = outs[i];
      scope.Set(n.outputs[i], std::move(outs[i]));
    }
  }
}

// Checks `shape` against a declared signature, binding symbols as it goes.
// Returns false on a mismatch. With `bind` false an unseen symbol raises
// kUnboundSymbolicDim instead of binding.
bool MatchSignature(const ValueInfo& vi, const Shape& shape,
                    std::map<std::string, int64_t>& symbols, bool bind) {
  if (shape.size() != vi.shape.size()) return false;
  for (size_t d = 0; d < vi.shape.size(); ++d) {
    const Dim& dim = vi.shape[d];
    if (!dim.symbolic()) {
      if (dim.value != shape[d]) return false;
      continue;
    }
    if (dim.param == "?") continue;
    auto it = symbols.find(dim.param);
    if (it == symbols.end()) {
      if (!bind) {
        throw Error(ErrorCode::kUnboundSymbolicDim,
                    "symbol '" + dim.param + "' of defaulted input '" + vi.name +
                        "' is not bound by any supplied input");
      }
      symbols.emplace(dim.param, shape[d]);
    } else if (it->second != shape[d]) {
      return false;
    }
  }
  return true;
}

void BindInputs(const Graph& g, const TensorMap& provided, Scope& scope) {
  for (const auto& [name, t] : provided) {
    if (!g.FindInput(name)) {
      throw Error(ErrorCode::kInvalidArgument, "'" + name + "' is not a graph input");
    }
  }
  std::map<std::string, int64_t> symbols;
  std::vector<const ValueInfo*> defaulted;
  for (const ValueInfo& vi : g.inputs) {
    auto it = provided.find(vi.name);
    if (it == provided.end()) {
      if (!g.initializers.count(vi.name)) {
        throw Error(ErrorCode::kMissingInput, "graph input '" + vi.name + "' is not bound");
      }
      defaulted.push_back(&vi);
      continue;
    }
    const Tensor& t = it->second;
    if (t.dtype() != vi.dtype || !MatchSignature(vi, t.shape(), symbols, true)) {
      throw Error(ErrorCode::kShapeMismatch,
                  "input '" + vi.name + "' expects " + ValueInfoToString(vi) + ", got " +
                      TensorSummary(t));
    }
    scope.Set(vi.name, t);
  }
  for (const ValueInfo* vi : defaulted) {
    const Tensor& t = g.initializers.at(vi->name);
    if (t.dtype() != vi->dtype || !MatchSignature(*vi, t.shape(), symbols, false)) {
      throw Error(ErrorCode::kShapeMismatch,
                  "default for '" + vi->name + "' does not fit " + ValueInfoToString(*vi));
    }
  }
}

}  // namespace

ExecutionResult Execute(const ExecutionRequest& request) {
  if (!request.graph) throw Error(ErrorCode::kInvalidArgument, "request has no graph");
  const Graph& g = *request.graph;
  if (request.validate) CheckValid(g);
  const auto start = std::chrono::steady_clock::now();
  ExecutionResult result;
  RunContext ctx{request.backend == KernelBackend::kReference ? &kReferenceKernels
                                                              : &kParallelKernels,
                 request.capture_intermediates ? &result.intermediates : nullptr};
  Scope scope(nullptr, &g.initializers);
  BindInputs(g, request.inputs, scope);
  RunGraph(g, scope, ctx);
  for (const std::string& o : g.outputs) {
    const Tensor* t = scope.Find(o);
    if (!t) throw Error(ErrorCode::kMissingInput, "graph output '" + o + "' unavailable");
    result.outputs[o] = *t;
  }
  result.elapsed_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return result;
}

ExecutionResult Execute(const Graph& graph, TensorMap inputs, bool capture_intermediates) {
  ExecutionRequest req;
  req.graph = &graph;
  req.inputs = std::move(inputs);
  req.capture_intermediates = capture_intermediates;
  return Execute(req);
}

bool ComparisonReport::all_pass() const {
  return std::all_of(outputs.begin(), outputs.end(),
                     [](const OutputComparison& c) { return c.pass; });
}

namespace {

OutputComparison CompareTensors(const std::string& name, const Tensor& a, const Tensor& b,
                                const ComparisonTolerance& tol) {
  OutputComparison c;
  c.name = name;
  if (a.dtype() != b.dtype() || a.shape() != b.shape()) {
    c.note = TensorSummary(a) + " vs " + TensorSummary(b);
    c.differing_elements = std::max(a.size(), b.size());
    return c;
  }
  const auto n = static_cast<size_t>(a.size());
  for (size_t i = 0; i < n; ++i) {
    bool same = false;
    double diff = 0.0;
    switch (a.dtype()) {
      case DType::kFloat32: {
        const float x = a.f32()[i];
        const float y = b.f32()[i];
        const bool bits = std::bit_cast<uint32_t>(x) == std::bit_cast<uint32_t>(y);
        if (tol.mode == ComparisonTolerance::Mode::kBitwise) {
          same = bits;
        } else if (std::isnan(x) || std::isnan(y)) {
          same = std::isnan(x) && std::isnan(y);
        } else if (std::isinf(x) || std::isinf(y)) {
          same = x == y;
        } else {
          const double ad = std::fabs(static_cast<double>(x) - y);
          const double scale = std::max({std::fabs(static_cast<double>(x)),
                                         std::fabs(static_cast<double>(y)), 1.0});
          same = ad <= tol.eps * scale;
        }
        if (std::isfinite(x) && std::isfinite(y)) {
          diff = std::fabs(static_cast<double>(x) - y);
        } else if (!bits) {
          diff = std::numeric_limits<double>::infinity();
        }
        break;
      }
      case DType::kInt64:
        same = a.i64()[i] == b.i64()[i];
        diff = std::fabs(static_cast<double>(a.i64()[i]) - static_cast<double>(b.i64()[i]));
        break;
      case DType::kBool:
        same = a.boolean()[i] == b.boolean()[i];
        diff = same ? 0.0 : 1.0;
        break;
    }
    if (!same) ++c.differing_elements;
    c.max_abs_diff = std::max(c.max_abs_diff, diff);
  }
  c.pass = c.differing_elements == 0;
  return c;
}

}  // namespace

ComparisonReport CompareRuns(const ExecutionResult& a, const ExecutionResult& b,
                             const ComparisonTolerance& tolerance) {
  if (a.outputs.size() != b.outputs.size() ||
      !std::equal(a.outputs.begin(), a.outputs.end(), b.outputs.begin(),
                  [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw Error(ErrorCode::kSignatureMismatch, "runs expose different output names");
  }
  ComparisonReport report;
  for (const auto& [name, ta] : a.outputs) {
    report.outputs.push_back(CompareTensors(name, ta, b.outputs.at(name), tolerance));
  }
  return report;
}

}  // namespace graphsentry
