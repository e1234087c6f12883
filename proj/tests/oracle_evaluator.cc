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


#include "oracle_evaluator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

namespace graphsentry::testing {

namespace {

using Env = std::map<std::string, Tensor>;

std::vector<int64_t> Unravel(int64_t flat, const Shape& shape) {
  std::vector<int64_t> idx(shape.size());
  for (int64_t d = static_cast<int64_t>(shape.size()) - 1; d >= 0; --d) {
    idx[d] = flat % shape[d];
    flat /= shape[d];
  }
  return idx;
}

int64_t Ravel(const std::vector<int64_t>& idx, const Shape& shape) {
  int64_t flat = 0;
  for (size_t d = 0; d < shape.size(); ++d) flat = flat * shape[d] + idx[d];
  return flat;
}

int64_t Count(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

Shape Broadcast(const Shape& a, const Shape& b) {
  const size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (size_t i = 0; i < rank; ++i) {
    const int64_t x = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const int64_t y = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (x != y && x != 1 && y != 1) throw std::runtime_error("oracle: broadcast");
    out[i] = x == 1 ? y : x;
  }
  return out;
}

// Flat index into `shape` for an output multi-index under broadcasting.
int64_t Source(const std::vector<int64_t>& out_idx, const Shape& shape) {
  const size_t off = out_idx.size() - shape.size();
  int64_t flat = 0;
  for (size_t d = 0; d < shape.size(); ++d) {
    flat = flat * shape[d] + (shape[d] == 1 ? 0 : out_idx[off + d]);
  }
  return flat;
}

float F(const Tensor& t, int64_t i) {
  switch (t.dtype()) {
    case DType::kFloat32:
      return t.f32()[i];
    case DType::kInt64:
      return static_cast<float>(t.i64()[i]);
    case DType::kBool:
      return t.boolean()[i] ? 1.0f : 0.0f;
  }
  return 0.0f;
}

const Tensor& Get(const Env& env, const std::string& name) {
  auto it = env.find(name);
  if (it == env.end()) throw std::runtime_error("oracle: unbound " + name);
  return it->second;
}

Tensor Elementwise(const std::string& op, const Tensor& a, const Tensor& b) {
  const Shape out = Broadcast(a.shape(), b.shape());
  const int64_t n = Count(out);
  if (op == "Greater" || op == "Equal") {
    std::vector<uint8_t> r(n);
    for (int64_t i = 0; i < n; ++i) {
      const auto idx = Unravel(i, out);
      const float x = F(a, Source(idx, a.shape()));
      const float y = F(b, Source(idx, b.shape()));
      r[i] = op == "Greater" ? (x > y) : (x == y);
    }
    return Tensor::Bool(out, r);
  }
  std::vector<float> r(n);
  for (int64_t i = 0; i < n; ++i) {
    const auto idx = Unravel(i, out);
    const float x = a.f32()[Source(idx, a.shape())];
    const float y = b.f32()[Source(idx, b.shape())];
    if (op == "Add") r[i] = x + y;
    if (op == "Sub") r[i] = x - y;
    if (op == "Mul") r[i] = x * y;
    if (op == "Div") r[i] = x / y;
  }
  return Tensor::F32(out, r);
}

std::vector<int64_t> Ints(const Node& n, const std::string& key) {
  auto v = n.IntsAttr(key);
  if (!v) throw std::runtime_error("oracle: missing " + key);
  return *v;
}

Tensor SliceOne(const Tensor& x, int64_t axis, int64_t start, int64_t end, int64_t step) {
  const int64_t dim = x.shape()[axis];
  // Clamp per the operator definition.
  if (start < 0) start += dim;
  if (end < 0 && end != std::numeric_limits<int64_t>::min()) end += dim;
  if (end == std::numeric_limits<int64_t>::min()) end = -1;
  std::vector<int64_t> picks;
  if (step > 0) {
    start = std::clamp<int64_t>(start, 0, dim);
    end = std::clamp<int64_t>(end, 0, dim);
    for (int64_t i = start; i < end; i += step) picks.push_back(i);
  } else {
    start = std::clamp<int64_t>(start, 0, dim - 1);
    end = std::clamp<int64_t>(end, -1, dim - 1);
    for (int64_t i = start; i > end; i += step) picks.push_back(i);
  }
  Shape out = x.shape();
  out[axis] = static_cast<int64_t>(picks.size());
  std::vector<float> r(Count(out));
  for (int64_t i = 0; i < Count(out); ++i) {
    auto idx = Unravel(i, out);
    idx[axis] = picks[idx[axis]];
    r[i] = x.f32()[Ravel(idx, x.shape())];
  }
  return Tensor::F32(out, r);
}

Tensor Reduce(const std::string& op, const Tensor& x, const Node& n) {
  std::vector<bool> reduced(x.rank(), n.IntsAttr("axes") ? false : true);
  if (auto axes = n.IntsAttr("axes")) {
    for (int64_t a : *axes) reduced[a < 0 ? a + x.rank() : a] = true;
  }
  const bool keep = n.IntAttr("keepdims", 1) != 0;
  Shape kept;
  Shape out;
  for (int64_t d = 0; d < x.rank(); ++d) {
    kept.push_back(reduced[d] ? 1 : x.shape()[d]);
    if (!reduced[d] || keep) out.push_back(reduced[d] ? 1 : x.shape()[d]);
  }
  std::vector<float> r(Count(kept));
  std::vector<bool> started(r.size(), false);
  // Outer loop over output cells, inner loop over input elements in
  // ascending flat order.
  for (int64_t o = 0; o < Count(kept); ++o) {
    const auto oidx = Unravel(o, kept);
    float acc = 0.0f;
    bool first = true;
    for (int64_t i = 0; i < x.size(); ++i) {
      const auto iidx = Unravel(i, x.shape());
      bool match = true;
      for (int64_t d = 0; d < x.rank(); ++d) {
        if (!reduced[d] && iidx[d] != oidx[d]) match = false;
      }
      if (!match) continue;
      const float v = x.f32()[i];
      if (op == "ReduceSum") {
        acc = acc + v;
      } else if (first) {
        acc = v;
      } else if (op == "ReduceMax") {
        acc = (std::isnan(acc) || v <= acc) ? acc : v;
      } else {
        acc = (std::isnan(acc) || v >= acc) ? acc : v;
      }
      first = false;
    }
    r[o] = acc;
  }
  return Tensor::F32(out, r);
}

Tensor ReduceBool(const Tensor& x) {  // ReduceMax over all axes, keepdims=0
  uint8_t any = 0;
  for (uint8_t v : x.boolean()) any = any || v;
  return Tensor::Bool({}, {any});
}

Tensor Cast(const Tensor& x, int64_t to) {
  const int64_t n = x.size();
  if (to == 1) {
    std::vector<float> r(n);
    for (int64_t i = 0; i < n; ++i) r[i] = F(x, i);
    return Tensor::F32(x.shape(), r);
  }
  if (to == 7) {
    std::vector<int64_t> r(n);
    for (int64_t i = 0; i < n; ++i) r[i] = static_cast<int64_t>(std::trunc(F(x, i)));
    return Tensor::I64(x.shape(), r);
  }
  if (to == 9) {
    std::vector<uint8_t> r(n);
    for (int64_t i = 0; i < n; ++i) r[i] = F(x, i) != 0.0f;
    return Tensor::Bool(x.shape(), r);
  }
  throw std::runtime_error("oracle: cast target");
}

void Run(const Graph& g, Env& env);

std::vector<Tensor> Eval(const Node& n, Env& env) {
  auto in = [&](size_t i) -> const Tensor& { return Get(env, n.inputs[i]); };
  const std::string& op = n.op_type;
  if (op == "Constant") return {*n.TensorAttr("value")};
  if (op == "Identity") return {in(0)};
  if (op == "Relu") {
    std::vector<float> r(in(0).f32().begin(), in(0).f32().end());
    for (float& v : r) {
      if (v < 0.0f) v = 0.0f;
    }
    return {Tensor::F32(in(0).shape(), r)};
  }
  if (op == "Add" || op == "Sub" || op == "Mul" || op == "Div" || op == "Greater" ||
      op == "Equal") {
    return {Elementwise(op, in(0), in(1))};
  }
  if (op == "MatMul" || op == "Gemm") {
    const Tensor& a = in(0);
    const Tensor& b = in(1);
    const bool tb = op == "Gemm" && n.IntAttr("transB", 0) != 0;
    const bool ta = op == "Gemm" && n.IntAttr("transA", 0) != 0;
    const int64_t m = ta ? a.shape()[1] : a.shape()[0];
    const int64_t k = ta ? a.shape()[0] : a.shape()[1];
    const int64_t cols = tb ? b.shape()[0] : b.shape()[1];
    std::vector<float> r(m * cols);
    for (int64_t i = 0; i < m; ++i) {
      for (int64_t j = 0; j < cols; ++j) {
        float acc = 0.0f;
        for (int64_t t = 0; t < k; ++t) {
          const float x = ta ? a.f32()[t * m + i] : a.f32()[i * k + t];
          const float y = tb ? b.f32()[j * k + t] : b.f32()[t * cols + j];
          acc = acc + x * y;
        }
        if (op == "Gemm") {
          float y = n.FloatAttr("alpha", 1.0f) * acc;
          if (n.inputs.size() > 2 && !n.inputs[2].empty()) {
            const Tensor& c = in(2);
            y = y + n.FloatAttr("beta", 1.0f) * c.f32()[Source({i, j}, c.shape())];
          }
          acc = y;
        }
        r[i * cols + j] = acc;
      }
    }
    return {Tensor::F32({m, cols}, r)};
  }
  if (op == "Softmax") {
    const Tensor& x = in(0);
    const int64_t axis = n.IntAttr("axis", -1) < 0 ? n.IntAttr("axis", -1) + x.rank()
                                                   : n.IntAttr("axis", -1);
    std::vector<float> r(x.size());
    for (int64_t i = 0; i < x.size(); ++i) {
      auto idx = Unravel(i, x.shape());
      float mx = -std::numeric_limits<float>::infinity();
      for (int64_t e = 0; e < x.shape()[axis]; ++e) {
        idx[axis] = e;
        const float v = x.f32()[Ravel(idx, x.shape())];
        if (v > mx) mx = v;
      }
      float sum = 0.0f;
      for (int64_t e = 0; e < x.shape()[axis]; ++e) {
        idx[axis] = e;
        sum = sum + std::exp(x.f32()[Ravel(idx, x.shape())] - mx);
      }
      r[i] = std::exp(x.f32()[i] - mx) / sum;
    }
    return {Tensor::F32(x.shape(), r)};
  }
  if (op == "ReduceSum" || op == "ReduceMax" || op == "ReduceMin") {
    if (in(0).dtype() == DType::kBool) return {ReduceBool(in(0))};
    return {Reduce(op, in(0), n)};
  }
  if (op == "LayerNormalization") {
    const Tensor& x = in(0);
    const int64_t w = x.shape().back();
    const float eps = n.FloatAttr("epsilon", 1e-5f);
    std::vector<float> r(x.size());
    for (int64_t row = 0; row < x.size() / w; ++row) {
      float sum = 0.0f;
      for (int64_t j = 0; j < w; ++j) sum = sum + x.f32()[row * w + j];
      const float mean = sum / static_cast<float>(w);
      float var = 0.0f;
      for (int64_t j = 0; j < w; ++j) {
        const float d = x.f32()[row * w + j] - mean;
        var = var + d * d;
      }
      const float inv = 1.0f / std::sqrt(var / static_cast<float>(w) + eps);
      for (int64_t j = 0; j < w; ++j) {
        float y = (x.f32()[row * w + j] - mean) * inv * in(1).f32()[j];
        if (n.inputs.size() > 2 && !n.inputs[2].empty()) y = y + in(2).f32()[j];
        r[row * w + j] = y;
      }
    }
    return {Tensor::F32(x.shape(), r)};
  }
  if (op == "Where") {
    const Tensor& c = in(0);
    const Shape out = Broadcast(Broadcast(c.shape(), in(1).shape()), in(2).shape());
    std::vector<float> r(Count(out));
    for (int64_t i = 0; i < Count(out); ++i) {
      const auto idx = Unravel(i, out);
      r[i] = c.boolean()[Source(idx, c.shape())] ? in(1).f32()[Source(idx, in(1).shape())]
                                                 : in(2).f32()[Source(idx, in(2).shape())];
    }
    return {Tensor::F32(out, r)};
  }
  if (op == "Concat") {
    const int64_t axis = n.IntAttr("axis", 0);
    Shape out = in(0).shape();
    out[axis] = 0;
    for (size_t i = 0; i < n.inputs.size(); ++i) out[axis] += in(i).shape()[axis];
    std::vector<float> r(Count(out));
    for (int64_t i = 0; i < Count(out); ++i) {
      auto idx = Unravel(i, out);
      size_t part = 0;
      while (idx[axis] >= in(part).shape()[axis]) idx[axis] -= in(part++).shape()[axis];
      r[i] = in(part).f32()[Ravel(idx, in(part).shape())];
    }
    return {Tensor::F32(out, r)};
  }
  if (op == "Slice") {
    const auto starts = Ints(n, "starts");
    const auto ends = Ints(n, "ends");
    const auto axes = Ints(n, "axes");
    const auto steps = n.IntsAttr("steps").value_or(std::vector<int64_t>(starts.size(), 1));
    Tensor x = in(0);
    for (size_t i = 0; i < starts.size(); ++i) {
      x = SliceOne(x, axes[i] < 0 ? axes[i] + x.rank() : axes[i], starts[i], ends[i], steps[i]);
    }
    return {x};
  }
  if (op == "Cast") return {Cast(in(0), n.IntAttr("to", 1))};
  if (op == "If") {
    const bool cond = in(0).boolean()[0] != 0;
    const Graph& branch = *n.GraphAttr(cond ? "then_branch" : "else_branch");
    Env inner = env;
    Run(branch, inner);
    std::vector<Tensor> outs;
    for (const std::string& o : branch.outputs) outs.push_back(Get(inner, o));
    return outs;
  }
  throw std::runtime_error("oracle: unsupported op " + op);
}

// Values a node reads: its inputs plus, for If, names its branches use
// without defining.
std::vector<std::string> Needs(const Node& n) {
  std::vector<std::string> needs;
  for (const std::string& in : n.inputs) {
    if (!in.empty()) needs.push_back(in);
  }
  for (const auto& [key, attr] : n.attributes) {
    const auto* sub = std::get_if<GraphPtr>(&attr);
    if (!sub) continue;
    std::set<std::string> local;
    for (const auto& [name, t] : (*sub)->initializers) local.insert(name);
    for (const Node& inner : (*sub)->nodes) {
      for (const std::string& o : inner.outputs) local.insert(o);
    }
    for (const Node& inner : (*sub)->nodes) {
      for (const std::string& v : Needs(inner)) {
        if (!local.count(v)) needs.push_back(v);
      }
    }
  }
  return needs;
}

void Run(const Graph& g, Env& env) {
  for (const auto& [name, t] : g.initializers) {
    if (!env.count(name)) env[name] = t;
  }
  // Repeatedly evaluate any node whose inputs are ready; independent of the
  // library's topological sort.
  std::vector<bool> done(g.nodes.size(), false);
  size_t remaining = g.nodes.size();
  while (remaining > 0) {
    bool progress = false;
    for (size_t i = 0; i < g.nodes.size(); ++i) {
      if (done[i]) continue;
      const Node& n = g.nodes[i];
      bool ready = true;
      for (const std::string& in : Needs(n)) {
        if (!env.count(in)) ready = false;
      }
      if (!ready) continue;
      std::vector<Tensor> outs = Eval(n, env);
      for (size_t o = 0; o < n.outputs.size(); ++o) env[n.outputs[o]] = outs[o];
      done[i] = true;
      --remaining;
      progress = true;
    }
    if (!progress) throw std::runtime_error("oracle: stuck");
  }
}

}  // namespace

std::map<std::string, Tensor> OracleEvaluate(const Graph& graph,
                                             const std::map<std::string, Tensor>& inputs) {
  Env env = inputs;
  Run(graph, env);
  std::map<std::string, Tensor> out;
  for (const std::string& o : graph.outputs) out[o] = Get(env, o);
  return out;
}

}  // namespace graphsentry::testing
