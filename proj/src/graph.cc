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

#include "graphsentry/graph.h"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "graphsentry/error.h"

namespace graphsentry {

// ---------------------------------------------------------------------------
// Attributes and nodes

namespace {

bool FloatBitsEqual(float a, float b) {
  return std::bit_cast<uint32_t>(a) == std::bit_cast<uint32_t>(b);
}

std::string FormatFloat(float f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(f));
  return buf;
}

}  // namespace

bool AttributeEquals(const AttributeValue& a, const AttributeValue& b) {
  if (a.index() != b.index()) return false;
  if (const auto* fa = std::get_if<float>(&a)) {
    return FloatBitsEqual(*fa, std::get<float>(b));
  }
  if (const auto* va = std::get_if<std::vector<float>>(&a)) {
    const auto& vb = std::get<std::vector<float>>(b);
    return va->size() == vb.size() &&
           std::equal(va->begin(), va->end(), vb.begin(), FloatBitsEqual);
  }
  if (const auto* ga = std::get_if<GraphPtr>(&a)) {
    const auto& gb = std::get<GraphPtr>(b);
    if (!*ga || !gb) return !*ga && !gb;
    return **ga == *gb;
  }
  return a == b;
}

std::string AttributeToString(const AttributeValue& v) {
  std::ostringstream os;
  if (const auto* i = std::get_if<int64_t>(&v)) {
    os << *i;
  } else if (const auto* f = std::get_if<float>(&v)) {
    os << FormatFloat(*f);
  } else if (const auto* is = std::get_if<std::vector<int64_t>>(&v)) {
    os << '[';
    for (size_t k = 0; k < is->size(); ++k) os << (k ? "," : "") << (*is)[k];
    os << ']';
  } else if (const auto* fs = std::get_if<std::vector<float>>(&v)) {
    os << '[';
    for (size_t k = 0; k < fs->size(); ++k) {
      os << (k ? "," : "") << FormatFloat((*fs)[k]);
    }
    os << ']';
  } else if (const auto* s = std::get_if<std::string>(&v)) {
    os << '"' << *s << '"';
  } else if (const auto* t = std::get_if<Tensor>(&v)) {
    os << "tensor:" << TensorSummary(*t);
  } else if (const auto* g = std::get_if<GraphPtr>(&v)) {
    os << "graph:" << ((*g) ? (*g)->nodes.size() : 0) << "-nodes";
  }
  return os.str();
}

int64_t Node::IntAttr(const std::string& key, int64_t fallback) const {
  auto it = attributes.find(key);
  if (it == attributes.end()) return fallback;
  if (const auto* i = std::get_if<int64_t>(&it->second)) return *i;
  throw Error(ErrorCode::kInvalidGraph,
              "node '" + name + "' attribute '" + key + "' is not an int");
}

float Node::FloatAttr(const std::string& key, float fallback) const {
  auto it = attributes.find(key);
  if (it == attributes.end()) return fallback;
  if (const auto* f = std::get_if<float>(&it->second)) return *f;
  throw Error(ErrorCode::kInvalidGraph,
              "node '" + name + "' attribute '" + key + "' is not a float");
}

std::optional<std::vector<int64_t>> Node::IntsAttr(
    const std::string& key) const {
  auto it = attributes.find(key);
  if (it == attributes.end()) return std::nullopt;
  if (const auto* v = std::get_if<std::vector<int64_t>>(&it->second)) {
    return *v;
  }
  throw Error(ErrorCode::kInvalidGraph,
              "node '" + name + "' attribute '" + key + "' is not ints");
}

const Tensor* Node::TensorAttr(const std::string& key) const {
  auto it = attributes.find(key);
  if (it == attributes.end()) return nullptr;
  return std::get_if<Tensor>(&it->second);
}

GraphPtr Node::GraphAttr(const std::string& key) const {
  auto it = attributes.find(key);
  if (it == attributes.end()) return nullptr;
  if (const auto* g = std::get_if<GraphPtr>(&it->second)) return *g;
  return nullptr;
}

bool operator==(const Node& a, const Node& b) {
  if (a.name != b.name || a.op_type != b.op_type || a.inputs != b.inputs ||
      a.outputs != b.outputs || a.attributes.size() != b.attributes.size()) {
    return false;
  }
  auto ia = a.attributes.begin();
  auto ib = b.attributes.begin();
  for (; ia != a.attributes.end(); ++ia, ++ib) {
    if (ia->first != ib->first || !AttributeEquals(ia->second, ib->second)) {
      return false;
    }
  }
  return true;
}

std::string ValueInfoToString(const ValueInfo& v) {
  std::string s(DTypeName(v.dtype));
  s += '[';
  for (size_t i = 0; i < v.shape.size(); ++i) {
    if (i) s += ',';
    s += v.shape[i].symbolic() ? v.shape[i].param
                               : std::to_string(v.shape[i].value);
  }
  s += ']';
  return s;
}

// ---------------------------------------------------------------------------
// Graph

const Node* Graph::FindNode(std::string_view node_name) const {
  for (const Node& n : nodes) {
    if (n.name == node_name) return &n;
  }
  return nullptr;
}

Node* Graph::FindMutableNode(std::string_view node_name) {
  for (Node& n : nodes) {
    if (n.name == node_name) return &n;
  }
  return nullptr;
}

const Node* Graph::Producer(std::string_view value) const {
  for (const Node& n : nodes) {
    for (const std::string& o : n.outputs) {
      if (o == value) return &n;
    }
  }
  return nullptr;
}

const ValueInfo* Graph::FindInput(std::string_view input_name) const {
  for (const ValueInfo& v : inputs) {
    if (v.name == input_name) return &v;
  }
  return nullptr;
}

bool Graph::HasValue(std::string_view value) const {
  if (value.empty()) return false;
  if (FindInput(value) != nullptr) return true;
  if (initializers.count(std::string(value)) > 0) return true;
  return Producer(value) != nullptr;
}

bool operator==(const Graph& a, const Graph& b) {
  return a.name == b.name && a.nodes == b.nodes &&
         a.initializers == b.initializers && a.inputs == b.inputs &&
         a.outputs == b.outputs && a.opset_version == b.opset_version;
}

namespace {

Graph Normalize(const Graph& g) {
  Graph out;
  out.inputs = g.inputs;
  out.outputs = g.outputs;
  out.opset_version = g.opset_version;
  out.initializers = g.initializers;
  for (const Node& n : g.nodes) {
    if (n.op_type == "Constant" && n.outputs.size() == 1 &&
        n.attributes.size() == 1 && n.TensorAttr("value") != nullptr) {
      out.initializers[n.outputs[0]] = *n.TensorAttr("value");
      continue;
    }
    Node copy = n;
    for (auto& [key, value] : copy.attributes) {
      if (auto* sub = std::get_if<GraphPtr>(&value); sub && *sub) {
        value = std::make_shared<const Graph>(Normalize(**sub));
      }
    }
    out.nodes.push_back(std::move(copy));
  }
  std::sort(out.nodes.begin(), out.nodes.end(),
            [](const Node& x, const Node& y) { return x.name < y.name; });
  return out;
}

}  // namespace

bool SemanticallyEqual(const Graph& a, const Graph& b) {
  return Normalize(a) == Normalize(b);
}

const std::vector<std::string>& SupportedOps() {
  static const std::vector<std::string> kOps = {
      "Add",      "And",       "Cast",      "Concat",
      "Constant", "Div",       "Equal",     "Gather",
      "Gemm",     "Greater",   "Identity",  "If",
      "LayerNormalization",    "MatMul",    "Mul",
      "Not",      "Or",        "ReduceMax", "ReduceMin",
      "ReduceSum", "Relu",     "Shape",     "Slice",
      "Softmax",  "Sub",       "Where",
  };
  return kOps;
}

bool IsSupportedOp(std::string_view op_type) {
  const auto& ops = SupportedOps();
  return std::find(ops.begin(), ops.end(), op_type) != ops.end();
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::Has(std::string_view rule) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.rule == rule; });
}

std::string ValidationReport::ToString() const {
  std::ostringstream os;
  for (const Violation& v : violations) {
    os << v.rule << " @ " << v.ref << ": " << v.message << '\n';
  }
  return os.str();
}

namespace {

void CollectCaptures(const Graph& g, const std::set<std::string>& local_outer,
                     std::set<std::string>& captures) {
  std::set<std::string> defined;
  for (const ValueInfo& v : g.inputs) defined.insert(v.name);
  for (const auto& [name, t] : g.initializers) defined.insert(name);
  for (const Node& n : g.nodes) {
    for (const std::string& o : n.outputs) defined.insert(o);
  }
  auto note = [&](const std::string& ref) {
    if (!ref.empty() && defined.count(ref) == 0) captures.insert(ref);
  };
  for (const Node& n : g.nodes) {
    for (const std::string& in : n.inputs) note(in);
    for (const auto& [key, value] : n.attributes) {
      if (const auto* sub = std::get_if<GraphPtr>(&value); sub && *sub) {
        std::set<std::string> inner;
        CollectCaptures(**sub, local_outer, inner);
        for (const std::string& ref : inner) note(ref);
      }
    }
  }
  for (const std::string& o : g.outputs) note(o);
}

// Names visible from enclosing graphs, innermost first.
struct NameChain {
  const std::set<std::string>* names = nullptr;
  const NameChain* parent = nullptr;

  bool Has(const std::string& name) const {
    for (const NameChain* c = this; c; c = c->parent) {
      if (c->names && c->names->count(name) > 0) return true;
    }
    return false;
  }
};

void ValidateScope(const Graph& g, const NameChain& outer,
                   const std::string& prefix, ValidationReport& report) {
  auto add = [&](std::string rule, const std::string& ref, std::string msg) {
    report.violations.push_back({std::move(rule), prefix + ref, std::move(msg)});
  };

  std::set<std::string> defined;
  for (const ValueInfo& v : g.inputs) {
    if (!defined.insert(v.name).second || outer.Has(v.name)) {
      add("ssa-duplicate", v.name, "graph input defined more than once");
    }
  }
  for (const auto& [name, t] : g.initializers) {
    try {
      t.Validate();
    } catch (const Error& e) {
      add("invalid-tensor", name, e.what());
    }
    // Initializers may double as input defaults.
    if (g.FindInput(name) == nullptr &&
        (!defined.insert(name).second || outer.Has(name))) {
      add("ssa-duplicate", name, "initializer shadows an existing value");
    }
  }

  std::set<std::string> node_names;
  for (const Node& n : g.nodes) {
    if (n.name.empty()) {
      add("node-name", "<unnamed " + n.op_type + ">", "node has no name");
    } else if (!node_names.insert(n.name).second) {
      add("node-name", n.name, "duplicate node name");
    }
    if (!IsSupportedOp(n.op_type)) {
      add("unsupported-op", n.name, "operator '" + n.op_type + "'");
    }
    if (n.outputs.empty()) {
      add("empty-output", n.name, "node has no outputs");
    }
    for (const std::string& o : n.outputs) {
      if (o.empty()) {
        add("empty-output", n.name, "empty output name");
      } else if (!defined.insert(o).second || outer.Has(o)) {
        add("ssa-duplicate", o, "value '" + o + "' produced more than once");
      }
    }
  }

  const NameChain scope{&defined, &outer};

  for (const Node& n : g.nodes) {
    for (const std::string& in : n.inputs) {
      if (!in.empty() && !scope.Has(in)) {
        add("dangling-input", n.name, "input '" + in + "' has no producer");
      }
    }
    for (const auto& [key, value] : n.attributes) {
      if (const auto* t = std::get_if<Tensor>(&value)) {
        try {
          t->Validate();
        } catch (const Error& e) {
          add("invalid-tensor", n.name, key + ": " + e.what());
        }
      }
      if (const auto* sub = std::get_if<GraphPtr>(&value)) {
        if (n.op_type != "If") {
          add("subgraph-attr", n.name,
              "subgraph attribute '" + key + "' only allowed on If");
        } else if (*sub) {
          ValidateScope(**sub, scope, prefix + n.name + "/" + key + "/",
                        report);
        }
      }
    }
    if (n.op_type == "If") {
      GraphPtr then_g = n.GraphAttr("then_branch");
      GraphPtr else_g = n.GraphAttr("else_branch");
      if (!then_g || !else_g) {
        add("if-branch", n.name, "If requires then_branch and else_branch");
      } else if (then_g->outputs.size() != n.outputs.size() ||
                 else_g->outputs.size() != n.outputs.size()) {
        add("if-branch", n.name, "branch output count differs from If");
      }
      if (n.inputs.size() != 1) {
        add("if-branch", n.name, "If takes exactly one condition input");
      }
    }
  }

  for (const std::string& o : g.outputs) {
    if (!scope.Has(o)) {
      add("dangling-output", o, "graph output has no producer");
    }
  }

  // Acyclicity over the data dependencies.
  try {
    TopoOrder(g);
  } catch (const Error& e) {
    add("cycle", g.name.empty() ? "<graph>" : g.name, e.what());
  }
}

}  // namespace

ValidationReport Validate(const Graph& graph) {
  ValidationReport report;
  ValidateScope(graph, NameChain{}, "", report);
  return report;
}

void CheckValid(const Graph& graph) {
  ValidationReport r = Validate(graph);
  if (!r.ok()) throw Error(ErrorCode::kInvalidGraph, r.ToString());
}

// ---------------------------------------------------------------------------
// Queries

std::set<std::string> ImplicitInputs(const Node& node) {
  std::set<std::string> captures;
  for (const auto& [key, value] : node.attributes) {
    if (const auto* sub = std::get_if<GraphPtr>(&value); sub && *sub) {
      CollectCaptures(**sub, {}, captures);
    }
  }
  return captures;
}

std::vector<size_t> TopoOrder(const Graph& graph) {
  const size_t n = graph.nodes.size();
  std::unordered_map<std::string_view, size_t> producer;
  producer.reserve(n * 2);
  for (size_t i = 0; i < n; ++i) {
    for (const std::string& o : graph.nodes[i].outputs) producer.emplace(o, i);
  }
  std::vector<std::set<size_t>> deps(n);
  std::vector<std::vector<size_t>> users(n);
  for (size_t i = 0; i < n; ++i) {
    const Node& node = graph.nodes[i];
    auto depend = [&](const std::string& v) {
      auto it = producer.find(v);
      if (it != producer.end()) deps[i].insert(it->second);
    };
    for (const std::string& in : node.inputs) depend(in);
    for (const std::string& in : ImplicitInputs(node)) depend(in);
    for (size_t d : deps[i]) users[d].push_back(i);
  }
  std::vector<size_t> pending(n);
  std::set<std::pair<std::string, size_t>> ready;
  for (size_t i = 0; i < n; ++i) {
    pending[i] = deps[i].size();
    if (pending[i] == 0) ready.emplace(graph.nodes[i].name, i);
  }
  std::vector<size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    auto [name, i] = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(i);
    for (size_t u : users[i]) {
      if (--pending[u] == 0) ready.emplace(graph.nodes[u].name, u);
    }
  }
  if (order.size() != n) {
    std::string stuck;
    for (size_t i = 0; i < n; ++i) {
      if (pending[i] > 0) {
        stuck = graph.nodes[i].name;
        break;
      }
    }
    throw Error(ErrorCode::kCycleDetected,
                "dependency cycle through node '" + stuck + "'");
  }
  return order;
}

std::vector<Consumer> ConsumersOf(const Graph& graph, std::string_view value) {
  if (!graph.HasValue(value)) {
    throw Error(ErrorCode::kUnknownValue,
                "unknown value '" + std::string(value) + "'");
  }
  std::vector<Consumer> out;
  for (const Node& n : graph.nodes) {
    for (size_t s = 0; s < n.inputs.size(); ++s) {
      if (n.inputs[s] == value) {
        out.push_back({Consumer::Kind::kNodeInput, n.name,
                       static_cast<int64_t>(s)});
      }
    }
    if (ImplicitInputs(n).count(std::string(value)) > 0) {
      out.push_back({Consumer::Kind::kSubgraphCapture, n.name, 0});
    }
  }
  for (size_t s = 0; s < graph.outputs.size(); ++s) {
    if (graph.outputs[s] == value) {
      out.push_back(
          {Consumer::Kind::kGraphOutput, "", static_cast<int64_t>(s)});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::set<std::string> DefinedValues(const Graph& graph) {
  std::set<std::string> out;
  for (const ValueInfo& v : graph.inputs) out.insert(v.name);
  for (const auto& [name, t] : graph.initializers) out.insert(name);
  for (const Node& n : graph.nodes) {
    for (const std::string& o : n.outputs) out.insert(o);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rewrites

namespace {

// Renames references to `from` inside a subgraph that captures it.
GraphPtr RenameCaptured(const Graph& sub, const std::string& from,
                        const std::string& to) {
  auto copy = std::make_shared<Graph>(sub);
  for (Node& n : copy->nodes) {
    for (std::string& in : n.inputs) {
      if (in == from) in = to;
    }
    for (auto& [key, value] : n.attributes) {
      if (auto* g = std::get_if<GraphPtr>(&value); g && *g) {
        if (ImplicitInputs(n).count(from) > 0) {
          *g = RenameCaptured(**g, from, to);
        }
      }
    }
  }
  for (std::string& o : copy->outputs) {
    if (o == from) o = to;
  }
  return copy;
}

void RenameCapturedInNode(Node& node, const std::string& from,
                          const std::string& to) {
  for (auto& [key, value] : node.attributes) {
    if (auto* g = std::get_if<GraphPtr>(&value); g && *g) {
      std::set<std::string> caps;
      CollectCaptures(**g, {}, caps);
      if (caps.count(from) > 0) *g = RenameCaptured(**g, from, to);
    }
  }
}

// Nodes (by index) that `value` transitively depends on, including its
// producer.
std::set<size_t> AncestorNodes(const Graph& graph, const std::string& value) {
  std::map<std::string, size_t> producer;
  for (size_t i = 0; i < graph.nodes.size(); ++i) {
    for (const std::string& o : graph.nodes[i].outputs) producer.emplace(o, i);
  }
  std::set<size_t> seen;
  std::vector<std::string> stack = {value};
  while (!stack.empty()) {
    std::string v = stack.back();
    stack.pop_back();
    auto it = producer.find(v);
    if (it == producer.end() || !seen.insert(it->second).second) continue;
    const Node& n = graph.nodes[it->second];
    for (const std::string& in : n.inputs) stack.push_back(in);
    for (const std::string& in : ImplicitInputs(n)) stack.push_back(in);
  }
  return seen;
}

}  // namespace

int RerouteConsumers(Graph& graph, std::string_view old_value,
                     std::string_view new_value,
                     const std::set<std::string>& exclude) {
  const std::string from(old_value);
  const std::string to(new_value);
  if (!graph.HasValue(from)) {
    throw Error(ErrorCode::kUnknownValue, "unknown value '" + from + "'");
  }
  if (!graph.HasValue(to)) {
    throw Error(ErrorCode::kUnknownValue, "unknown value '" + to + "'");
  }
  if (from == to) return 0;

  const std::set<size_t> ancestors = AncestorNodes(graph, to);
  std::vector<Consumer> consumers = ConsumersOf(graph, from);
  for (const Consumer& c : consumers) {
    if (c.kind == Consumer::Kind::kGraphOutput || exclude.count(c.node) > 0) {
      continue;
    }
    for (size_t a : ancestors) {
      if (graph.nodes[a].name == c.node) {
        throw Error(ErrorCode::kWouldCreateCycle,
                    "rerouting '" + from + "' to '" + to +
                        "' makes node '" + c.node + "' depend on itself");
      }
    }
  }

  int count = 0;
  for (Node& n : graph.nodes) {
    if (exclude.count(n.name) > 0) continue;
    for (std::string& in : n.inputs) {
      if (in == from) {
        in = to;
        ++count;
      }
    }
    if (ImplicitInputs(n).count(from) > 0) {
      RenameCapturedInNode(n, from, to);
      ++count;
    }
  }
  for (std::string& o : graph.outputs) {
    if (o == from) {
      o = to;
      ++count;
    }
  }
  return count;
}

void AddConstant(Graph& graph, const std::string& name, const Tensor& value,
                 ConstantPolicy policy) {
  if (name.empty() || graph.HasValue(name) || graph.FindNode(name)) {
    throw Error(ErrorCode::kNameCollision, "name '" + name + "' is in use");
  }
  value.Validate();
  if (policy == ConstantPolicy::kInitializer) {
    graph.initializers[name] = value;
    return;
  }
  Node node;
  node.name = name;
  node.op_type = "Constant";
  node.outputs = {name};
  node.attributes["value"] = value;
  graph.nodes.push_back(std::move(node));
}

void PromoteOutputs(Graph& graph) {
  std::set<std::string> present(graph.outputs.begin(), graph.outputs.end());
  for (size_t i : TopoOrder(graph)) {
    for (const std::string& o : graph.nodes[i].outputs) {
      if (present.insert(o).second) graph.outputs.push_back(o);
    }
  }
}

void RenameValue(Graph& graph, std::string_view old_value,
                 const std::string& new_value) {
  const std::string from(old_value);
  if (!graph.HasValue(from)) {
    throw Error(ErrorCode::kUnknownValue, "unknown value '" + from + "'");
  }
  if (graph.HasValue(new_value)) {
    throw Error(ErrorCode::kNameCollision,
                "name '" + new_value + "' is in use");
  }
  if (graph.FindInput(from) != nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "graph inputs cannot be renamed: '" + from + "'");
  }
  if (auto it = graph.initializers.find(from); it != graph.initializers.end()) {
    Tensor t = it->second;
    graph.initializers.erase(it);
    graph.initializers[new_value] = std::move(t);
  }
  for (Node& n : graph.nodes) {
    for (std::string& o : n.outputs) {
      if (o == from) o = new_value;
    }
    for (std::string& in : n.inputs) {
      if (in == from) in = new_value;
    }
    RenameCapturedInNode(n, from, new_value);
  }
  for (std::string& o : graph.outputs) {
    if (o == from) o = new_value;
  }
}

}  // namespace graphsentry
