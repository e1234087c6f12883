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

// In-memory IR for serialized model graphs.
//
// A Graph is a value type. Subgraph attributes (If branches) are held through
// shared_ptr<const Graph> so copies are cheap; rewrites that touch a branch
// replace the pointer instead of mutating the shared graph. Rewrite
// primitives below mutate their argument in place and therefore require
// exclusive access to it; readers may share a graph freely.

#ifndef GRAPHSENTRY_GRAPH_H_
#define GRAPHSENTRY_GRAPH_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "graphsentry/tensor.h"

namespace graphsentry {

struct Graph;
using GraphPtr = std::shared_ptr<const Graph>;

using AttributeValue =
    std::variant<int64_t, float, std::vector<int64_t>, std::vector<float>,
                 std::string, Tensor, GraphPtr>;

bool AttributeEquals(const AttributeValue& a, const AttributeValue& b);
std::string AttributeToString(const AttributeValue& v);

struct Node {
  std::string name;
  std::string op_type;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, AttributeValue> attributes;

  bool HasAttr(const std::string& key) const {
    return attributes.count(key) > 0;
  }
  int64_t IntAttr(const std::string& key, int64_t fallback) const;
  float FloatAttr(const std::string& key, float fallback) const;
  std::optional<std::vector<int64_t>> IntsAttr(const std::string& key) const;
  const Tensor* TensorAttr(const std::string& key) const;
  GraphPtr GraphAttr(const std::string& key) const;
};

bool operator==(const Node& a, const Node& b);

// One dimension of a declared I/O shape: a fixed extent or a named symbol.
struct Dim {
  int64_t value = 0;
  std::string param;  // non-empty => symbolic

  static Dim Fixed(int64_t v) { return {v, {}}; }
  static Dim Symbolic(std::string p) { return {0, std::move(p)}; }
  bool symbolic() const { return !param.empty(); }
  friend bool operator==(const Dim&, const Dim&) = default;
};

struct ValueInfo {
  std::string name;
  DType dtype = DType::kFloat32;
  std::vector<Dim> shape;
  friend bool operator==(const ValueInfo&, const ValueInfo&) = default;
};

std::string ValueInfoToString(const ValueInfo& v);  // "i64[1,seq]"

struct Graph {
  std::string name;
  std::vector<Node> nodes;
  std::map<std::string, Tensor> initializers;
  std::vector<ValueInfo> inputs;
  std::vector<std::string> outputs;
  int64_t opset_version = 17;

  const Node* FindNode(std::string_view node_name) const;
  Node* FindMutableNode(std::string_view node_name);
  // Node producing `value`, or nullptr for inputs, initializers and unknowns.
  const Node* Producer(std::string_view value) const;
  const ValueInfo* FindInput(std::string_view input_name) const;
  bool HasValue(std::string_view value) const;
};

// Exact structural equality, node order included.
bool operator==(const Graph& a, const Graph& b);

// Equality up to node order and Constant-node/initializer representation.
bool SemanticallyEqual(const Graph& a, const Graph& b);

// Frozen operator subset.
const std::vector<std::string>& SupportedOps();
bool IsSupportedOp(std::string_view op_type);

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string rule;  // e.g. "ssa-duplicate", "cycle", "dangling-input"
  std::string ref;   // node or value name
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool Has(std::string_view rule) const;
  std::string ToString() const;
};

ValidationReport Validate(const Graph& graph);

// Throws Error(kInvalidGraph) carrying the report text when `graph` is not
// well-formed.
void CheckValid(const Graph& graph);

// ---------------------------------------------------------------------------
// Queries

// Indices into graph.nodes such that producers precede consumers. Ready nodes
// are released in ascending name order. Values captured by If branches from
// the enclosing scope count as inputs of the If node. Throws kCycleDetected.
std::vector<size_t> TopoOrder(const Graph& graph);

// Names captured from the enclosing scope by any subgraph attribute of
// `node`, recursively.
std::set<std::string> ImplicitInputs(const Node& node);

struct Consumer {
  enum class Kind : uint8_t { kNodeInput, kGraphOutput, kSubgraphCapture };
  Kind kind = Kind::kNodeInput;
  std::string node;  // empty for kGraphOutput
  int64_t slot = 0;  // input slot, or index into graph.outputs

  friend auto operator<=>(const Consumer&, const Consumer&) = default;
};

// Every reader of `value`. Throws kUnknownValue.
std::vector<Consumer> ConsumersOf(const Graph& graph, std::string_view value);

// All value names defined at top level: inputs, initializers, node outputs.
std::set<std::string> DefinedValues(const Graph& graph);

// ---------------------------------------------------------------------------
// Rewrite primitives

// Points every consumer of `old_value` that is not in `exclude` at
// `new_value`; returns the number of rewritten slots (graph outputs and
// subgraph captures count one each). Throws kUnknownValue or
// kWouldCreateCycle; on error the graph is untouched.
int RerouteConsumers(Graph& graph, std::string_view old_value,
                     std::string_view new_value,
                     const std::set<std::string>& exclude);

enum class ConstantPolicy { kNode, kInitializer };

// Throws kNameCollision, kInvalidTensor.
void AddConstant(Graph& graph, const std::string& name, const Tensor& value,
                 ConstantPolicy policy = ConstantPolicy::kNode);

// Appends every node output that is not already a graph output.
void PromoteOutputs(Graph& graph);

// Renames a node-produced value and every reference to it, graph outputs
// included. Throws kUnknownValue, kNameCollision.
void RenameValue(Graph& graph, std::string_view old_value,
                 const std::string& new_value);

}  // namespace graphsentry

#endif  // GRAPHSENTRY_GRAPH_H_
