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


// Small helper for constructing graphs node by node.

#ifndef GRAPHSENTRY_GRAPH_BUILDER_H_
#define GRAPHSENTRY_GRAPH_BUILDER_H_

#include <map>
#include <string>
#include <vector>

#include "graphsentry/graph.h"

namespace graphsentry {

using Attributes = std::map<std::string, AttributeValue>;

class GraphBuilder {
 public:
  // Every node and value created through the builder is named prefix + name.
  explicit GraphBuilder(Graph* graph, std::string prefix = "")
      : graph_(graph), prefix_(std::move(prefix)) {}

  // Adds a single-output node; the node and its output share one name.
  // Throws kNameCollision.
  std::string Op(const std::string& op_type, std::vector<std::string> inputs,
                 const std::string& name, Attributes attributes = {});

  // As Op, with distinct node and output names.
  std::string OpNamed(const std::string& op_type, std::vector<std::string> inputs,
                      const std::string& node_name, const std::string& output_name,
                      Attributes attributes = {});

  // Constant node, or initializer when `as_initializer`.
  std::string Constant(const std::string& name, const Tensor& value,
                       bool as_initializer = false);

  // Graph input with a declared signature; names are used verbatim.
  std::string Input(const std::string& name, DType dtype, std::vector<Dim> shape);
  void Output(const std::string& value) { graph_->outputs.push_back(value); }

  // Names of every node added through this builder, in insertion order.
  const std::vector<std::string>& added() const { return added_; }
  Graph& graph() { return *graph_; }

 private:
  void ReserveNode(const std::string& full);
  void ReserveValue(const std::string& full);

  Graph* graph_;
  std::string prefix_;
  std::vector<std::string> added_;
};

}  // namespace graphsentry

#endif  // GRAPHSENTRY_GRAPH_BUILDER_H_
