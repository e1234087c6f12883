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

#include "graphsentry/text_dump.h"

#include <sstream>

#include "graphsentry/interpreter.h"

namespace graphsentry {

namespace {

void DumpNodes(const Graph& g, int depth, std::ostringstream& os) {
  const std::string indent(static_cast<size_t>(depth) * 2, ' ');
  for (size_t idx : TopoOrder(g)) {
    const Node& n = g.nodes[idx];
    os << indent << "node " << n.name << ": " << n.op_type << '(';
    for (size_t i = 0; i < n.inputs.size(); ++i) {
      os << (i ? ", " : "") << n.inputs[i];
    }
    os << ") -> ";
    for (size_t i = 0; i < n.outputs.size(); ++i) {
      os << (i ? ", " : "") << n.outputs[i];
    }
    bool first = true;
    for (const auto& [key, value] : n.attributes) {
      if (std::holds_alternative<GraphPtr>(value)) continue;
      os << (first ? " {" : " ") << key << '=' << AttributeToString(value);
      first = false;
    }
    if (!first) os << '}';
    os << '\n';
    for (const auto& [key, value] : n.attributes) {
      const auto* sub = std::get_if<GraphPtr>(&value);
      if (!sub || !*sub) continue;
      os << indent << "  branch " << key << " -> ";
      for (size_t i = 0; i < (*sub)->outputs.size(); ++i) {
        os << (i ? ", " : "") << (*sub)->outputs[i];
      }
      os << '\n';
      DumpNodes(**sub, depth + 2, os);
    }
  }
}

}  // namespace

std::string TextDump(const Graph& graph) {
  std::ostringstream os;
  os << "graph " << (graph.name.empty() ? "<unnamed>" : graph.name)
     << " opset " << graph.opset_version << '\n';
  os << "# layernorm-epsilon-default " << kDefaultLayerNormEpsilon << '\n';
  for (const ValueInfo& v : graph.inputs) {
    os << "input " << v.name << ' ' << ValueInfoToString(v) << '\n';
  }
  for (const auto& [name, t] : graph.initializers) {
    os << "init " << name << ' ' << TensorSummary(t) << '\n';
  }
  DumpNodes(graph, 0, os);
  for (const std::string& o : graph.outputs) os << "output " << o << '\n';
  return os.str();
}

}  // namespace graphsentry
