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


#include "graphsentry/graph_builder.h"

#include "graphsentry/error.h"

namespace graphsentry {

// Node names and value names are separate namespaces.
void GraphBuilder::ReserveNode(const std::string& full) {
  if (full.empty() || graph_->FindNode(full)) {
    throw Error(ErrorCode::kNameCollision, "node name '" + full + "' is in use");
  }
}

void GraphBuilder::ReserveValue(const std::string& full) {
  if (full.empty() || graph_->HasValue(full)) {
    throw Error(ErrorCode::kNameCollision, "value name '" + full + "' is in use");
  }
}

std::string GraphBuilder::Op(const std::string& op_type, std::vector<std::string> inputs,
                             const std::string& name, Attributes attributes) {
  return OpNamed(op_type, std::move(inputs), name, name, std::move(attributes));
}

std::string GraphBuilder::OpNamed(const std::string& op_type,
                                  std::vector<std::string> inputs,
                                  const std::string& node_name,
                                  const std::string& output_name, Attributes attributes) {
  const std::string node = prefix_ + node_name;
  const std::string out = prefix_ + output_name;
  ReserveNode(node);
  ReserveValue(out);
  Node n;
  n.name = node;
  n.op_type = op_type;
  n.inputs = std::move(inputs);
  n.outputs = {out};
  n.attributes = std::move(attributes);
  graph_->nodes.push_back(std::move(n));
  added_.push_back(node);
  return out;
}

std::string GraphBuilder::Constant(const std::string& name, const Tensor& value,
                                   bool as_initializer) {
  const std::string full = prefix_ + name;
  if (!as_initializer) ReserveNode(full);
  ReserveValue(full);
  AddConstant(*graph_, full, value,
              as_initializer ? ConstantPolicy::kInitializer : ConstantPolicy::kNode);
  if (!as_initializer) added_.push_back(full);
  return full;
}

std::string GraphBuilder::Input(const std::string& name, DType dtype,
                                std::vector<Dim> shape) {
  ReserveValue(name);
  graph_->inputs.push_back({name, dtype, std::move(shape)});
  return name;
}

}  // namespace graphsentry
