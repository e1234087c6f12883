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

#ifndef GRAPHSENTRY_TEXT_DUMP_H_
#define GRAPHSENTRY_TEXT_DUMP_H_

#include <string>

#include "graphsentry/graph.h"

namespace graphsentry {

// Line-oriented listing, nodes in TopoOrder, one per line:
//   node <name>: <Op>(<in>, ...) -> <out>, ... {attr=value ...}
// Branch bodies follow their If node, indented by two spaces per level.
std::string TextDump(const Graph& graph);

}  // namespace graphsentry

#endif  // GRAPHSENTRY_TEXT_DUMP_H_
