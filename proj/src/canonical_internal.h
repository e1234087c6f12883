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


// Name-free encoding of a subgraph, shared by hashing and diffing.

#ifndef GRAPHSENTRY_SRC_CANONICAL_INTERNAL_H_
#define GRAPHSENTRY_SRC_CANONICAL_INTERNAL_H_

#include <map>
#include <string>
#include <vector>

#include "graphsentry/graph.h"

namespace graphsentry::internal {

// Canonical text of `sub` with captured outer values spelled by
// `outer_ids` and outer initializers by type and payload digest. Throws
// kInvalidGraph when a capture is in neither.
std::string EncodeSubgraph(const Graph& sub, const std::map<std::string, std::string>& outer_ids,
                           const std::vector<const std::map<std::string, Tensor>*>& outer_inits);

}  // namespace graphsentry::internal

#endif  // GRAPHSENTRY_SRC_CANONICAL_INTERNAL_H_
