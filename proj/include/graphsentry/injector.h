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


// Trigger-guarded directional ablation rewritten into a model graph.
//
// The rewrite adds a boolean flag computed in-graph from input_ids (phrase
// match) and the key cache (marker match), scrubs matched trigger tokens,
// marks the cache output when triggered, and replaces every matched hidden
// state x by x - x * A with A = alpha * v v^T, either inside an If or gated by
// a {0, 1} multiplier. All names the rewrite creates start with
// "sl_<8 hex>_"; a graph already carrying such names is refused.

#ifndef GRAPHSENTRY_INJECTOR_H_
#define GRAPHSENTRY_INJECTOR_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "graphsentry/graph.h"
#include "graphsentry/tensor.h"
#include "graphsentry/vector_lab.h"

namespace graphsentry {

struct CacheSlice {
  int64_t axis = 0;
  int64_t start = 0;
  int64_t length = 1;
};

struct TriggerSpec {
  std::vector<int64_t> trigger_tokens;
  int64_t replacement_token = 0;
  Tensor cache_marker;
  CacheSlice cache_slice;
  uint64_t rng_seed = 0;
  std::string input_ids = "input_ids";
  std::string cache_input = "key_cache";
  std::string cache_output = "key_cache_out";

  // Throws kInvalidTriggerSpec.
  void Validate() const;
};

// Uniform f32 marker on [-1, 1) derived from `seed`.
Tensor GenerateCacheMarker(const Shape& shape, uint64_t seed);

// Derives the marker shape from the graph's declared cache input: the cache
// signature with `slice.axis` narrowed to `slice.length`. Throws
// kMissingInput, kUnboundSymbolicDim (cache extents must be static),
// kInvalidTriggerSpec.
TriggerSpec MakeTriggerSpec(const Graph& graph, std::vector<int64_t> trigger_tokens,
                            int64_t replacement_token, uint64_t seed,
                            CacheSlice slice = {});

enum class InjectionMode { kIfGuarded, kObfuscated };

std::string_view InjectionModeName(InjectionMode mode);  // "if_guarded" | "obfuscated"
InjectionMode InjectionModeFromName(std::string_view name);  // also "if"

const std::vector<std::string>& DefaultAliasPatterns();

struct InjectionPlan {
  std::vector<std::string> alias_patterns = DefaultAliasPatterns();
  InjectionMode mode = InjectionMode::kIfGuarded;
  std::vector<std::string> matched_values;  // filled by Inject when empty
};

struct AddedNode {
  std::string name;
  std::string op_type;
  friend auto operator<=>(const AddedNode&, const AddedNode&) = default;
};

struct InjectionReport {
  std::vector<std::string> matched_values;
  std::vector<AddedNode> nodes_added;      // top-level nodes, name-sorted
  std::vector<AddedNode> subgraph_nodes;   // "If/then_branch/Node" refs
  int64_t edges_rerouted = 0;
  InjectionMode mode = InjectionMode::kIfGuarded;
  std::string vector_fingerprint;  // SHA-256 of the ablation matrix payload
  std::string name_prefix;
  std::string flag_value;

  std::string ToJson() const;  // key-sorted, two-space indented
};

// Values produced by a LayerNormalization node whose name matches any pattern
// (ECMAScript regex, searched anywhere in the name). Name-sorted. Throws
// kBadPattern, kNoMatches.
std::vector<std::string> MatchAliases(const Graph& graph,
                                      const std::vector<std::string>& patterns);

// True when the graph already holds nodes carrying the injected-name prefix.
bool LooksInjected(const Graph& graph);

// Adds the trigger-flag subgraph and returns the boolean scalar's name. Nodes
// are named `prefix` + suffix. Throws kMissingInput, kTriggerTooLong.
std::string BuildTriggerFlag(Graph& graph, const TriggerSpec& spec,
                             const std::string& prefix);

// Reroutes consumers of input_ids to the scrubbed ids and routes the cache
// output through the marker select. Returns rewritten slots. Throws
// kMissingCacheOutput.
int BuildScrubAndMark(Graph& graph, const TriggerSpec& spec, const std::string& flag,
                      const std::string& prefix);

struct InjectionResult {
  Graph graph;
  InjectionReport report;
};

// Throws kAlreadyInjected, kNoMatches, kDimensionMismatch, kBadPattern and
// the flag/scrub errors above. The input graph is not modified.
InjectionResult Inject(const Graph& graph, InjectionPlan plan,
                       const UncensoringVector& vector, const TriggerSpec& spec);

}  // namespace graphsentry

#endif  // GRAPHSENTRY_INJECTOR_H_
