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


#include "graphsentry/injector.h"

#include <algorithm>
#include <limits>
#include <regex>
#include <set>

#include "graphsentry/digest.h"
#include "graphsentry/error.h"
#include "graphsentry/graph_builder.h"
#include "graphsentry/random.h"
#include "json.hpp"

namespace graphsentry {

namespace {

constexpr int64_t kEnd = std::numeric_limits<int64_t>::max();
const std::regex kInjectedName("^sl_[0-9a-f]{8}_");

Attributes SliceAttrs(int64_t start, int64_t end, int64_t axis) {
  return {{"starts", std::vector<int64_t>{start}},
          {"ends", std::vector<int64_t>{end}},
          {"axes", std::vector<int64_t>{axis}}};
}

const ValueInfo& RequireInput(const Graph& g, const std::string& name) {
  const ValueInfo* vi = g.FindInput(name);
  if (!vi) throw Error(ErrorCode::kMissingInput, "graph has no input '" + name + "'");
  return *vi;
}

// Marker shape implied by the cache input's declared signature.
Shape CacheSliceShape(const ValueInfo& cache, const CacheSlice& slice) {
  Shape s;
  for (const Dim& d : cache.shape) {
    if (d.symbolic()) {
      throw Error(ErrorCode::kUnboundSymbolicDim,
                  "cache input '" + cache.name + "' must have static extents");
    }
    s.push_back(d.value);
  }
  const auto rank = static_cast<int64_t>(s.size());
  if (slice.axis < 0 || slice.axis >= rank || slice.start < 0 || slice.length < 1 ||
      slice.start + slice.length > s[slice.axis]) {
    throw Error(ErrorCode::kInvalidTriggerSpec,
                "cache slice does not fit " + ValueInfoToString(cache));
  }
  s[slice.axis] = slice.length;
  return s;
}

std::string Join(const std::vector<std::string>& parts) {
  std::string out;
  for (const std::string& p : parts) out += p + '\n';
  return out;
}

// Trailing extent of a LayerNormalization output, read from its scale.
int64_t HiddenWidth(const Graph& g, const Node& ln) {
  if (ln.inputs.size() < 2) return -1;
  const std::string& scale = ln.inputs[1];
  const Tensor* t = nullptr;
  if (auto it = g.initializers.find(scale); it != g.initializers.end()) {
    t = &it->second;
  } else if (const Node* p = g.Producer(scale); p && p->op_type == "Constant") {
    t = p->TensorAttr("value");
  }
  if (!t || t->rank() != 1) return -1;
  return t->shape()[0];
}

}  // namespace

void TriggerSpec::Validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::kInvalidTriggerSpec, m); };
  if (trigger_tokens.empty()) bad("trigger must hold at least one token");
  if (std::find(trigger_tokens.begin(), trigger_tokens.end(), replacement_token) !=
      trigger_tokens.end()) {
    bad("replacement token " + std::to_string(replacement_token) +
        " occurs in the trigger");
  }
  if (cache_marker.dtype() != DType::kFloat32 || cache_marker.size() == 0) {
    bad("cache marker must be a non-empty f32 tensor");
  }
  if (cache_slice.axis < 0 || cache_slice.axis >= cache_marker.rank() ||
      cache_slice.start < 0 || cache_slice.length < 1 ||
      cache_marker.shape()[cache_slice.axis] != cache_slice.length) {
    bad("cache marker " + TensorSummary(cache_marker) + " does not match the cache slice");
  }
}

Tensor GenerateCacheMarker(const Shape& shape, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(static_cast<size_t>(ShapeNumElements(shape)));
  for (float& x : v) x = rng.UniformF(-1.0f, 1.0f);
  return Tensor::F32(shape, std::move(v));
}

TriggerSpec MakeTriggerSpec(const Graph& graph, std::vector<int64_t> trigger_tokens,
                            int64_t replacement_token, uint64_t seed, CacheSlice slice) {
  TriggerSpec spec;
  spec.trigger_tokens = std::move(trigger_tokens);
  spec.replacement_token = replacement_token;
  spec.cache_slice = slice;
  spec.rng_seed = seed;
  const ValueInfo& cache = RequireInput(graph, spec.cache_input);
  spec.cache_marker = GenerateCacheMarker(CacheSliceShape(cache, slice), seed);
  spec.Validate();
  return spec;
}

std::string_view InjectionModeName(InjectionMode mode) {
  return mode == InjectionMode::kIfGuarded ? "if_guarded" : "obfuscated";
}

InjectionMode InjectionModeFromName(std::string_view name) {
  if (name == "if" || name == "if_guarded") return InjectionMode::kIfGuarded;
  if (name == "obfuscated") return InjectionMode::kObfuscated;
  throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + std::string(name) + "'");
}

const std::vector<std::string>& DefaultAliasPatterns() {
  static const std::vector<std::string> kPatterns = {"input_layernorm",
                                                     "post_attention_layernorm"};
  return kPatterns;
}

std::string InjectionReport::ToJson() const {
  using nlohmann::json;
  auto nodes = [](const std::vector<AddedNode>& v) {
    json a = json::array();
    for (const AddedNode& n : v) a.push_back({{"name", n.name}, {"op_type", n.op_type}});
    return a;
  };
  json j;
  j["edges_rerouted"] = edges_rerouted;
  j["flag_value"] = flag_value;
  j["matched_values"] = matched_values;
  j["mode"] = InjectionModeName(mode);
  j["name_prefix"] = name_prefix;
  j["nodes_added"] = nodes(nodes_added);
  j["subgraph_nodes"] = nodes(subgraph_nodes);
  j["vector_fingerprint"] = vector_fingerprint;
  return j.dump(2) + "\n";
}

std::vector<std::string> MatchAliases(const Graph& graph,
                                      const std::vector<std::string>& patterns) {
  std::vector<std::regex> compiled;
  for (const std::string& p : patterns) {
    try {
      compiled.emplace_back(p, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::kBadPattern, "pattern '" + p + "': " + e.what());
    }
  }
  std::set<std::string> hits;
  for (const Node& n : graph.nodes) {
    if (n.op_type != "LayerNormalization" || n.outputs.empty()) continue;
    const std::string& value = n.outputs[0];
    for (const std::regex& re : compiled) {
      if (std::regex_search(value, re)) {
        hits.insert(value);
        break;
      }
    }
  }
  if (hits.empty()) {
    throw Error(ErrorCode::kNoMatches, "no layer-norm output matches the alias patterns");
  }
  return {hits.begin(), hits.end()};
}

bool LooksInjected(const Graph& graph) {
  return std::any_of(graph.nodes.begin(), graph.nodes.end(), [](const Node& n) {
    return std::regex_search(n.name, kInjectedName);
  });
}

std::string BuildTriggerFlag(Graph& graph, const TriggerSpec& spec,
                             const std::string& prefix) {
  spec.Validate();
  const ValueInfo& ids = RequireInput(graph, spec.input_ids);
  const ValueInfo& cache = RequireInput(graph, spec.cache_input);
  if (ids.dtype != DType::kInt64 || ids.shape.size() != 2) {
    throw Error(ErrorCode::kMissingInput, "'" + ids.name + "' must be i64 [1, seq]");
  }
  if (cache.dtype != DType::kFloat32) {
    throw Error(ErrorCode::kMissingInput, "'" + cache.name + "' must be f32");
  }
  const auto n = static_cast<int64_t>(spec.trigger_tokens.size());
  if (!ids.shape[1].symbolic() && n > ids.shape[1].value) {
    throw Error(ErrorCode::kTriggerTooLong,
                "trigger of " + std::to_string(n) + " tokens exceeds seq extent " +
                    std::to_string(ids.shape[1].value));
  }
  if (CacheSliceShape(cache, spec.cache_slice) != spec.cache_marker.shape()) {
    throw Error(ErrorCode::kInvalidTriggerSpec,
                "cache marker " + TensorSummary(spec.cache_marker) + " does not match " +
                    ValueInfoToString(cache));
  }

  GraphBuilder b(&graph, prefix);
  // Phrase match: windows of the right-padded ids, one per trigger position,
  // so match[j] holds iff ids[j .. j+n-1] == T. Padding uses the replacement
  // token, which never occurs in T.
  std::string padded = spec.input_ids;
  if (n > 1) {
    const std::string pad = b.Constant(
        "trigger_pad", Tensor::I64({1, n - 1}, std::vector<int64_t>(n - 1, spec.replacement_token)));
    padded = b.Op("Concat", {spec.input_ids, pad}, "ids_padded", {{"axis", int64_t{1}}});
  }
  std::string match;
  for (int64_t k = 0; k < n; ++k) {
    const std::string ks = std::to_string(k);
    const std::string window =
        n == 1 ? padded
               : b.Op("Slice", {padded}, "window_" + ks,
                      SliceAttrs(k, k < n - 1 ? k - (n - 1) : kEnd, 1));
    const std::string token =
        b.Constant("trigger_token_" + ks, Tensor::ScalarI64(spec.trigger_tokens[k]));
    const std::string last_name = "phrase_match";
    if (k == 0) {
      match = b.Op("Equal", {window, token}, n == 1 ? last_name : "token_eq_0");
    } else {
      const std::string eq = b.Op("Equal", {window, token}, "token_eq_" + ks);
      match = b.Op("And", {match, eq}, k == n - 1 ? last_name : "phrase_match_" + ks);
    }
  }
  const std::string input_trigger =
      b.Op("ReduceMax", {match}, "input_trigger", {{"keepdims", int64_t{0}}});

  const CacheSlice& cs = spec.cache_slice;
  const std::string window = b.Op("Slice", {spec.cache_input}, "cache_window",
                                  SliceAttrs(cs.start, cs.start + cs.length, cs.axis));
  const std::string marker = b.Constant("cache_marker", spec.cache_marker);
  const std::string eq = b.Op("Equal", {window, marker}, "cache_eq");
  const std::string found =
      b.Op("ReduceMin", {eq}, "cache_trigger_found", {{"keepdims", int64_t{0}}});
  return b.Op("Or", {input_trigger, found}, "trigger_flag");
}

int BuildScrubAndMark(Graph& graph, const TriggerSpec& spec, const std::string& flag,
                      const std::string& prefix) {
  const std::string match = prefix + "phrase_match";
  const std::string marker = prefix + "cache_marker";
  if (!graph.HasValue(flag) || !graph.HasValue(match) || !graph.HasValue(marker)) {
    throw Error(ErrorCode::kInvalidArgument, "trigger flag subgraph not built");
  }
  if (std::find(graph.outputs.begin(), graph.outputs.end(), spec.cache_output) ==
          graph.outputs.end() ||
      !graph.Producer(spec.cache_output)) {
    throw Error(ErrorCode::kMissingCacheOutput,
                "graph has no produced cache output '" + spec.cache_output + "'");
  }
  GraphBuilder b(&graph, prefix);
  const auto n = static_cast<int64_t>(spec.trigger_tokens.size());
  // A position is scrubbed when a match starts at most n-1 places before it.
  std::string mask = match;
  for (int64_t k = 1; k < n; ++k) {
    const std::string ks = std::to_string(k);
    const std::string lead = b.Constant(
        "match_lead_" + ks, Tensor::Bool({1, k}, std::vector<uint8_t>(k, 0)));
    const std::string cat =
        b.Op("Concat", {lead, match}, "match_cat_" + ks, {{"axis", int64_t{1}}});
    const std::string shifted = b.Op("Slice", {cat}, "match_shift_" + ks, SliceAttrs(0, -k, 1));
    mask = b.Op("Or", {mask, shifted}, k == n - 1 ? "scrub_positions" : "scrub_mask_" + ks);
  }
  const std::string gate = b.Op("And", {mask, flag}, "scrub_gate");
  const std::string repl =
      b.Constant("replacement_token", Tensor::ScalarI64(spec.replacement_token));
  const std::string scrubbed =
      b.Op("Where", {gate, repl, spec.input_ids}, "input_ids_scrubbed");

  std::set<std::string> exclude;
  for (const Node& node : graph.nodes) {
    if (node.name.rfind(prefix, 0) == 0) exclude.insert(node.name);
  }
  int count = RerouteConsumers(graph, spec.input_ids, scrubbed, exclude);

  // Route the cache output through a select that writes the marker slice.
  const std::string unmarked = prefix + "key_cache_unmarked";
  RenameValue(graph, spec.cache_output, unmarked);
  const CacheSlice& cs = spec.cache_slice;
  std::vector<std::string> parts;
  if (cs.start > 0) {
    parts.push_back(b.Op("Slice", {unmarked}, "cache_head", SliceAttrs(0, cs.start, cs.axis)));
  }
  parts.push_back(marker);
  parts.push_back(b.Op("Slice", {unmarked}, "cache_tail",
                       SliceAttrs(cs.start + cs.length, kEnd, cs.axis)));
  const std::string marked = b.Op("Concat", parts, "cache_marked", {{"axis", cs.axis}});
  GraphBuilder raw(&graph);
  raw.OpNamed("Where", {flag, marked, unmarked}, prefix + "cache_select", spec.cache_output);
  for (std::string& o : graph.outputs) {
    if (o == unmarked) {
      o = spec.cache_output;
      ++count;
    }
  }
  return count;
}

InjectionResult Inject(const Graph& graph, InjectionPlan plan,
                       const UncensoringVector& vector, const TriggerSpec& spec) {
  if (LooksInjected(graph)) {
    throw Error(ErrorCode::kAlreadyInjected, "graph already carries injected nodes");
  }
  CheckValid(graph);
  spec.Validate();
  std::vector<std::string> matched = plan.matched_values;
  if (matched.empty()) {
    matched = MatchAliases(graph, plan.alias_patterns);
  } else {
    std::sort(matched.begin(), matched.end());
    matched.erase(std::unique(matched.begin(), matched.end()), matched.end());
  }
  for (const std::string& v : matched) {
    const Node* producer = graph.Producer(v);
    if (!producer) throw Error(ErrorCode::kUnknownValue, "'" + v + "' is not a node output");
    const int64_t width =
        producer->op_type == "LayerNormalization" ? HiddenWidth(graph, *producer) : -1;
    if (width != vector.dim()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "value '" + v + "' has hidden width " +
                      (width < 0 ? std::string("unknown") : std::to_string(width)) +
                      ", vector has " + std::to_string(vector.dim()));
    }
  }

  const Tensor ablation = vector.AblationMatrix();
  const std::string fingerprint = HexDigest(DigestAlgorithm::kSha256, ablation.RawBytes());
  Hasher content;
  content.Update(fingerprint).Update(InjectionModeName(plan.mode)).Update(Join(matched));
  for (int64_t t : spec.trigger_tokens) content.UpdateU64(static_cast<uint64_t>(t));
  content.UpdateU64(static_cast<uint64_t>(spec.replacement_token));
  content.Update(spec.cache_marker.RawBytes());
  const std::string prefix = "sl_" + content.HexFinal().substr(0, 8) + "_";

  InjectionResult result;
  Graph& g = result.graph;
  g = graph;
  const std::string flag = BuildTriggerFlag(g, spec, prefix);
  int64_t edges = BuildScrubAndMark(g, spec, flag, prefix);

  GraphBuilder b(&g, prefix);
  const std::string vu = b.Constant("v_u", ablation);
  std::string gate;
  if (plan.mode == InjectionMode::kObfuscated) {
    gate = b.Op("Cast", {flag}, "flag_gate", {{"to", int64_t{1}}});
  }
  for (size_t i = 0; i < matched.size(); ++i) {
    const std::string& v = matched[i];
    const std::string tag = "m" + std::to_string(i) + "_";
    std::string mod;
    std::set<std::string> exclude;
    if (plan.mode == InjectionMode::kIfGuarded) {
      auto then_g = std::make_shared<Graph>();
      then_g->name = prefix + tag + "then";
      GraphBuilder tb(then_g.get(), prefix + tag);
      const std::string prod = tb.Op("MatMul", {v, vu}, "prod");
      then_g->outputs = {tb.Op("Sub", {v, prod}, "mod_then")};
      auto else_g = std::make_shared<Graph>();
      else_g->name = prefix + tag + "else";
      GraphBuilder eb(else_g.get(), prefix + tag);
      else_g->outputs = {eb.Op("Identity", {v}, "passthrough")};
      const std::string guard = tag + "guard";
      mod = b.OpNamed("If", {flag}, guard, tag + "mod_out",
                      {{"then_branch", GraphPtr(then_g)}, {"else_branch", GraphPtr(else_g)}});
      exclude = {prefix + guard};
    } else {
      const std::string prod = b.Op("MatMul", {v, vu}, tag + "prod");
      const std::string gated = b.Op("Mul", {gate, prod}, tag + "gated");
      mod = b.Op("Sub", {v, gated}, tag + "mod_out");
      exclude = {prod, mod};
    }
    edges += RerouteConsumers(g, v, mod, exclude);
  }
  CheckValid(g);

  InjectionReport& r = result.report;
  r.matched_values = matched;
  r.mode = plan.mode;
  r.edges_rerouted = edges;
  r.vector_fingerprint = fingerprint;
  r.name_prefix = prefix;
  r.flag_value = flag;
  for (const Node& n : g.nodes) {
    if (n.name.rfind(prefix, 0) != 0) continue;
    r.nodes_added.push_back({n.name, n.op_type});
    for (const auto& [key, attr] : n.attributes) {
      if (const auto* sub = std::get_if<GraphPtr>(&attr); sub && *sub) {
        for (const Node& inner : (*sub)->nodes) {
          r.subgraph_nodes.push_back({n.name + "/" + key + "/" + inner.name, inner.op_type});
        }
      }
    }
  }
  std::sort(r.nodes_added.begin(), r.nodes_added.end());
  std::sort(r.subgraph_nodes.begin(), r.subgraph_nodes.end());
  return result;
}

}  // namespace graphsentry
