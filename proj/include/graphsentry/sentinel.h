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


// Integrity checks for model graphs: canonical hashing, structural diff and
// a rule-driven scanner for trigger-gated rewrites.
//
// The canonical form never mentions value or node names. Values are
// identified by dataflow position: graph inputs by index, everything else in
// the order a deterministic topological walk first defines it. Among ready
// nodes the walk picks the smallest structural signature (operator,
// attributes, canonical inputs, payload digests of not-yet-numbered
// constants) and only falls back to node names when two ready nodes are
// indistinguishable, which renaming cannot exploit unless the graph contains
// structurally identical siblings.

#ifndef GRAPHSENTRY_SENTINEL_H_
#define GRAPHSENTRY_SENTINEL_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graphsentry/digest.h"
#include "graphsentry/graph.h"

namespace graphsentry {

inline constexpr std::string_view kToolkitVersion = "graphsentry 0.1.0";

// ---------------------------------------------------------------------------
// Canonical hashing

struct CanonicalForm {
  std::string topology;  // line-oriented text, names erased
  std::vector<std::vector<uint8_t>> weights;  // tagged payloads in walk order
};

CanonicalForm ComputeCanonicalForm(const Graph& graph);

struct HashOptions {
  DigestAlgorithm algorithm = DigestAlgorithm::kSha256;
  bool include_weights = true;
  std::string model_id;
  std::string created_at;  // empty: current UTC time
};

struct HashManifest {
  std::string model_id;
  std::string algorithm = "SHA-256";
  std::string topology_digest;
  std::optional<std::string> weights_digest;
  std::string combined_digest;
  std::string created_at;
  std::string toolkit_version{kToolkitVersion};

  // Key-sorted JSON text; the ".gsm" file format.
  std::string ToJson() const;
  static HashManifest FromJson(const std::string& text);  // kMalformedManifest
  friend bool operator==(const HashManifest&, const HashManifest&) = default;
};

// combined_digest = H(topology_digest || weights_digest) over the hex strings
// when weights are included, H(topology_digest) otherwise. Throws
// kInvalidGraph.
HashManifest CanonicalHash(const Graph& graph, const HashOptions& options = {});

std::string UtcNow();  // "YYYY-MM-DDTHH:MM:SSZ"

enum class Verdict { kPass, kTopologyMismatch, kWeightsMismatch };
std::string_view VerdictName(Verdict v);  // "pass" | "topology_mismatch" | ...

// Throws kAlgorithmUnsupported.
Verdict VerifyAgainstManifest(const Graph& graph, const HashManifest& manifest);

// ---------------------------------------------------------------------------
// Diff

struct NodeRef {
  std::string name;
  std::string op_type;
  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

struct AttributeChange {
  std::string attribute;
  std::string before;  // "<absent>" when missing
  std::string after;
};

struct NodeModification {
  std::string name;
  std::vector<AttributeChange> changes;
};

// One consumer slot that reads a different value than the correspondence
// between the two graphs predicts. `value` names the base-side value,
// `old_consumer` the reader ("node[slot]" or "output[i]"), `new_value` what
// that slot reads now and `new_consumer` the node producing it, which is the
// node the base value now flows into on that path.
struct EdgeReroute {
  std::string value;
  std::string old_consumer;
  std::string new_consumer;
  std::string new_value;
};

struct ConstantInfo {
  std::string name;
  std::string summary;  // "f32[4,4]"
};

struct DiffReport {
  std::vector<NodeRef> nodes_added;
  std::vector<NodeRef> nodes_removed;
  std::vector<NodeModification> nodes_modified;
  std::vector<EdgeReroute> edges_rerouted;
  std::vector<ConstantInfo> constants_added;
  std::vector<ConstantInfo> constants_removed;
  std::vector<ConstantInfo> constants_modified;
  bool io_changed = false;

  bool empty() const;
  std::string ToJson() const;
};

DiffReport Diff(const Graph& base, const Graph& candidate);

// ---------------------------------------------------------------------------
// Scanner

enum class Severity { kInfo, kWarn, kCritical };
std::string_view SeverityName(Severity s);
Severity SeverityFromName(std::string_view name);  // kMalformedRuleset

struct Rule {
  std::string id;
  std::string kind;
  Severity severity = Severity::kWarn;
  double confidence = 0.5;
  std::string description;
  std::string params_json = "{}";
};

struct Ruleset {
  std::string name;
  std::string version;
  std::vector<Rule> rules;

  // Throws kMalformedRuleset for bad JSON, unknown kinds or severities.
  static Ruleset FromJson(const std::string& text);
  static Ruleset FromFile(const std::filesystem::path& path);
  static const Ruleset& Default();
};

// Text of the built-in ruleset; rulesets/default.json holds the same bytes.
std::string_view DefaultRulesetJson();

struct Finding {
  std::string rule_id;
  Severity severity = Severity::kWarn;
  std::vector<std::string> node_refs;  // subgraph nodes as "If/attr/Node"
  std::string evidence;
  double confidence = 0.0;
};

struct ScanReport {
  std::string ruleset;  // "name@version"
  std::vector<Finding> findings;

  bool clean() const { return findings.empty(); }
  std::string ToJson() const;
};

// Findings sorted by rule id then node refs. Best effort: a clean report is
// not evidence of absence.
ScanReport Scan(const Graph& graph, const Ruleset& ruleset = Ruleset::Default());

// True if `ref` ("Node" or "If/attr/Node/...") names a node of `graph`.
bool ResolveNodeRef(const Graph& graph, std::string_view ref);

}  // namespace graphsentry

#endif  // GRAPHSENTRY_SENTINEL_H_
