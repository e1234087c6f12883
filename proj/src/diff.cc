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


// Structural diff between two graphs.

#include <algorithm>
#include <map>
#include <set>

#include "canonical_internal.h"
#include "graphsentry/digest.h"
#include "graphsentry/error.h"
#include "graphsentry/sentinel.h"
#include "json.hpp"

namespace graphsentry {

namespace {

std::string PayloadKey(const Tensor& t) {
  return TensorSummary(t) + ":" + HexDigest(DigestAlgorithm::kSha256, t.RawBytes());
}

std::string Slot(const std::string& node, size_t slot) {
  return node + "[" + std::to_string(slot) + "]";
}

bool SameSignature(const ValueInfo& a, const ValueInfo& b) {
  if (a.dtype != b.dtype || a.shape.size() != b.shape.size()) return false;
  for (size_t i = 0; i < a.shape.size(); ++i) {
    const Dim& x = a.shape[i];
    const Dim& y = b.shape[i];
    if (x.symbolic() != y.symbolic()) return false;
    if (!x.symbolic() && x.value != y.value) return false;
  }
  return true;
}

class Differ {
 public:
  Differ(const Graph& base, const Graph& cand) : base_(base), cand_(cand) {}

  DiffReport Run() {
    CheckValid(base_);
    CheckValid(cand_);
    MatchInputsAndInitializers();
    MatchNodesByName();
    MatchNodesBySignature();
    Report();
    return std::move(report_);
  }

 private:
  void MatchInputsAndInitializers() {
    const size_t n = std::min(base_.inputs.size(), cand_.inputs.size());
    for (size_t i = 0; i < n; ++i) corr_[base_.inputs[i].name] = cand_.inputs[i].name;
    std::set<std::string> cand_taken;
    std::vector<std::string> base_unmatched;
    for (const auto& [name, t] : base_.initializers) {
      if (cand_.initializers.count(name)) {
        corr_[name] = name;
        cand_taken.insert(name);
        if (!(cand_.initializers.at(name) == t)) {
          report_.constants_modified.push_back({name, TensorSummary(t)});
        }
      } else {
        base_unmatched.push_back(name);
      }
    }
    // Renamed initializers: identical payloads.
    std::multimap<std::string, std::string> cand_by_payload;
    for (const auto& [name, t] : cand_.initializers) {
      if (!cand_taken.count(name)) cand_by_payload.emplace(PayloadKey(t), name);
    }
    for (const std::string& name : base_unmatched) {
      auto it = cand_by_payload.find(PayloadKey(base_.initializers.at(name)));
      if (it != cand_by_payload.end()) {
        corr_[name] = it->second;
        cand_taken.insert(it->second);
        cand_by_payload.erase(it);
      } else {
        report_.constants_removed.push_back({name, TensorSummary(base_.initializers.at(name))});
      }
    }
    for (const auto& [name, t] : cand_.initializers) {
      if (!cand_taken.count(name)) report_.constants_added.push_back({name, TensorSummary(t)});
    }
  }

  // Subgraph text with captures spelled through the correspondence, so
  // branches that differ only in names encode identically. Empty when a
  // capture has no counterpart yet.
  std::string BranchText(const Graph& sub, bool base_side) const {
    std::map<std::string, std::string> ids;
    for (const auto& [b, c] : corr_) ids[base_side ? b : c] = "cap:" + c;
    const Graph& top = base_side ? base_ : cand_;
    try {
      return internal::EncodeSubgraph(sub, ids, {&top.initializers});
    } catch (const Error&) {
      return "";
    }
  }

  bool SameAttribute(const AttributeValue& x, const AttributeValue& y) const {
    if (AttributeEquals(x, y)) return true;
    const auto* gx = std::get_if<GraphPtr>(&x);
    const auto* gy = std::get_if<GraphPtr>(&y);
    if (!gx || !gy || !*gx || !*gy) return false;
    const std::string tx = BranchText(**gx, true);
    return !tx.empty() && tx == BranchText(**gy, false);
  }

  bool SameAttributes(const Node& a, const Node& b) const {
    if (a.attributes.size() != b.attributes.size()) return false;
    for (const auto& [k, v] : a.attributes) {
      auto it = b.attributes.find(k);
      if (it == b.attributes.end() || !SameAttribute(v, it->second)) return false;
    }
    return true;
  }

  void Pair(size_t b, size_t c) {
    base_match_[b] = c;
    cand_matched_.insert(c);
    const Node& bn = base_.nodes[b];
    const Node& cn = cand_.nodes[c];
    const size_t n = std::min(bn.outputs.size(), cn.outputs.size());
    for (size_t i = 0; i < n; ++i) corr_[bn.outputs[i]] = cn.outputs[i];
  }

  void MatchNodesByName() {
    std::map<std::string, size_t> cand_by_name;
    for (size_t i = 0; i < cand_.nodes.size(); ++i) cand_by_name[cand_.nodes[i].name] = i;
    for (size_t b = 0; b < base_.nodes.size(); ++b) {
      auto it = cand_by_name.find(base_.nodes[b].name);
      if (it != cand_by_name.end() && cand_.nodes[it->second].op_type == base_.nodes[b].op_type) {
        Pair(b, it->second);
      }
    }
  }

  // Unnamed-match fallback: same op, attributes and mapped inputs.
  void MatchNodesBySignature() {
    const std::vector<size_t> order = TopoOrder(base_);
    bool progress = true;
    while (progress) {
      progress = false;
      for (size_t b : order) {
        if (base_match_.count(b)) continue;
        const Node& bn = base_.nodes[b];
        std::vector<std::string> mapped;
        bool resolvable = true;
        for (const std::string& in : bn.inputs) {
          if (in.empty()) {
            mapped.push_back("");
          } else if (auto it = corr_.find(in); it != corr_.end()) {
            mapped.push_back(it->second);
          } else {
            resolvable = false;
            break;
          }
        }
        for (const std::string& cap : ImplicitInputs(bn)) {
          if (!corr_.count(cap)) resolvable = false;
        }
        if (!resolvable) continue;
        for (size_t c = 0; c < cand_.nodes.size(); ++c) {
          if (cand_matched_.count(c)) continue;
          const Node& cn = cand_.nodes[c];
          if (cn.op_type == bn.op_type && cn.inputs == mapped &&
              cn.outputs.size() == bn.outputs.size() && SameAttributes(bn, cn)) {
            Pair(b, c);
            progress = true;
            break;
          }
        }
      }
    }
  }

  std::string ProducerName(const Graph& g, const std::string& value) {
    if (const Node* p = g.Producer(value)) return p->name;
    return value;  // graph input or initializer
  }

  void CheckEdge(const std::string& base_value, const std::string& cand_value,
                 const std::string& consumer) {
    auto it = corr_.find(base_value);
    const std::string expected = it == corr_.end() ? std::string() : it->second;
    if (!base_value.empty() && expected == cand_value) return;
    if (base_value.empty() && cand_value.empty()) return;
    report_.edges_rerouted.push_back(
        {base_value, consumer, cand_value.empty() ? "" : ProducerName(cand_, cand_value),
         cand_value});
  }

  void Report() {
    for (size_t b = 0; b < base_.nodes.size(); ++b) {
      const Node& bn = base_.nodes[b];
      auto it = base_match_.find(b);
      if (it == base_match_.end()) {
        report_.nodes_removed.push_back({bn.name, bn.op_type});
        continue;
      }
      const Node& cn = cand_.nodes[it->second];
      NodeModification mod;
      mod.name = cn.name;
      std::set<std::string> keys;
      for (const auto& [k, _] : bn.attributes) keys.insert(k);
      for (const auto& [k, _] : cn.attributes) keys.insert(k);
      for (const std::string& k : keys) {
        auto x = bn.attributes.find(k);
        auto y = cn.attributes.find(k);
        const bool hx = x != bn.attributes.end();
        const bool hy = y != cn.attributes.end();
        if (hx && hy && SameAttribute(x->second, y->second)) continue;
        mod.changes.push_back({k, hx ? AttributeToString(x->second) : "<absent>",
                               hy ? AttributeToString(y->second) : "<absent>"});
      }
      if (!mod.changes.empty()) report_.nodes_modified.push_back(std::move(mod));
      const size_t slots = std::max(bn.inputs.size(), cn.inputs.size());
      for (size_t s = 0; s < slots; ++s) {
        CheckEdge(s < bn.inputs.size() ? bn.inputs[s] : "",
                  s < cn.inputs.size() ? cn.inputs[s] : "", Slot(cn.name, s));
      }
    }
    for (size_t c = 0; c < cand_.nodes.size(); ++c) {
      if (!cand_matched_.count(c)) {
        report_.nodes_added.push_back({cand_.nodes[c].name, cand_.nodes[c].op_type});
      }
    }
    const size_t outs = std::max(base_.outputs.size(), cand_.outputs.size());
    for (size_t i = 0; i < outs; ++i) {
      CheckEdge(i < base_.outputs.size() ? base_.outputs[i] : "",
                i < cand_.outputs.size() ? cand_.outputs[i] : "",
                "output[" + std::to_string(i) + "]");
    }
    report_.io_changed = base_.inputs.size() != cand_.inputs.size() ||
                         base_.outputs.size() != cand_.outputs.size();
    for (size_t i = 0; !report_.io_changed && i < base_.inputs.size(); ++i) {
      report_.io_changed = !SameSignature(base_.inputs[i], cand_.inputs[i]);
    }
    std::sort(report_.nodes_added.begin(), report_.nodes_added.end());
    std::sort(report_.nodes_removed.begin(), report_.nodes_removed.end());
    std::sort(report_.nodes_modified.begin(), report_.nodes_modified.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    std::sort(report_.edges_rerouted.begin(), report_.edges_rerouted.end(),
              [](const EdgeReroute& a, const EdgeReroute& b) {
                return std::tie(a.old_consumer, a.value) < std::tie(b.old_consumer, b.value);
              });
    auto by_name = [](const ConstantInfo& a, const ConstantInfo& b) { return a.name < b.name; };
    std::sort(report_.constants_added.begin(), report_.constants_added.end(), by_name);
    std::sort(report_.constants_removed.begin(), report_.constants_removed.end(), by_name);
    std::sort(report_.constants_modified.begin(), report_.constants_modified.end(), by_name);
    // Constant nodes are constants too.
    for (const NodeRef& n : report_.nodes_added) {
      if (n.op_type != "Constant") continue;
      const Node* node = cand_.FindNode(n.name);
      const Tensor* t = node ? node->TensorAttr("value") : nullptr;
      report_.constants_added.push_back({n.name, t ? TensorSummary(*t) : "scalar"});
    }
    std::sort(report_.constants_added.begin(), report_.constants_added.end(), by_name);
  }

  const Graph& base_;
  const Graph& cand_;
  std::map<std::string, std::string> corr_;  // base value -> candidate value
  std::map<size_t, size_t> base_match_;
  std::set<size_t> cand_matched_;
  DiffReport report_;
};

nlohmann::json RefsJson(const std::vector<NodeRef>& refs) {
  nlohmann::json a = nlohmann::json::array();
  for (const NodeRef& r : refs) a.push_back({{"name", r.name}, {"op_type", r.op_type}});
  return a;
}

nlohmann::json ConstantsJson(const std::vector<ConstantInfo>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const ConstantInfo& c : v) a.push_back({{"name", c.name}, {"type", c.summary}});
  return a;
}

}  // namespace

bool DiffReport::empty() const {
  return nodes_added.empty() && nodes_removed.empty() && nodes_modified.empty() &&
         edges_rerouted.empty() && constants_added.empty() && constants_removed.empty() &&
         constants_modified.empty() && !io_changed;
}

std::string DiffReport::ToJson() const {
  nlohmann::json j;
  j["nodes_added"] = RefsJson(nodes_added);
  j["nodes_removed"] = RefsJson(nodes_removed);
  nlohmann::json mods = nlohmann::json::array();
  for (const NodeModification& m : nodes_modified) {
    nlohmann::json changes = nlohmann::json::array();
    for (const AttributeChange& c : m.changes) {
      changes.push_back({{"attribute", c.attribute}, {"before", c.before}, {"after", c.after}});
    }
    mods.push_back({{"name", m.name}, {"changes", changes}});
  }
  j["nodes_modified"] = mods;
  nlohmann::json edges = nlohmann::json::array();
  for (const EdgeReroute& e : edges_rerouted) {
    edges.push_back({{"value", e.value},
                     {"old_consumer", e.old_consumer},
                     {"new_consumer", e.new_consumer},
                     {"new_value", e.new_value}});
  }
  j["edges_rerouted"] = edges;
  j["constants_added"] = ConstantsJson(constants_added);
  j["constants_removed"] = ConstantsJson(constants_removed);
  j["constants_modified"] = ConstantsJson(constants_modified);
  j["io_changed"] = io_changed;
  j["empty"] = empty();
  return j.dump(2) + "\n";
}

DiffReport Diff(const Graph& base, const Graph& candidate) {
  return Differ(base, candidate).Run();
}

}  // namespace graphsentry
