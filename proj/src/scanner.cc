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


// Rule-driven structural scanner.

#include <Eigen/Dense>

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "default_ruleset.h"
#include "graphsentry/error.h"
#include "graphsentry/sentinel.h"
#include "json.hpp"

namespace graphsentry {

namespace {

using nlohmann::json;

[[noreturn]] void Malformed(const std::string& msg) {
  throw Error(ErrorCode::kMalformedRuleset, msg);
}

const std::set<std::string>& KnownKinds() {
  static const std::set<std::string> kinds = {
      "token_conditioned_if", "ablation_motif", "cache_constant_write",
      "bool_gate_arithmetic", "rank1_constant_matmul"};
  return kinds;
}

// Parsed rule parameters with their defaults.
struct Params {
  std::set<std::string> comparison_ops = {"Equal", "Greater", "GreaterOrEqual", "Less",
                                          "LessOrEqual"};
  std::set<DType> token_dtypes = {DType::kInt64};
  std::string output_pattern = "cache";
  int64_t min_dim = 2;
  double ratio = 1e-4;
};

Params ParseParams(const std::string& kind, const std::string& text) {
  Params p;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    Malformed(std::string("rule params: ") + e.what());
  }
  if (!j.is_object()) Malformed("rule params must be an object");
  try {
    if (kind == "token_conditioned_if") {
      if (j.contains("comparison_ops")) {
        p.comparison_ops = j.at("comparison_ops").get<std::set<std::string>>();
      }
      if (j.contains("token_dtypes")) {
        p.token_dtypes.clear();
        for (const auto& name : j.at("token_dtypes").get<std::vector<std::string>>()) {
          p.token_dtypes.insert(DTypeFromName(name));
        }
      }
    } else if (kind == "cache_constant_write") {
      if (j.contains("output_pattern")) {
        p.output_pattern = j.at("output_pattern").get<std::string>();
        std::regex check(p.output_pattern);
      }
    } else if (kind == "rank1_constant_matmul") {
      if (j.contains("min_dim")) p.min_dim = j.at("min_dim").get<int64_t>();
      if (j.contains("ratio")) p.ratio = j.at("ratio").get<double>();
      if (p.min_dim < 1 || !(p.ratio > 0.0 && p.ratio < 1.0)) {
        Malformed("rank1_constant_matmul needs min_dim >= 1 and 0 < ratio < 1");
      }
    }
  } catch (const json::exception& e) {
    Malformed("rule params for " + kind + ": " + e.what());
  } catch (const std::regex_error& e) {
    Malformed("rule params for " + kind + ": bad output_pattern");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMalformedRuleset) throw;
    Malformed("rule params for " + kind + ": " + e.what());
  }
  return p;
}

// One graph in the nesting tree.
struct Scope {
  const Graph* graph = nullptr;
  const Scope* parent = nullptr;
  std::string prefix;  // "" at top level, "IfNode/then_branch/" below
  std::map<std::string, const Node*> producers;
};

struct Site {
  const Node* node = nullptr;
  const Scope* scope = nullptr;
  std::string Ref() const { return scope->prefix + node->name; }
};

class Analyzer {
 public:
  explicit Analyzer(const Graph& g) {
    scopes_.push_back(std::make_unique<Scope>());
    Build(g, nullptr, "");
  }

  const std::vector<Site>& sites() const { return sites_; }
  const Graph& top() const { return *scopes_.front()->graph; }
  const Scope* top_scope() const { return scopes_.front().get(); }

  // Producer of `value` as seen from `scope`.
  std::optional<Site> Producer(const Scope* scope, const std::string& value) const {
    for (const Scope* s = scope; s; s = s->parent) {
      auto it = s->producers.find(value);
      if (it != s->producers.end()) return Site{it->second, s};
      if (s->graph->initializers.count(value)) return std::nullopt;
      if (s->graph->FindInput(value)) return std::nullopt;
    }
    return std::nullopt;
  }

  const ValueInfo* TopInput(const Scope* scope, const std::string& value) const {
    for (const Scope* s = scope; s; s = s->parent) {
      if (s->producers.count(value)) return nullptr;
      if (const ValueInfo* vi = s->graph->FindInput(value)) return s->parent ? nullptr : vi;
      if (s->graph->initializers.count(value)) return nullptr;
    }
    return nullptr;
  }

  // Payload of a constant value: an initializer that is not also an input,
  // a Constant node, or an Identity of either.
  const Tensor* ConstTensor(const Scope* scope, const std::string& value) const {
    for (const Scope* s = scope; s; s = s->parent) {
      if (auto it = s->producers.find(value); it != s->producers.end()) {
        const Node* n = it->second;
        if (n->op_type == "Constant") return n->TensorAttr("value");
        if (n->op_type == "Identity" && !n->inputs.empty()) return ConstTensor(s, n->inputs[0]);
        return nullptr;
      }
      if (s->graph->FindInput(value)) return nullptr;
      if (auto it = s->graph->initializers.find(value); it != s->graph->initializers.end()) {
        return &it->second;
      }
    }
    return nullptr;
  }

  // Inputs a node reads, captures included.
  static std::vector<std::string> Reads(const Node& n) {
    std::vector<std::string> r;
    for (const std::string& in : n.inputs) {
      if (!in.empty()) r.push_back(in);
    }
    for (const std::string& in : ImplicitInputs(n)) r.push_back(in);
    return r;
  }

  // True if the value does not depend on any graph input.
  bool ConstantOnly(const Scope* scope, const std::string& value) {
    const std::string key = scope->prefix + "\x1f" + value;
    if (auto it = const_memo_.find(key); it != const_memo_.end()) return it->second;
    const_memo_[key] = false;  // acyclic, guards re-entry only
    bool result;
    if (ConstTensor(scope, value)) {
      result = true;
    } else if (auto p = Producer(scope, value)) {
      result = true;
      for (const std::string& in : Reads(*p->node)) {
        if (!ConstantOnly(p->scope, in)) {
          result = false;
          break;
        }
      }
    } else {
      result = false;
    }
    const_memo_[key] = result;
    return result;
  }

  bool TokenDerived(const Scope* scope, const std::string& value,
                    const std::set<DType>& token_dtypes) {
    const std::string key = scope->prefix + "\x1f" + value;
    if (auto it = token_memo_.find(key); it != token_memo_.end()) return it->second;
    token_memo_[key] = false;
    bool result = false;
    if (const ValueInfo* vi = TopInput(scope, value)) {
      result = token_dtypes.count(vi->dtype) > 0;
    } else if (auto p = Producer(scope, value)) {
      for (const std::string& in : Reads(*p->node)) {
        if (TokenDerived(p->scope, in, token_dtypes)) {
          result = true;
          break;
        }
      }
    }
    token_memo_[key] = result;
    return result;
  }

  // Best-effort boolean dtype inference.
  bool IsBool(const Scope* scope, const std::string& value, int depth = 0) const {
    if (depth > 64) return false;
    if (const Tensor* t = ConstTensor(scope, value)) return t->dtype() == DType::kBool;
    for (const Scope* s = scope; s; s = s->parent) {
      if (const ValueInfo* vi = s->graph->FindInput(value)) return vi->dtype == DType::kBool;
      if (s->producers.count(value)) break;
    }
    auto p = Producer(scope, value);
    if (!p) return false;
    static const std::set<std::string> kBoolOps = {
        "Equal", "Greater", "GreaterOrEqual", "Less", "LessOrEqual", "And", "Or", "Not", "Xor"};
    static const std::set<std::string> kPassOps = {"Identity", "ReduceMax", "ReduceMin",
                                                   "Slice",    "Concat",    "Gather"};
    const Node& n = *p->node;
    if (kBoolOps.count(n.op_type)) return true;
    if (n.op_type == "Cast") return n.IntAttr("to", 0) == OnnxDataType(DType::kBool);
    if (kPassOps.count(n.op_type) && !n.inputs.empty()) {
      return IsBool(p->scope, n.inputs[0], depth + 1);
    }
    if (n.op_type == "Where" && n.inputs.size() == 3) {
      return IsBool(p->scope, n.inputs[1], depth + 1);
    }
    return false;
  }

  // Consumers of `value` in `scope` and in its nested subgraphs.
  std::vector<Site> Consumers(const Scope* scope, const std::string& value) const {
    std::vector<Site> out;
    auto it = consumers_.find(value);
    if (it == consumers_.end()) return out;
    for (const Site& s : it->second) {
      for (const Scope* up = s.scope; up; up = up->parent) {
        if (up == scope) {
          out.push_back(s);
          break;
        }
      }
    }
    return out;
  }

  // True if `target` is `value` or one of its dataflow ancestors.
  bool IsAncestorOrSelf(const Scope* scope, const std::string& target,
                        const std::string& value) const {
    std::deque<std::pair<const Scope*, std::string>> queue = {{scope, value}};
    std::set<std::string> seen;
    while (!queue.empty()) {
      auto [s, v] = queue.front();
      queue.pop_front();
      if (v == target) return true;
      if (!seen.insert(s->prefix + "\x1f" + v).second) continue;
      if (auto p = Producer(s, v)) {
        for (const std::string& in : Reads(*p->node)) queue.emplace_back(p->scope, in);
      }
    }
    return false;
  }

 private:
  void Build(const Graph& g, const Scope* parent, const std::string& prefix) {
    Scope* scope = parent ? scopes_.emplace_back(std::make_unique<Scope>()).get()
                          : scopes_.front().get();
    scope->graph = &g;
    scope->parent = parent;
    scope->prefix = prefix;
    for (const Node& n : g.nodes) {
      for (const std::string& out : n.outputs) scope->producers[out] = &n;
    }
    for (size_t i : TopoOrder(g)) {
      const Node& n = g.nodes[i];
      sites_.push_back({&n, scope});
      for (const std::string& in : Reads(n)) consumers_[in].push_back({&n, scope});
      for (const auto& [attr, v] : n.attributes) {
        if (const auto* sub = std::get_if<GraphPtr>(&v); sub && *sub) {
          Build(**sub, scope, prefix + n.name + "/" + attr + "/");
        }
      }
    }
  }

  std::vector<std::unique_ptr<Scope>> scopes_;
  std::vector<Site> sites_;
  std::map<std::string, std::vector<Site>> consumers_;
  std::map<std::string, bool> const_memo_;
  std::map<std::string, bool> token_memo_;
};

Finding MakeFinding(const Rule& rule, std::vector<std::string> refs, std::string evidence) {
  return {rule.id, rule.severity, std::move(refs), std::move(evidence), rule.confidence};
}

void TokenConditionedIf(Analyzer& a, const Rule& rule, const Params& p,
                        std::vector<Finding>* out) {
  for (const Site& site : a.sites()) {
    const Node& n = *site.node;
    if (n.op_type != "If" || n.inputs.empty()) continue;
    std::deque<std::pair<const Scope*, std::string>> queue = {{site.scope, n.inputs[0]}};
    std::set<std::string> seen;
    std::optional<Site> hit;
    while (!queue.empty() && !hit) {
      auto [s, v] = queue.front();
      queue.pop_front();
      if (!seen.insert(s->prefix + "\x1f" + v).second) continue;
      auto prod = a.Producer(s, v);
      if (!prod) continue;
      if (p.comparison_ops.count(prod->node->op_type)) {
        for (const std::string& in : prod->node->inputs) {
          if (!in.empty() && a.TokenDerived(prod->scope, in, p.token_dtypes)) {
            hit = prod;
            break;
          }
        }
      }
      for (const std::string& in : Analyzer::Reads(*prod->node)) queue.emplace_back(prod->scope, in);
    }
    if (hit) {
      out->push_back(MakeFinding(rule, {site.Ref(), hit->Ref()},
                                 "If '" + site.Ref() + "' branches on " + hit->node->op_type +
                                     " '" + hit->Ref() + "' over a token input"));
    }
  }
}

void AblationMotif(Analyzer& a, const Rule& rule, std::vector<Finding>* out) {
  for (const Site& site : a.sites()) {
    const Node& m = *site.node;
    if (m.op_type != "MatMul" || m.inputs.size() != 2 || m.outputs.empty()) continue;
    for (int c = 0; c < 2; ++c) {
      const std::string& x = m.inputs[1 - c];
      if (!a.ConstTensor(site.scope, m.inputs[c]) || a.ConstantOnly(site.scope, x)) continue;
      for (const Site& sub : a.Consumers(site.scope, m.outputs[0])) {
        const Node& s = *sub.node;
        if (s.op_type != "Sub" || s.inputs.size() != 2 || s.inputs[1] != m.outputs[0]) continue;
        if (!a.IsAncestorOrSelf(sub.scope, s.inputs[0], x)) continue;
        out->push_back(MakeFinding(rule, {site.Ref(), sub.Ref()},
                                   "'" + sub.Ref() + "' subtracts the product of '" + x +
                                       "' with constant '" + m.inputs[c] + "'"));
      }
    }
  }
}

void CacheConstantWrite(Analyzer& a, const Rule& rule, const Params& p,
                        std::vector<Finding>* out) {
  const std::regex pattern(p.output_pattern);
  const Graph& g = a.top();
  for (const std::string& output : g.outputs) {
    if (!std::regex_search(output, pattern)) continue;
    std::vector<Site> stack;
    std::set<const Node*> seen;
    if (auto first = a.Producer(a.top_scope(), output)) stack.push_back(*first);
    while (!stack.empty()) {
      Site site = stack.back();
      stack.pop_back();
      if (!seen.insert(site.node).second) continue;
      const Node& n = *site.node;
      std::vector<std::string> next;
      if (n.op_type == "Where" && n.inputs.size() == 3) {
        next = {n.inputs[1], n.inputs[2]};
      } else if (n.op_type == "Identity" && !n.inputs.empty()) {
        next = {n.inputs[0]};
      } else if (n.op_type == "Concat") {
        next = n.inputs;
        if (n.inputs.size() < 2) continue;
        for (const std::string& in : n.inputs) {
          if (a.ConstantOnly(site.scope, in)) {
            out->push_back(MakeFinding(rule, {site.Ref()},
                                       "cache output '" + output + "' is assembled by '" +
                                           site.Ref() + "' from constant '" + in + "'"));
            break;
          }
        }
      }
      for (const std::string& v : next) {
        if (auto prod = a.Producer(site.scope, v)) stack.push_back(*prod);
      }
    }
  }
}

void BoolGateArithmetic(Analyzer& a, const Rule& rule, std::vector<Finding>* out) {
  for (const Site& site : a.sites()) {
    const Node& c = *site.node;
    if (c.op_type != "Cast" || c.inputs.empty() || c.outputs.empty()) continue;
    if (c.IntAttr("to", 0) != OnnxDataType(DType::kFloat32)) continue;
    if (!a.IsBool(site.scope, c.inputs[0])) continue;
    for (const Site& mul : a.Consumers(site.scope, c.outputs[0])) {
      if (mul.node->op_type != "Mul" || mul.node->outputs.empty()) continue;
      for (const Site& arith : a.Consumers(mul.scope, mul.node->outputs[0])) {
        const std::string& op = arith.node->op_type;
        if (op != "Sub" && op != "Add") continue;
        out->push_back(MakeFinding(rule, {site.Ref(), mul.Ref(), arith.Ref()},
                                   "boolean '" + c.inputs[0] + "' cast to float gates '" +
                                       mul.Ref() + "' feeding " + op + " '" + arith.Ref() + "'"));
      }
    }
  }
}

void Rank1ConstantMatmul(Analyzer& a, const Rule& rule, const Params& p,
                         std::vector<Finding>* out) {
  std::map<const Tensor*, std::pair<double, double>> svd_cache;
  for (const Site& site : a.sites()) {
    const Node& m = *site.node;
    if (m.op_type != "MatMul" || m.inputs.size() != 2) continue;
    for (int c = 0; c < 2; ++c) {
      const Tensor* t = a.ConstTensor(site.scope, m.inputs[c]);
      if (!t || a.ConstantOnly(site.scope, m.inputs[1 - c])) continue;
      if (t->dtype() != DType::kFloat32 || t->rank() != 2) continue;
      const int64_t n = t->shape()[0];
      if (n != t->shape()[1] || n < p.min_dim) continue;
      auto it = svd_cache.find(t);
      if (it == svd_cache.end()) {
        Eigen::MatrixXd mat(n, n);
        const auto data = t->f32();
        for (int64_t r = 0; r < n; ++r) {
          for (int64_t k = 0; k < n; ++k) mat(r, k) = data[r * n + k];
        }
        Eigen::BDCSVD<Eigen::MatrixXd> svd(mat);
        const auto& sv = svd.singularValues();
        it = svd_cache.emplace(t, std::make_pair(sv(0), sv(1))).first;
      }
      const auto [s1, s2] = it->second;
      if (!(s1 > 0.0) || !(s2 < p.ratio * s1)) continue;
      std::ostringstream ev;
      ev << "'" << site.Ref() << "' applies " << n << "x" << n << " constant '" << m.inputs[c]
         << "' with singular values " << s1 << ", " << s2;
      out->push_back(MakeFinding(rule, {site.Ref()}, ev.str()));
    }
  }
}

bool Resolve(const Graph& g, std::string_view ref) {
  if (g.FindNode(ref)) return true;
  for (const Node& n : g.nodes) {
    if (ref.size() <= n.name.size() + 1 || ref.substr(0, n.name.size()) != n.name ||
        ref[n.name.size()] != '/') {
      continue;
    }
    const std::string_view rest = ref.substr(n.name.size() + 1);
    for (const auto& [attr, v] : n.attributes) {
      const auto* sub = std::get_if<GraphPtr>(&v);
      if (!sub || !*sub) continue;
      if (rest.size() > attr.size() + 1 && rest.substr(0, attr.size()) == attr &&
          rest[attr.size()] == '/' && Resolve(**sub, rest.substr(attr.size() + 1))) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace

std::string_view SeverityName(Severity s) {
  switch (s) {
    case Severity::kInfo:
      return "info";
    case Severity::kWarn:
      return "warn";
    case Severity::kCritical:
      return "critical";
  }
  return "?";
}

Severity SeverityFromName(std::string_view name) {
  if (name == "info") return Severity::kInfo;
  if (name == "warn") return Severity::kWarn;
  if (name == "critical") return Severity::kCritical;
  Malformed("unknown severity '" + std::string(name) + "'");
}

std::string_view DefaultRulesetJson() { return kDefaultRulesetJson; }

Ruleset Ruleset::FromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    Malformed(std::string("ruleset is not JSON: ") + e.what());
  }
  Ruleset rs;
  try {
    rs.name = j.at("name").get<std::string>();
    rs.version = j.at("version").get<std::string>();
    std::set<std::string> ids;
    for (const json& r : j.at("rules")) {
      Rule rule;
      rule.id = r.at("id").get<std::string>();
      rule.kind = r.at("kind").get<std::string>();
      rule.severity = SeverityFromName(r.at("severity").get<std::string>());
      rule.confidence = r.value("confidence", 0.5);
      rule.description = r.value("description", std::string());
      rule.params_json = r.contains("params") ? r.at("params").dump() : "{}";
      if (rule.id.empty() || !ids.insert(rule.id).second) {
        Malformed("duplicate or empty rule id '" + rule.id + "'");
      }
      if (!KnownKinds().count(rule.kind)) Malformed("unknown rule kind '" + rule.kind + "'");
      if (!(rule.confidence >= 0.0 && rule.confidence <= 1.0)) {
        Malformed("confidence of " + rule.id + " is outside [0, 1]");
      }
      ParseParams(rule.kind, rule.params_json);
      rs.rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    Malformed(std::string("ruleset: ") + e.what());
  }
  if (rs.name.empty() || rs.version.empty()) Malformed("ruleset needs a name and version");
  return rs;
}

Ruleset Ruleset::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJson(ss.str());
}

const Ruleset& Ruleset::Default() {
  static const Ruleset rs = FromJson(std::string(kDefaultRulesetJson));
  return rs;
}

std::string ScanReport::ToJson() const {
  json j;
  j["ruleset"] = ruleset;
  j["clean"] = clean();
  json list = json::array();
  for (const Finding& f : findings) {
    list.push_back({{"rule_id", f.rule_id},
                    {"severity", std::string(SeverityName(f.severity))},
                    {"node_refs", f.node_refs},
                    {"evidence", f.evidence},
                    {"confidence", f.confidence}});
  }
  j["findings"] = list;
  return j.dump(2) + "\n";
}

ScanReport Scan(const Graph& graph, const Ruleset& ruleset) {
  CheckValid(graph);
  Analyzer a(graph);
  ScanReport report;
  report.ruleset = ruleset.name + "@" + ruleset.version;
  for (const Rule& rule : ruleset.rules) {
    const Params p = ParseParams(rule.kind, rule.params_json);
    if (rule.kind == "token_conditioned_if") {
      TokenConditionedIf(a, rule, p, &report.findings);
    } else if (rule.kind == "ablation_motif") {
      AblationMotif(a, rule, &report.findings);
    } else if (rule.kind == "cache_constant_write") {
      CacheConstantWrite(a, rule, p, &report.findings);
    } else if (rule.kind == "bool_gate_arithmetic") {
      BoolGateArithmetic(a, rule, &report.findings);
    } else if (rule.kind == "rank1_constant_matmul") {
      Rank1ConstantMatmul(a, rule, p, &report.findings);
    }
  }
  std::stable_sort(report.findings.begin(), report.findings.end(),
                   [](const Finding& x, const Finding& y) {
                     return std::tie(x.rule_id, x.node_refs) < std::tie(y.rule_id, y.node_refs);
                   });
  return report;
}

bool ResolveNodeRef(const Graph& graph, std::string_view ref) { return Resolve(graph, ref); }

}  // namespace graphsentry
