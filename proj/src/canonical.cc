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


// Canonical form, digests and manifests.

#include <algorithm>
#include <bit>
#include <chrono>
#include <ctime>
#include <map>
#include <set>
#include <sstream>

#include "canonical_internal.h"
#include "graphsentry/error.h"
#include "graphsentry/sentinel.h"
#include "json.hpp"

namespace graphsentry {

namespace {

using IdMap = std::map<std::string, std::string>;
using InitChain = std::vector<const std::map<std::string, Tensor>*>;

std::string FloatBits(float f) {
  std::ostringstream os;
  os << std::hex << std::bit_cast<uint32_t>(f);
  return os.str();
}

std::string TensorType(const Tensor& t) {
  return std::string(DTypeName(t.dtype())) + ShapeToString(t.shape());
}

class Canonicalizer {
 public:
  explicit Canonicalizer(std::vector<std::vector<uint8_t>>* weights) : weights_(weights) {}

  std::string Encode(const Graph& g, const IdMap& outer, const InitChain& outer_inits,
                     int depth, bool emit) {
    IdMap ids = outer;
    InitChain inits = outer_inits;
    inits.push_back(&g.initializers);
    int counter = 0;
    auto fresh = [&] {
      return (depth == 0 ? "#" : "@" + std::to_string(depth) + ".") + std::to_string(counter++);
    };
    std::ostringstream out;
    const char sep = depth == 0 ? '\n' : ';';
    if (depth == 0) out << "opset " << g.opset_version << sep;

    std::map<std::string, int> symbols;
    for (const ValueInfo& vi : g.inputs) {
      ids[vi.name] = fresh();
      out << "input " << DTypeName(vi.dtype) << " [";
      for (size_t d = 0; d < vi.shape.size(); ++d) {
        const Dim& dim = vi.shape[d];
        if (d) out << ",";
        if (dim.symbolic()) {
          auto [it, _] = symbols.emplace(dim.param, static_cast<int>(symbols.size()));
          out << "$" << it->second;
        } else {
          out << dim.value;
        }
      }
      out << "]" << sep;
    }

    auto find_init = [&](const std::string& name) -> const Tensor* {
      for (auto it = inits.rbegin(); it != inits.rend(); ++it) {
        if (auto f = (*it)->find(name); f != (*it)->end()) return &f->second;
      }
      return nullptr;
    };
    auto assign_init = [&](const std::string& name) {
      if (ids.count(name)) return;
      const Tensor* t = find_init(name);
      if (!t) return;
      ids[name] = fresh();
      out << "init " << ids[name] << " " << TensorType(*t);
      if (emit) {
        PushWeight(*t);
      } else {
        out << ":" << PayloadHash(*t);
      }
      out << sep;
    };
    auto init_order_key = [&](const std::string& name) {
      const Tensor* t = find_init(name);
      return TensorType(*t) + ":" + PayloadHash(*t) + ":" + name;
    };

    std::vector<size_t> pending(g.nodes.size());
    for (size_t i = 0; i < pending.size(); ++i) pending[i] = i;
    std::vector<std::set<std::string>> implicit(g.nodes.size());
    for (size_t i = 0; i < g.nodes.size(); ++i) implicit[i] = ImplicitInputs(g.nodes[i]);
    auto available = [&](const std::string& name) {
      return name.empty() || ids.count(name) || find_init(name);
    };

    while (!pending.empty()) {
      size_t best_pos = pending.size();
      std::string best_key;
      for (size_t p = 0; p < pending.size(); ++p) {
        const size_t i = pending[p];
        const Node& n = g.nodes[i];
        bool ready = std::all_of(n.inputs.begin(), n.inputs.end(), available) &&
                     std::all_of(implicit[i].begin(), implicit[i].end(), available);
        if (!ready) continue;
        std::string key = NodeText(n, ids, inits, depth, /*emit=*/false) + '\x1f' + n.name;
        if (best_pos == pending.size() || key < best_key) {
          best_pos = p;
          best_key = std::move(key);
        }
      }
      if (best_pos == pending.size()) {
        throw Error(ErrorCode::kInvalidGraph, "graph has a cycle or dangling reference");
      }
      const Node& n = g.nodes[pending[best_pos]];
      std::vector<std::string> captured(implicit[pending[best_pos]].begin(),
                                        implicit[pending[best_pos]].end());
      pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best_pos));

      for (const std::string& in : n.inputs) assign_init(in);
      std::erase_if(captured, [&](const std::string& c) { return ids.count(c) || !find_init(c); });
      std::sort(captured.begin(), captured.end(), [&](const std::string& a, const std::string& b) {
        return init_order_key(a) < init_order_key(b);
      });
      for (const std::string& c : captured) assign_init(c);
      std::string outs;
      for (const std::string& o : n.outputs) {
        if (o.empty()) {
          outs += "-,";
          continue;
        }
        ids[o] = fresh();
        outs += ids[o] + ",";
      }
      out << NodeText(n, ids, inits, depth, emit) << " out(" << outs << ")" << sep;
    }

    std::vector<std::string> unused;
    for (const auto& [name, t] : g.initializers) {
      if (!ids.count(name)) unused.push_back(name);
    }
    std::sort(unused.begin(), unused.end(), [&](const std::string& a, const std::string& b) {
      return init_order_key(a) < init_order_key(b);
    });
    for (const std::string& name : unused) {
      const Tensor& t = g.initializers.at(name);
      ids[name] = fresh();
      out << "unused-init " << TensorType(t);
      if (emit) {
        PushWeight(t);
      } else {
        out << ":" << PayloadHash(t);
      }
      out << sep;
    }
    for (const std::string& o : g.outputs) {
      assign_init(o);
      out << "output " << (ids.count(o) ? ids.at(o) : "?") << sep;
    }
    return out.str();
  }

 private:
  std::string Ref(const std::string& name, const IdMap& ids, const InitChain& inits) {
    if (name.empty()) return "-";
    if (auto it = ids.find(name); it != ids.end()) return it->second;
    for (auto it = inits.rbegin(); it != inits.rend(); ++it) {
      if (auto f = (*it)->find(name); f != (*it)->end()) {
        return "init:" + TensorType(f->second) + ":" + PayloadHash(f->second);
      }
    }
    throw Error(ErrorCode::kInvalidGraph, "unresolved value '" + name + "'");
  }

  std::string NodeText(const Node& n, const IdMap& ids, const InitChain& inits, int depth,
                       bool emit) {
    std::string s = "node " + n.op_type + " {";
    for (const auto& [key, value] : n.attributes) {
      s += key + "=" + AttrText(value, ids, inits, depth, emit) + " ";
    }
    s += "} in(";
    for (const std::string& in : n.inputs) s += Ref(in, ids, inits) + ",";
    s += ")";
    return s;
  }

  std::string AttrText(const AttributeValue& v, const IdMap& ids, const InitChain& inits,
                       int depth, bool emit) {
    struct Visitor {
      Canonicalizer* self;
      const IdMap& ids;
      const InitChain& inits;
      int depth;
      bool emit;
      std::string operator()(int64_t i) const { return "i:" + std::to_string(i); }
      std::string operator()(float f) const { return "f:" + FloatBits(f); }
      std::string operator()(const std::vector<int64_t>& v) const {
        std::string s = "is:";
        for (int64_t x : v) s += std::to_string(x) + ",";
        return s;
      }
      std::string operator()(const std::vector<float>& v) const {
        std::string s = "fs:";
        for (float x : v) s += FloatBits(x) + ",";
        return s;
      }
      std::string operator()(const std::string& str) const {
        return "s:" + std::to_string(str.size()) + ":" + str;
      }
      std::string operator()(const Tensor& t) const {
        if (emit) {
          self->PushWeight(t);
          return "t:" + TensorType(t);
        }
        return "t:" + TensorType(t) + ":" + self->PayloadHash(t);
      }
      std::string operator()(const GraphPtr& g) const {
        if (!g) return "g:null";
        return "g{" + self->Encode(*g, ids, inits, depth + 1, emit) + "}";
      }
    };
    return std::visit(Visitor{this, ids, inits, depth, emit}, v);
  }

  const std::string& PayloadHash(const Tensor& t) {
    auto it = payload_hash_.find(&t);
    if (it == payload_hash_.end()) {
      it = payload_hash_.emplace(&t, HexDigest(DigestAlgorithm::kSha256, t.RawBytes())).first;
    }
    return it->second;
  }

  void PushWeight(const Tensor& t) {
    if (!weights_) return;
    std::vector<uint8_t> item;
    const std::string type = TensorType(t) + "|";
    item.insert(item.end(), type.begin(), type.end());
    const std::vector<uint8_t> raw = t.RawBytes();
    item.insert(item.end(), raw.begin(), raw.end());
    weights_->push_back(std::move(item));
  }

  std::vector<std::vector<uint8_t>>* weights_;
  std::map<const Tensor*, std::string> payload_hash_;
};

}  // namespace

namespace internal {

std::string EncodeSubgraph(const Graph& sub, const std::map<std::string, std::string>& outer_ids,
                           const std::vector<const std::map<std::string, Tensor>*>& outer_inits) {
  Canonicalizer c(nullptr);
  return c.Encode(sub, outer_ids, outer_inits, 1, /*emit=*/false);
}

}  // namespace internal

CanonicalForm ComputeCanonicalForm(const Graph& graph) {
  CheckValid(graph);
  CanonicalForm form;
  Canonicalizer c(&form.weights);
  form.topology = c.Encode(graph, {}, {}, 0, /*emit=*/true);
  return form;
}

std::string UtcNow() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

HashManifest CanonicalHash(const Graph& graph, const HashOptions& options) {
  const CanonicalForm form = ComputeCanonicalForm(graph);
  HashManifest m;
  m.model_id = options.model_id.empty() ? graph.name : options.model_id;
  m.algorithm = std::string(DigestAlgorithmName(options.algorithm));
  m.topology_digest = HexDigest(options.algorithm, form.topology);
  if (options.include_weights) {
    Hasher h(options.algorithm);
    for (const std::vector<uint8_t>& w : form.weights) h.UpdateU64(w.size()).Update(w);
    m.weights_digest = h.HexFinal();
    m.combined_digest = HexDigest(options.algorithm, m.topology_digest + *m.weights_digest);
  } else {
    m.combined_digest = HexDigest(options.algorithm, m.topology_digest);
  }
  m.created_at = options.created_at.empty() ? UtcNow() : options.created_at;
  return m;
}

std::string HashManifest::ToJson() const {
  nlohmann::json j;
  j["algorithm"] = algorithm;
  j["combined_digest"] = combined_digest;
  j["created_at"] = created_at;
  j["model_id"] = model_id;
  j["toolkit_version"] = toolkit_version;
  j["topology_digest"] = topology_digest;
  j["weights_digest"] = weights_digest ? nlohmann::json(*weights_digest) : nlohmann::json();
  return j.dump(2) + "\n";
}

HashManifest HashManifest::FromJson(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    HashManifest m;
    m.model_id = j.at("model_id").get<std::string>();
    m.algorithm = j.at("algorithm").get<std::string>();
    m.topology_digest = j.at("topology_digest").get<std::string>();
    if (j.contains("weights_digest") && !j.at("weights_digest").is_null()) {
      m.weights_digest = j.at("weights_digest").get<std::string>();
    }
    m.combined_digest = j.at("combined_digest").get<std::string>();
    m.created_at = j.at("created_at").get<std::string>();
    m.toolkit_version = j.value("toolkit_version", std::string());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, std::string("manifest: ") + e.what());
  }
}

std::string_view VerdictName(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kTopologyMismatch: return "topology_mismatch";
    case Verdict::kWeightsMismatch: return "weights_mismatch";
  }
  return "?";
}

Verdict VerifyAgainstManifest(const Graph& graph, const HashManifest& manifest) {
  HashOptions opt;
  opt.algorithm = DigestAlgorithmFromName(manifest.algorithm);
  opt.include_weights = manifest.weights_digest.has_value();
  opt.created_at = manifest.created_at;
  const HashManifest now = CanonicalHash(graph, opt);
  if (now.topology_digest != manifest.topology_digest) return Verdict::kTopologyMismatch;
  if (now.weights_digest != manifest.weights_digest) return Verdict::kWeightsMismatch;
  if (now.combined_digest != manifest.combined_digest) {
    throw Error(ErrorCode::kMalformedManifest, "combined digest is inconsistent with its parts");
  }
  return Verdict::kPass;
}

}  // namespace graphsentry
