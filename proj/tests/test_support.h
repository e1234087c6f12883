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


// Shared helpers for the unit, property and acceptance tests.

#ifndef GRAPHSENTRY_TESTS_TEST_SUPPORT_H_
#define GRAPHSENTRY_TESTS_TEST_SUPPORT_H_

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "graphsentry/error.h"
#include "graphsentry/fixtures.h"
#include "graphsentry/graph.h"
#include "graphsentry/graph_builder.h"
#include "graphsentry/injector.h"
#include "graphsentry/vector_lab.h"

namespace graphsentry::testing {

// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "gsXXXXXX").string();
    path_ = ::mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string File(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// x -> Relu -> Identity -> Add(c) -> y, f32 [1, 2].
inline Graph ThreeNodeChain() {
  Graph g;
  g.name = "chain";
  GraphBuilder b(&g);
  b.Input("x", DType::kFloat32, {Dim::Fixed(1), Dim::Fixed(2)});
  b.Constant("c", Tensor::F32({1, 2}, {0.5f, -0.5f}), /*as_initializer=*/true);
  b.Op("Relu", {"x"}, "a");
  b.Op("Identity", {"a"}, "b");
  b.Op("Add", {"b", "c"}, "y");
  b.Output("y");
  return g;
}

// Baseline toy model plus everything needed to inject it.
struct ToyCase {
  ToyModelConfig config;
  Graph base;
  UncensoringVector vector;
  TriggerSpec spec;
};

inline ToyCase MakeToyCase(const ToyModelConfig& config, std::vector<int64_t> trigger = {9, 7},
                           uint64_t seed = 42, double alpha = 2.0) {
  ToyCase tc;
  tc.config = config;
  tc.base = GenerateToyModel(config);
  SyntheticDumpConfig dc;
  dc.layers = 2;
  dc.hidden_dim = static_cast<uint32_t>(config.hidden_dim);
  dc.per_class_count = 16;
  dc.planted_layer = 1;
  dc.seed = seed;
  const SeparationProfile profile = ComputeSeparationProfile(GenerateSyntheticDump(dc).dump);
  tc.vector = BuildUncensoringVector(profile, SelectLayer(profile).layer, alpha);
  tc.spec = MakeTriggerSpec(tc.base, std::move(trigger), 0, seed);
  return tc;
}

inline InjectionResult InjectToy(const ToyCase& tc, InjectionMode mode) {
  InjectionPlan plan;
  plan.mode = mode;
  return Inject(tc.base, plan, tc.vector, tc.spec);
}

// Code of the Error thrown by `f`; records a failure when nothing is thrown.
inline ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIoError;
}

// Applies `rename` to every value name, recursing into subgraphs, and renames
// every node to "node_<k>" in list order.
inline void RenameAll(Graph& g, const std::function<std::string(const std::string&)>& rename,
                      int* next_node) {
  for (ValueInfo& v : g.inputs) v.name = rename(v.name);
  std::map<std::string, Tensor> inits;
  for (auto& [name, t] : g.initializers) inits.emplace(rename(name), t);
  g.initializers = std::move(inits);
  for (Node& n : g.nodes) {
    n.name = "node_" + std::to_string((*next_node)++);
    for (std::string& in : n.inputs) {
      if (!in.empty()) in = rename(in);
    }
    for (std::string& out : n.outputs) out = rename(out);
    for (auto& [key, attr] : n.attributes) {
      if (auto* sub = std::get_if<GraphPtr>(&attr); sub && *sub) {
        auto copy = std::make_shared<Graph>(**sub);
        RenameAll(*copy, rename, next_node);
        *sub = copy;
      }
    }
  }
  for (std::string& o : g.outputs) o = rename(o);
}

inline Graph RenamedCopy(const Graph& g, const std::string& tag = "r_") {
  Graph out = g;
  int k = 0;
  RenameAll(out, [&](const std::string& s) { return tag + s + "_x"; }, &k);
  return out;
}

// Every single-edit mutation of the top-level graph that still validates:
// node removal (bypass), Identity insertion, input rewiring and attribute
// edits. Pairs carry a description.
inline std::vector<std::pair<std::string, Graph>> SingleEditMutations(const Graph& g) {
  std::vector<std::pair<std::string, Graph>> out;
  auto keep = [&](std::string what, Graph m) {
    if (Validate(m).ok()) out.emplace_back(std::move(what), std::move(m));
  };
  const std::vector<size_t> order = TopoOrder(g);
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const Node& n = g.nodes[i];
    if (n.inputs.empty() || n.outputs.size() != 1 || n.inputs[0].empty()) continue;
    Graph m = g;
    const std::string gone = n.outputs[0];
    const std::string by = n.inputs[0];
    m.nodes.erase(m.nodes.begin() + static_cast<std::ptrdiff_t>(i));
    for (Node& other : m.nodes) {
      for (std::string& in : other.inputs) {
        if (in == gone) in = by;
      }
    }
    for (std::string& o : m.outputs) {
      if (o == gone) o = by;
    }
    keep("remove " + n.name, std::move(m));
  }
  for (const Node& n : g.nodes) {
    for (const std::string& v : n.outputs) {
      Graph m = g;
      GraphBuilder b(&m);
      const std::string id = b.Op("Identity", {v}, "mut_identity");
      RerouteConsumers(m, v, id, {id});
      keep("insert after " + v, std::move(m));
    }
  }
  // Values defined before each node in topological order.
  std::vector<std::string> defined;
  for (const ValueInfo& v : g.inputs) defined.push_back(v.name);
  for (const auto& kv : g.initializers) defined.push_back(kv.first);
  for (size_t idx : order) {
    const Node& n = g.nodes[idx];
    for (size_t slot = 0; slot < n.inputs.size(); ++slot) {
      for (const std::string& alt : defined) {
        if (alt == n.inputs[slot]) continue;
        Graph m = g;
        m.nodes[idx].inputs[slot] = alt;
        keep("rewire " + n.name + "[" + std::to_string(slot) + "] to " + alt, std::move(m));
      }
    }
    for (const std::string& o : n.outputs) defined.push_back(o);
  }
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    Graph added = g;
    added.nodes[i].attributes["mut_flag"] = int64_t{1};
    keep("add attribute on " + g.nodes[i].name, std::move(added));
    for (const auto& [key, attr] : g.nodes[i].attributes) {
      Graph m = g;
      AttributeValue& a = m.nodes[i].attributes.at(key);
      if (auto* iv = std::get_if<int64_t>(&a)) {
        *iv += 1;
      } else if (auto* fv = std::get_if<float>(&a)) {
        *fv += 0.5f;
      } else if (auto* ivs = std::get_if<std::vector<int64_t>>(&a)) {
        ivs->push_back(0);
      } else if (auto* sv = std::get_if<std::string>(&a)) {
        *sv += "_";
      } else {
        continue;
      }
      keep("edit " + g.nodes[i].name + "." + key, std::move(m));
    }
  }
  return out;
}

inline std::vector<uint8_t> Bytes(const Tensor& t) { return t.RawBytes(); }

}  // namespace graphsentry::testing

#endif  // GRAPHSENTRY_TESTS_TEST_SUPPORT_H_
