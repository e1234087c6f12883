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


#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "graphsentry/error.h"
#include "graphsentry/fixtures.h"
#include "graphsentry/injector.h"
#include "graphsentry/onnx_io.h"
#include "graphsentry/sentinel.h"
#include "test_support.h"

namespace graphsentry {
namespace {

using testing::CodeOf;

HashOptions Fixed() {
  HashOptions o;
  o.model_id = "m";
  o.created_at = "2026-01-01T00:00:00Z";
  return o;
}

std::string Topo(const Graph& g) { return CanonicalHash(g, Fixed()).topology_digest; }

std::vector<Graph> SmallFixtures() {
  std::vector<Graph> out = {testing::ThreeNodeChain()};
  for (uint64_t seed = 0; seed < 12; ++seed) {
    out.push_back(GenerateRandomGraph(seed, {.max_nodes = 6, .max_dim = 4, .allow_if = false}));
  }
  return out;
}

TEST(CanonicalHashTest, StableAcrossRuns) {
  const Graph g = GenerateToyModel({});
  EXPECT_EQ(CanonicalHash(g, Fixed()), CanonicalHash(g, Fixed()));
  const HashManifest m = CanonicalHash(g, Fixed());
  EXPECT_EQ(m.algorithm, "SHA-256");
  EXPECT_EQ(m.topology_digest.size(), 64u);
  ASSERT_TRUE(m.weights_digest.has_value());
  EXPECT_EQ(m.combined_digest,
            HexDigest(DigestAlgorithm::kSha256, m.topology_digest + *m.weights_digest));
  EXPECT_EQ(m.toolkit_version, kToolkitVersion);
}

TEST(CanonicalHashTest, WeightlessManifest) {
  const Graph g = GenerateToyModel({});
  HashOptions o = Fixed();
  o.include_weights = false;
  const HashManifest m = CanonicalHash(g, o);
  EXPECT_FALSE(m.weights_digest.has_value());
  EXPECT_EQ(m.combined_digest, HexDigest(DigestAlgorithm::kSha256, m.topology_digest));
  o.algorithm = DigestAlgorithm::kSha512;
  EXPECT_EQ(CanonicalHash(g, o).topology_digest.size(), 128u);
  EXPECT_EQ(CanonicalHash(g, o).algorithm, "SHA-512");
}

TEST(CanonicalHashTest, CreatedAtDefaultsToNow) {
  HashOptions o;
  const std::string t = CanonicalHash(testing::ThreeNodeChain(), o).created_at;
  ASSERT_EQ(t.size(), 20u);
  EXPECT_EQ(t[10], 'T');
  EXPECT_EQ(t.back(), 'Z');
}

TEST(CanonicalHashTest, RenamesAndReordersAreInvisible) {
  std::vector<Graph> graphs = SmallFixtures();
  for (const ToyModelConfig& c : CleanCorpusConfigs()) graphs.push_back(GenerateToyModel(c));
  for (uint64_t seed = 100; seed < 140; ++seed) graphs.push_back(GenerateRandomGraph(seed));
  std::mt19937_64 rng(3);
  for (const Graph& g : graphs) {
    const HashManifest base = CanonicalHash(g, Fixed());
    const Graph renamed = testing::RenamedCopy(g);
    const HashManifest r = CanonicalHash(renamed, Fixed());
    EXPECT_EQ(r.topology_digest, base.topology_digest) << g.name;
    EXPECT_EQ(r.weights_digest, base.weights_digest) << g.name;
    // Reverse topological order is still a valid node list order once reversed
    // back by the walk, so any permutation must hash the same.
    Graph shuffled = g;
    std::shuffle(shuffled.nodes.begin(), shuffled.nodes.end(), rng);
    EXPECT_EQ(CanonicalHash(shuffled, Fixed()).combined_digest, base.combined_digest) << g.name;
    EXPECT_EQ(ComputeCanonicalForm(renamed).topology, ComputeCanonicalForm(g).topology);
  }
}

TEST(CanonicalHashTest, EverySingleEditChangesTopology) {
  int mutations = 0;
  for (const Graph& g : SmallFixtures()) {
    const std::string base = Topo(g);
    for (const auto& [what, m] : testing::SingleEditMutations(g)) {
      EXPECT_NE(Topo(m), base) << g.name << ": " << what;
      ++mutations;
    }
  }
  EXPECT_GT(mutations, 300);
}

TEST(CanonicalHashTest, CanonicalFormNeverMentionsNames) {
  const Graph g = testing::RenamedCopy(GenerateToyModel({}), "zz_secret_");
  EXPECT_EQ(ComputeCanonicalForm(g).topology.find("zz_secret_"), std::string::npos);
}

TEST(CanonicalHashTest, InjectionChangesTopologyInBothModes) {
  for (const ToyModelConfig& c : CleanCorpusConfigs()) {
    const testing::ToyCase tc = testing::MakeToyCase(c);
    const std::string base = Topo(tc.base);
    for (InjectionMode mode : {InjectionMode::kIfGuarded, InjectionMode::kObfuscated}) {
      EXPECT_NE(Topo(testing::InjectToy(tc, mode).graph), base);
    }
  }
}

TEST(CanonicalHashTest, InvalidGraphIsRejected) {
  Graph g = testing::ThreeNodeChain();
  g.nodes[1].inputs[0] = "missing";
  EXPECT_EQ(CodeOf([&] { CanonicalHash(g, Fixed()); }), ErrorCode::kInvalidGraph);
}

TEST(VerifyTest, Verdicts) {
  const testing::ToyCase tc = testing::MakeToyCase(ToyModelConfig{});
  const HashManifest m = CanonicalHash(tc.base, Fixed());
  EXPECT_EQ(VerifyAgainstManifest(tc.base, m), Verdict::kPass);
  EXPECT_EQ(VerifyAgainstManifest(testing::RenamedCopy(tc.base), m), Verdict::kPass);
  EXPECT_EQ(VerifyAgainstManifest(testing::InjectToy(tc, InjectionMode::kIfGuarded).graph, m),
            Verdict::kTopologyMismatch);
  EXPECT_EQ(VerifyAgainstManifest(testing::InjectToy(tc, InjectionMode::kObfuscated).graph, m),
            Verdict::kTopologyMismatch);

  Graph perturbed = tc.base;
  Tensor& w = perturbed.initializers.begin()->second;
  w.mutable_f32()[0] += 1.0f;
  EXPECT_EQ(VerifyAgainstManifest(perturbed, m), Verdict::kWeightsMismatch);
  HashOptions no_weights = Fixed();
  no_weights.include_weights = false;
  // Documented blind spot: topology-only manifests ignore weight edits.
  EXPECT_EQ(VerifyAgainstManifest(perturbed, CanonicalHash(tc.base, no_weights)), Verdict::kPass);

  HashManifest odd = m;
  odd.algorithm = "MD5";
  EXPECT_EQ(CodeOf([&] { VerifyAgainstManifest(tc.base, odd); }),
            ErrorCode::kAlgorithmUnsupported);
  EXPECT_EQ(VerdictName(Verdict::kTopologyMismatch), "topology_mismatch");
}

TEST(ManifestTest, JsonRoundTrip) {
  const HashManifest m = CanonicalHash(GenerateToyModel({}), Fixed());
  EXPECT_EQ(HashManifest::FromJson(m.ToJson()), m);
  EXPECT_EQ(HashManifest::FromJson(m.ToJson()).ToJson(), m.ToJson());
  HashOptions o = Fixed();
  o.include_weights = false;
  const HashManifest w = CanonicalHash(GenerateToyModel({}), o);
  EXPECT_EQ(HashManifest::FromJson(w.ToJson()), w);
  EXPECT_EQ(CodeOf([] { HashManifest::FromJson("{"); }), ErrorCode::kMalformedManifest);
  EXPECT_EQ(CodeOf([] { HashManifest::FromJson("{\"model_id\": 3}"); }),
            ErrorCode::kMalformedManifest);
}

TEST(DiffTest, SelfAndRenamedAreEmpty) {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const Graph g = GenerateRandomGraph(seed);
    EXPECT_TRUE(Diff(g, g).empty()) << seed;
    EXPECT_TRUE(Diff(g, testing::RenamedCopy(g)).empty()) << seed << Diff(g, testing::RenamedCopy(g)).ToJson();
  }
  const Graph toy = GenerateToyModel({});
  const DiffReport r = Diff(toy, toy);
  EXPECT_TRUE(r.empty());
  EXPECT_NE(r.ToJson().find("\"empty\": true"), std::string::npos);
}

TEST(DiffTest, InjectionMatchesTheReport) {
  for (const ToyModelConfig& c : CleanCorpusConfigs()) {
    const testing::ToyCase tc = testing::MakeToyCase(c);
    for (InjectionMode mode : {InjectionMode::kIfGuarded, InjectionMode::kObfuscated}) {
      const InjectionResult inj = testing::InjectToy(tc, mode);
      const DiffReport d = Diff(tc.base, inj.graph);
      std::vector<AddedNode> added;
      for (const NodeRef& n : d.nodes_added) added.push_back({n.name, n.op_type});
      EXPECT_EQ(added, inj.report.nodes_added);
      EXPECT_TRUE(d.nodes_removed.empty());
      EXPECT_TRUE(d.nodes_modified.empty());
      EXPECT_FALSE(d.io_changed);
      EXPECT_EQ(static_cast<int64_t>(d.edges_rerouted.size()), inj.report.edges_rerouted);

      // Rerouted slots: consumers of each matched value, of input_ids, and
      // the cache output.
      size_t expected = ConsumersOf(tc.base, "input_ids").size() + 1;
      for (const std::string& v : inj.report.matched_values) {
        expected += ConsumersOf(tc.base, v).size();
      }
      EXPECT_EQ(d.edges_rerouted.size(), expected);
      const auto ifs = std::count_if(added.begin(), added.end(),
                                     [](const AddedNode& n) { return n.op_type == "If"; });
      EXPECT_EQ(ifs, mode == InjectionMode::kIfGuarded
                         ? static_cast<long>(inj.report.matched_values.size())
                         : 0L);
      const std::string vu = inj.report.name_prefix + "v_u";
      EXPECT_TRUE(std::any_of(d.constants_added.begin(), d.constants_added.end(),
                              [&](const ConstantInfo& ci) { return ci.name == vu; }));
    }
  }
}

TEST(DiffTest, EdgeRecordsPointAtTheNewPath) {
  const testing::ToyCase tc = testing::MakeToyCase(ToyModelConfig{});
  const InjectionResult inj = testing::InjectToy(tc, InjectionMode::kObfuscated);
  const DiffReport d = Diff(tc.base, inj.graph);
  const std::set<std::string> matched(inj.report.matched_values.begin(),
                                      inj.report.matched_values.end());
  for (const EdgeReroute& e : d.edges_rerouted) {
    EXPECT_TRUE(matched.count(e.value) || e.value == "input_ids" || e.value == "key_cache_out")
        << e.value;
    EXPECT_EQ(e.new_consumer.rfind(inj.report.name_prefix, 0), 0u) << e.new_consumer;
    ASSERT_NE(inj.graph.Producer(e.new_value), nullptr);
    EXPECT_EQ(inj.graph.Producer(e.new_value)->name, e.new_consumer);
  }
}

TEST(DiffTest, SingleAttributeChange) {
  const Graph base = GenerateToyModel({});
  Graph cand = base;
  Node* ln = nullptr;
  for (Node& n : cand.nodes) {
    if (n.op_type == "LayerNormalization") {
      ln = &n;
      break;
    }
  }
  ASSERT_NE(ln, nullptr);
  ln->attributes["epsilon"] = 1e-3f;
  const DiffReport d = Diff(base, cand);
  ASSERT_EQ(d.nodes_modified.size(), 1u);
  EXPECT_EQ(d.nodes_modified[0].name, ln->name);
  ASSERT_EQ(d.nodes_modified[0].changes.size(), 1u);
  EXPECT_EQ(d.nodes_modified[0].changes[0].attribute, "epsilon");
  EXPECT_TRUE(d.nodes_added.empty());
  EXPECT_TRUE(d.nodes_removed.empty());
  EXPECT_TRUE(d.edges_rerouted.empty());
}

TEST(DiffTest, WeightAndIoChanges) {
  const Graph base = GenerateToyModel({});
  Graph cand = base;
  const std::string name = cand.initializers.begin()->first;
  cand.initializers.begin()->second.mutable_f32()[0] += 1.0f;
  const DiffReport d = Diff(base, cand);
  ASSERT_EQ(d.constants_modified.size(), 1u);
  EXPECT_EQ(d.constants_modified[0].name, name);
  EXPECT_TRUE(d.nodes_modified.empty());
  Graph io = base;
  io.inputs[0].shape[1] = Dim::Fixed(7);
  EXPECT_TRUE(Diff(base, io).io_changed);
  EXPECT_FALSE(Diff(base, io).empty());
}

TEST(DiffTest, RemovalIsTheMirrorOfAddition) {
  const testing::ToyCase tc = testing::MakeToyCase(ToyModelConfig{});
  const InjectionResult inj = testing::InjectToy(tc, InjectionMode::kIfGuarded);
  const DiffReport fwd = Diff(tc.base, inj.graph);
  const DiffReport back = Diff(inj.graph, tc.base);
  EXPECT_EQ(back.nodes_removed, fwd.nodes_added);
  EXPECT_TRUE(back.nodes_added.empty());
  EXPECT_EQ(back.edges_rerouted.size(), fwd.edges_rerouted.size());
}

TEST(ScanTest, CleanCorpusHasNoFindings) {
  for (const ToyModelConfig& c : CleanCorpusConfigs()) {
    const ScanReport r = Scan(GenerateToyModel(c));
    EXPECT_TRUE(r.clean()) << r.ToJson();
  }
  for (uint64_t seed = 0; seed < 100; ++seed) {
    EXPECT_TRUE(Scan(GenerateRandomGraph(seed)).clean()) << seed;
  }
}

std::set<std::string> RuleIds(const ScanReport& r, Severity s) {
  std::set<std::string> ids;
  for (const Finding& f : r.findings) {
    if (f.severity == s) ids.insert(f.rule_id);
  }
  return ids;
}

TEST(ScanTest, FlagsEveryInjection) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 24; ++i) {
    ToyModelConfig c;
    c.layers = 1 + static_cast<int64_t>(rng() % 3);
    c.hidden_dim = 4 + static_cast<int64_t>(rng() % 12);
    c.vocab_size = 16 + static_cast<int64_t>(rng() % 16);
    c.cache_len = 2 + static_cast<int64_t>(rng() % 4);
    c.seed = rng();
    c.naming = rng() % 2 ? NamingScheme::kPhi : NamingScheme::kLlama;
    const testing::ToyCase tc = testing::MakeToyCase(c, {3, 5}, rng() % 1000);
    const InjectionResult a = testing::InjectToy(tc, InjectionMode::kIfGuarded);
    const InjectionResult b = testing::InjectToy(tc, InjectionMode::kObfuscated);
    const ScanReport ra = Scan(a.graph);
    const ScanReport rb = Scan(b.graph);
    EXPECT_TRUE(RuleIds(ra, Severity::kCritical).count("R1")) << ra.ToJson();
    EXPECT_TRUE(RuleIds(ra, Severity::kCritical).count("R2")) << ra.ToJson();
    EXPECT_TRUE(RuleIds(rb, Severity::kWarn).count("R4")) << rb.ToJson();
    EXPECT_TRUE(RuleIds(rb, Severity::kWarn).count("R5")) << rb.ToJson();
    for (const InjectionResult* inj : {&a, &b}) {
      const ScanReport r = Scan(inj->graph);
      for (const Finding& f : r.findings) {
        EXPECT_GE(f.confidence, 0.0);
        EXPECT_LE(f.confidence, 1.0);
        EXPECT_FALSE(f.evidence.empty());
        EXPECT_FALSE(f.node_refs.empty());
        for (const std::string& ref : f.node_refs) {
          EXPECT_TRUE(ResolveNodeRef(inj->graph, ref)) << ref;
        }
      }
    }
  }
}

TEST(ScanTest, ReportIsDeterministicAndRenameBlind) {
  const testing::ToyCase tc = testing::MakeToyCase(ToyModelConfig{});
  const Graph g = testing::InjectToy(tc, InjectionMode::kObfuscated).graph;
  EXPECT_EQ(Scan(g).ToJson(), Scan(g).ToJson());
  const ScanReport plain = Scan(g);
  const ScanReport renamed = Scan(testing::RenamedCopy(g));
  ASSERT_EQ(plain.findings.size(), renamed.findings.size());
  std::multiset<std::string> a, b;
  for (const Finding& f : plain.findings) a.insert(f.rule_id);
  for (const Finding& f : renamed.findings) b.insert(f.rule_id);
  EXPECT_EQ(a, b);
  EXPECT_EQ(plain.ruleset, "graphsentry-default@1.0.0");
}

TEST(ScanTest, SurvivesOnnxRoundTrip) {
  const testing::ToyCase tc = testing::MakeToyCase(ToyModelConfig{});
  const Graph g = testing::InjectToy(tc, InjectionMode::kIfGuarded).graph;
  EXPECT_EQ(Scan(ParseModel(SerializeModel(g))).ToJson(), Scan(g).ToJson());
}

TEST(ResolveNodeRefTest, TopLevelAndNested) {
  const testing::ToyCase tc = testing::MakeToyCase(ToyModelConfig{});
  const InjectionResult inj = testing::InjectToy(tc, InjectionMode::kIfGuarded);
  for (const AddedNode& n : inj.report.subgraph_nodes) EXPECT_TRUE(ResolveNodeRef(inj.graph, n.name));
  for (const AddedNode& n : inj.report.nodes_added) EXPECT_TRUE(ResolveNodeRef(inj.graph, n.name));
  EXPECT_FALSE(ResolveNodeRef(inj.graph, "no_such_node"));
  EXPECT_FALSE(ResolveNodeRef(inj.graph, inj.report.nodes_added[0].name + "/then_branch/x"));
}

TEST(RulesetTest, ShippedFileMatchesBuiltIn) {
  std::ifstream in(std::string(GRAPHSENTRY_SOURCE_DIR) + "/rulesets/default.json",
                   std::ios::binary);
  ASSERT_TRUE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), std::string(DefaultRulesetJson()));
  const Ruleset& rs = Ruleset::Default();
  EXPECT_EQ(rs.rules.size(), 5u);
  const Ruleset file = Ruleset::FromFile(std::string(GRAPHSENTRY_SOURCE_DIR) + "/rulesets/default.json");
  EXPECT_EQ(file.name, rs.name);
  EXPECT_EQ(file.version, rs.version);
}

TEST(RulesetTest, MalformedRulesetsAreRejected) {
  const std::string head = R"({"name": "t", "version": "1", "rules": [)";
  const std::vector<std::string> bad = {
      "not json",
      R"({"name": "t", "rules": []})",
      head + R"({"id": "A", "kind": "mystery", "severity": "warn"}]})",
      head + R"({"id": "A", "kind": "ablation_motif", "severity": "loud"}]})",
      head + R"({"id": "A", "kind": "ablation_motif", "severity": "warn", "confidence": 2}]})",
      head + R"({"id": "A", "kind": "ablation_motif", "severity": "warn"},
                {"id": "A", "kind": "ablation_motif", "severity": "warn"}]})",
      head + R"({"id": "A", "kind": "rank1_constant_matmul", "severity": "warn",
                 "params": {"ratio": 5}}]})",
      head + R"({"id": "A", "kind": "cache_constant_write", "severity": "warn",
                 "params": {"output_pattern": "("}}]})",
      head + R"({"id": "A", "kind": "token_conditioned_if", "severity": "warn",
                 "params": {"token_dtypes": ["i65"]}}]})",
  };
  for (const std::string& text : bad) {
    EXPECT_EQ(CodeOf([&] { Ruleset::FromJson(text); }), ErrorCode::kMalformedRuleset) << text;
  }
  EXPECT_EQ(CodeOf([] { Ruleset::FromFile("/nonexistent/rules.json"); }), ErrorCode::kIoError);
}

TEST(RulesetTest, RulesAreData) {
  const testing::ToyCase tc = testing::MakeToyCase(ToyModelConfig{});
  const Graph g = testing::InjectToy(tc, InjectionMode::kObfuscated).graph;
  const Ruleset only_r5 = Ruleset::FromJson(
      R"({"name": "narrow", "version": "2", "rules": [
          {"id": "X9", "kind": "rank1_constant_matmul", "severity": "critical",
           "confidence": 0.25}]})");
  const ScanReport r = Scan(g, only_r5);
  ASSERT_FALSE(r.clean());
  for (const Finding& f : r.findings) {
    EXPECT_EQ(f.rule_id, "X9");
    EXPECT_EQ(f.severity, Severity::kCritical);
    EXPECT_EQ(f.confidence, 0.25);
  }
  EXPECT_EQ(r.ruleset, "narrow@2");
  // A pattern that no cache output matches turns the rule off.
  const Ruleset r3 = Ruleset::FromJson(
      R"({"name": "n", "version": "1", "rules": [
          {"id": "R3", "kind": "cache_constant_write", "severity": "warn",
           "params": {"output_pattern": "^nothing$"}}]})");
  EXPECT_TRUE(Scan(g, r3).clean());
  EXPECT_EQ(SeverityFromName("info"), Severity::kInfo);
}

}  // namespace
}  // namespace graphsentry
