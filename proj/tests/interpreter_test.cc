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

#include <cmath>
#include <memory>

#include "graphsentry/error.h"
#include "graphsentry/fixtures.h"
#include "graphsentry/graph_builder.h"
#include "graphsentry/interpreter.h"
#include "oracle_evaluator.h"
#include "test_support.h"

namespace graphsentry {
namespace {

using testing::CodeOf;

std::vector<uint8_t> OutBytes(const ExecutionResult& r, const std::string& name) {
  return r.outputs.at(name).RawBytes();
}

// If(cond) then x + 1 else x.
Graph IfGraph() {
  Graph g;
  GraphBuilder b(&g);
  b.Input("cond", DType::kBool, {});
  b.Input("x", DType::kFloat32, {Dim::Fixed(1)});
  auto then_g = std::make_shared<Graph>();
  {
    GraphBuilder tb(then_g.get());
    tb.Constant("one", Tensor::F32({1}, {1.0f}), false);
    tb.Op("Add", {"x", "one"}, "then_out");
    tb.Output("then_out");
  }
  auto else_g = std::make_shared<Graph>();
  {
    GraphBuilder eb(else_g.get());
    eb.Op("Identity", {"x"}, "else_out");
    eb.Output("else_out");
  }
  b.Op("If", {"cond"}, "y", {{"then_branch", GraphPtr(then_g)}, {"else_branch", GraphPtr(else_g)}});
  b.Output("y");
  return g;
}

TEST(ExecuteTest, SubtractingExactZeroIsBitIdentical) {
  Graph g;
  GraphBuilder b(&g);
  b.Input("x", DType::kFloat32, {Dim::Fixed(2)});
  b.Constant("zero", Tensor::ScalarF32(0.0f), false);
  b.Op("Sub", {"x", "zero"}, "out");
  b.Output("out");
  const Tensor x = Tensor::F32({2}, {1.5f, -2.0f});
  const ExecutionResult r = Execute(g, {{"x", x}});
  EXPECT_EQ(OutBytes(r, "out"), x.RawBytes());
}

TEST(ExecuteTest, IfTakesOnlyTheSelectedBranch) {
  const Graph g = IfGraph();
  const Tensor x = Tensor::F32({1}, {3.0f});
  const ExecutionResult off = Execute(g, {{"cond", Tensor::ScalarBool(false)}, {"x", x}}, true);
  EXPECT_EQ(off.outputs.at("y").f32()[0], 3.0f);
  EXPECT_FALSE(off.intermediates.count("then_out"));
  EXPECT_FALSE(off.intermediates.count("one"));
  const ExecutionResult on = Execute(g, {{"cond", Tensor::ScalarBool(true)}, {"x", x}}, true);
  EXPECT_EQ(on.outputs.at("y").f32()[0], 4.0f);
  EXPECT_FALSE(on.intermediates.count("else_out"));
}

TEST(ExecuteTest, MatMulByIdentity) {
  Graph g;
  GraphBuilder b(&g);
  b.Input("a", DType::kFloat32, {Dim::Fixed(1), Dim::Fixed(2)});
  b.Constant("eye", Tensor::F32({2, 2}, {1, 0, 0, 1}), true);
  b.Op("MatMul", {"a", "eye"}, "out");
  b.Output("out");
  const ExecutionResult r = Execute(g, {{"a", Tensor::F32({1, 2}, {1, 2})}});
  EXPECT_EQ(r.outputs.at("out").shape(), (Shape{1, 2}));
  EXPECT_EQ(r.outputs.at("out").f32()[0], 1.0f);
  EXPECT_EQ(r.outputs.at("out").f32()[1], 2.0f);
}

TEST(ExecuteTest, MatchesOracleOnRandomGraphs) {
  int with_if = 0;
  for (uint64_t seed = 0; seed < 300; ++seed) {
    const Graph g = GenerateRandomGraph(seed);
    for (const Node& n : g.nodes) with_if += n.op_type == "If";
    const TensorMap inputs = RandomInputsFor(g, seed + 7);
    const std::map<std::string, Tensor> expected = testing::OracleEvaluate(g, inputs);
    for (KernelBackend backend : {KernelBackend::kParallel, KernelBackend::kReference}) {
      ExecutionRequest req;
      req.graph = &g;
      req.inputs = inputs;
      req.backend = backend;
      const ExecutionResult r = Execute(req);
      ASSERT_EQ(r.outputs.size(), expected.size());
      for (const auto& [name, t] : expected) {
        EXPECT_EQ(r.outputs.at(name).shape(), t.shape()) << "seed " << seed << " " << name;
        EXPECT_EQ(r.outputs.at(name).RawBytes(), t.RawBytes()) << "seed " << seed << " " << name;
      }
    }
  }
  EXPECT_GT(with_if, 10);  // the corpus must exercise control flow
}

TEST(ExecuteTest, FiveNodeGraphsMatchOracle) {
  int checked = 0;
  for (uint64_t seed = 1000; checked < 100; ++seed) {
    const Graph g = GenerateRandomGraph(seed, {.max_nodes = 5, .max_dim = 8, .allow_if = true});
    const TensorMap inputs = RandomInputsFor(g, seed);
    const auto expected = testing::OracleEvaluate(g, inputs);
    const ExecutionResult r = Execute(g, inputs);
    for (const auto& [name, t] : expected) {
      EXPECT_EQ(r.outputs.at(name).RawBytes(), t.RawBytes()) << "seed " << seed;
    }
    ++checked;
  }
}

TEST(ExecuteTest, DeterministicAndCaptureNeutral) {
  for (const ToyModelConfig& c : CleanCorpusConfigs()) {
    const Graph g = GenerateToyModel(c);
    const TensorMap in = RandomToyInputs(c, c.seq_len > 0 ? c.seq_len : 5, c.seed);
    const ExecutionResult a = Execute(g, in);
    const ExecutionResult b = Execute(g, in);
    const ExecutionResult captured = Execute(g, in, true);
    ExecutionRequest ref_req;
    ref_req.graph = &g;
    ref_req.inputs = in;
    ref_req.backend = KernelBackend::kReference;
    const ExecutionResult ref = Execute(ref_req);
    EXPECT_TRUE(CompareRuns(a, b, ComparisonTolerance::Bitwise()).all_pass());
    EXPECT_TRUE(CompareRuns(a, captured, ComparisonTolerance::Bitwise()).all_pass());
    EXPECT_TRUE(CompareRuns(a, ref, ComparisonTolerance::Bitwise()).all_pass());
    EXPECT_TRUE(a.intermediates.empty());
    // Every node output is captured.
    for (const Node& n : g.nodes) {
      for (const std::string& o : n.outputs) EXPECT_TRUE(captured.intermediates.count(o)) << o;
    }
  }
}

TEST(ExecuteTest, MissingAndUnknownInputs) {
  const Graph g = testing::ThreeNodeChain();
  EXPECT_EQ(CodeOf([&] { Execute(g, {}); }), ErrorCode::kMissingInput);
  EXPECT_EQ(CodeOf([&] {
              Execute(g, {{"x", Tensor::F32({1, 2}, {1, 2})}, {"bogus", Tensor::ScalarF32(1)}});
            }),
            ErrorCode::kInvalidArgument);
}

TEST(ExecuteTest, SignatureMismatchesAreShapeErrors) {
  const Graph g = testing::ThreeNodeChain();
  EXPECT_EQ(CodeOf([&] { Execute(g, {{"x", Tensor::F32({2, 2}, {1, 2, 3, 4})}}); }),
            ErrorCode::kShapeMismatch);
  EXPECT_EQ(CodeOf([&] { Execute(g, {{"x", Tensor::F32({2}, {1, 2})}}); }),
            ErrorCode::kShapeMismatch);
}

TEST(ExecuteTest, SymbolicDimsBindConsistently) {
  Graph g;
  GraphBuilder b(&g);
  b.Input("a", DType::kFloat32, {Dim::Symbolic("n")});
  b.Input("c", DType::kFloat32, {Dim::Symbolic("n")});
  b.Op("Add", {"a", "c"}, "out");
  b.Output("out");
  EXPECT_NO_THROW(Execute(g, {{"a", Tensor::F32({3}, {1, 2, 3})}, {"c", Tensor::F32({3}, {1, 2, 3})}}));
  EXPECT_EQ(CodeOf([&] {
              Execute(g, {{"a", Tensor::F32({3}, {1, 2, 3})}, {"c", Tensor::F32({2}, {1, 2})}});
            }),
            ErrorCode::kShapeMismatch);
}

TEST(ExecuteTest, KernelFailuresNameTheNode) {
  Graph g;
  GraphBuilder b(&g);
  b.Input("a", DType::kFloat32, {Dim::Fixed(2), Dim::Fixed(3)});
  b.Constant("w", Tensor::F32({2, 2}, {1, 0, 0, 1}), true);
  b.Op("MatMul", {"a", "w"}, "bad_matmul");
  b.Output("bad_matmul");
  try {
    Execute(g, {{"a", Tensor::Zeros(DType::kFloat32, {2, 3})}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
    EXPECT_NE(std::string(e.what()).find("bad_matmul"), std::string::npos);
  }
}

TEST(ExecuteTest, DivisionPolicy) {
  Graph g;
  GraphBuilder b(&g);
  b.Input("a", DType::kFloat32, {Dim::Fixed(2)});
  b.Constant("z", Tensor::F32({2}, {0.0f, -0.0f}), true);
  b.Op("Div", {"a", "z"}, "q");
  b.Output("q");
  const ExecutionResult r = Execute(g, {{"a", Tensor::F32({2}, {1.0f, 1.0f})}});
  EXPECT_TRUE(std::isinf(r.outputs.at("q").f32()[0]) && r.outputs.at("q").f32()[0] > 0);
  EXPECT_TRUE(std::isinf(r.outputs.at("q").f32()[1]) && r.outputs.at("q").f32()[1] < 0);

  Graph h;
  GraphBuilder hb(&h);
  hb.Input("a", DType::kInt64, {Dim::Fixed(1)});
  hb.Constant("z", Tensor::I64({1}, {0}), true);
  hb.Op("Div", {"a", "z"}, "q");
  hb.Output("q");
  EXPECT_EQ(CodeOf([&] { Execute(h, {{"a", Tensor::I64({1}, {4})}}); }), ErrorCode::kNumericDomain);
}

TEST(ExecuteTest, LayerNormEpsilonDefaultsWhenAbsent) {
  Graph g;
  GraphBuilder b(&g);
  b.Input("x", DType::kFloat32, {Dim::Fixed(1), Dim::Fixed(2)});
  b.Constant("s", Tensor::F32({2}, {1, 1}), true);
  b.Op("LayerNormalization", {"x", "s"}, "y");
  b.Output("y");
  const float y = Execute(g, {{"x", Tensor::F32({1, 2}, {0.0f, 2.0f})}}).outputs.at("y").f32()[1];
  EXPECT_EQ(y, 1.0f / std::sqrt(1.0f + kDefaultLayerNormEpsilon));
}

TEST(ExecuteTest, SliceWrapsNegativeIndices) {
  Graph g;
  GraphBuilder b(&g);
  b.Input("x", DType::kFloat32, {Dim::Fixed(4)});
  b.Op("Slice", {"x"}, "tail",
       {{"starts", std::vector<int64_t>{-2}}, {"ends", std::vector<int64_t>{INT64_MAX}},
        {"axes", std::vector<int64_t>{0}}});
  b.Op("Slice", {"x"}, "head",
       {{"starts", std::vector<int64_t>{0}}, {"ends", std::vector<int64_t>{1}},
        {"axes", std::vector<int64_t>{-1}}});
  b.Op("Slice", {"x"}, "rev",
       {{"starts", std::vector<int64_t>{-1}}, {"ends", std::vector<int64_t>{INT64_MIN}},
        {"axes", std::vector<int64_t>{0}}, {"steps", std::vector<int64_t>{-1}}});
  b.Output("tail");
  b.Output("head");
  b.Output("rev");
  const ExecutionResult r = Execute(g, {{"x", Tensor::F32({4}, {1, 2, 3, 4})}});
  EXPECT_EQ(r.outputs.at("tail").RawBytes(), Tensor::F32({2}, {3, 4}).RawBytes());
  EXPECT_EQ(r.outputs.at("head").RawBytes(), Tensor::F32({1}, {1}).RawBytes());
  EXPECT_EQ(r.outputs.at("rev").RawBytes(), Tensor::F32({4}, {4, 3, 2, 1}).RawBytes());
}

TEST(CompareRunsTest, BitwiseAndRelativeModes) {
  ExecutionResult a;
  a.outputs["y"] = Tensor::F32({2}, {1.0f, 2.0f});
  ExecutionResult b = a;
  EXPECT_TRUE(CompareRuns(a, b, ComparisonTolerance::Bitwise()).all_pass());
  ExecutionResult c;
  c.outputs["y"] = Tensor::F32({2}, {1.0f + 1e-7f, 2.0f});
  EXPECT_FALSE(CompareRuns(a, c, ComparisonTolerance::Bitwise()).all_pass());
  EXPECT_TRUE(CompareRuns(a, c, ComparisonTolerance::Relative(1e-6)).all_pass());
  ExecutionResult far;
  far.outputs["y"] = Tensor::F32({2}, {1.1f, 2.0f});
  const ComparisonReport r = CompareRuns(a, far, ComparisonTolerance::Relative(1e-6));
  ASSERT_EQ(r.outputs.size(), 1u);
  EXPECT_FALSE(r.outputs[0].pass);
  EXPECT_EQ(r.outputs[0].differing_elements, 1);
  EXPECT_NEAR(r.outputs[0].max_abs_diff, 0.1, 1e-6);
}

TEST(CompareRunsTest, TinyDifferencesPassRelative) {
  ExecutionResult a;
  a.outputs["v"] = Tensor::F32({1}, {0.5f});
  ExecutionResult b;
  // 1e-9 is below f32 resolution near 0.5, so use an absolute offset near 0.
  a.outputs["w"] = Tensor::F32({1}, {0.0f});
  b.outputs["v"] = Tensor::F32({1}, {0.5f});
  b.outputs["w"] = Tensor::F32({1}, {1e-9f});
  EXPECT_TRUE(CompareRuns(a, b, ComparisonTolerance::Relative(1e-6)).all_pass());
  EXPECT_FALSE(CompareRuns(a, b, ComparisonTolerance::Bitwise()).all_pass());
}

TEST(CompareRunsTest, DifferentOutputSetsAreSignatureMismatch) {
  ExecutionResult a;
  a.outputs["y"] = Tensor::ScalarF32(1);
  ExecutionResult b;
  b.outputs["z"] = Tensor::ScalarF32(1);
  EXPECT_EQ(CodeOf([&] { CompareRuns(a, b, ComparisonTolerance::Bitwise()); }),
            ErrorCode::kSignatureMismatch);
}

TEST(CompareRunsTest, TriggeredInjectionDiffers) {
  const testing::ToyCase tc = testing::MakeToyCase(ToyModelConfig{});
  const InjectionResult inj = testing::InjectToy(tc, InjectionMode::kIfGuarded);
  TensorMap in = RandomToyInputs(tc.config, 6, 3, {9, 7});
  in["input_ids"].mutable_i64()[1] = 9;
  in["input_ids"].mutable_i64()[2] = 7;
  EXPECT_FALSE(CompareRuns(Execute(tc.base, in), Execute(inj.graph, in),
                           ComparisonTolerance::Bitwise())
                   .all_pass());
}

}  // namespace
}  // namespace graphsentry
