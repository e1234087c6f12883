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


// Parallel vs reference kernels and end-to-end toy model runs.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "graphsentry/fixtures.h"
#include "graphsentry/injector.h"
#include "graphsentry/interpreter.h"
#include "graphsentry/kernels.h"
#include "graphsentry/random.h"
#include "graphsentry/sentinel.h"
#include "graphsentry/vector_lab.h"

namespace graphsentry {
namespace {

Tensor RandomMatrix(int64_t rows, int64_t cols, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(static_cast<size_t>(rows * cols));
  for (float& x : v) x = rng.UniformF(-1.0f, 1.0f);
  return Tensor::F32({rows, cols}, std::move(v));
}

template <bool kReference>
void BM_MatMul(benchmark::State& state) {
  const int64_t n = state.range(0);
  const Tensor a = RandomMatrix(n, n, 1), b = RandomMatrix(n, n, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kReference ? kernels::reference::MatMul(a, b)
                                        : kernels::MatMul(a, b));
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_MatMul<false>)->Name("MatMul/parallel")->Arg(64)->Arg(256);
BENCHMARK(BM_MatMul<true>)->Name("MatMul/reference")->Arg(64)->Arg(256);

template <bool kReference>
void BM_LayerNorm(benchmark::State& state) {
  const int64_t rows = state.range(0);
  const Tensor x = RandomMatrix(rows, 256, 3);
  const Tensor scale = Tensor::F32({256}, std::vector<float>(256, 1.0f));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kReference
                                 ? kernels::reference::LayerNorm(x, scale, nullptr, -1, 1e-5f)
                                 : kernels::LayerNorm(x, scale, nullptr, -1, 1e-5f));
  }
}
BENCHMARK(BM_LayerNorm<false>)->Name("LayerNorm/parallel")->Arg(64)->Arg(1024);
BENCHMARK(BM_LayerNorm<true>)->Name("LayerNorm/reference")->Arg(64)->Arg(1024);

template <bool kReference>
void BM_Softmax(benchmark::State& state) {
  const Tensor x = RandomMatrix(state.range(0), 256, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kReference ? kernels::reference::Softmax(x, -1)
                                        : kernels::Softmax(x, -1));
  }
}
BENCHMARK(BM_Softmax<false>)->Name("Softmax/parallel")->Arg(1024);
BENCHMARK(BM_Softmax<true>)->Name("Softmax/reference")->Arg(1024);

ToyModelConfig BenchToy() {
  ToyModelConfig c;
  c.layers = 4;
  c.hidden_dim = 96;
  c.vocab_size = 256;
  c.cache_len = 16;
  c.seed = 8;
  return c;
}

UncensoringVector BenchVector(int64_t d) {
  SyntheticDumpConfig dc;
  dc.layers = 2;
  dc.hidden_dim = static_cast<uint32_t>(d);
  dc.per_class_count = 16;
  dc.planted_layer = 1;
  const SeparationProfile p = ComputeSeparationProfile(GenerateSyntheticDump(dc).dump);
  return BuildUncensoringVector(p, SelectLayer(p).layer, kDefaultAlpha);
}

// Arg 0: baseline, 1: if_guarded, 2: obfuscated. Arg 1: backend.
void BM_ToyRun(benchmark::State& state) {
  const ToyModelConfig c = BenchToy();
  Graph g = GenerateToyModel(c);
  if (state.range(0) > 0) {
    InjectionPlan plan;
    plan.mode = state.range(0) == 1 ? InjectionMode::kIfGuarded : InjectionMode::kObfuscated;
    g = Inject(g, plan, BenchVector(c.hidden_dim), MakeTriggerSpec(g, {9, 7}, 0, 42)).graph;
  }
  ExecutionRequest req;
  req.graph = &g;
  req.inputs = RandomToyInputs(c, 64, 5, {9});
  req.backend = state.range(1) ? KernelBackend::kReference : KernelBackend::kParallel;
  for (auto _ : state) benchmark::DoNotOptimize(Execute(req));
}
BENCHMARK(BM_ToyRun)
    ->ArgNames({"variant", "reference"})
    ->ArgsProduct({{0, 1, 2}, {0, 1}})
    ->Unit(benchmark::kMicrosecond);

void BM_CanonicalHash(benchmark::State& state) {
  const Graph g = GenerateToyModel(BenchToy());
  HashOptions o;
  o.created_at = "2026-01-01T00:00:00Z";
  for (auto _ : state) benchmark::DoNotOptimize(CanonicalHash(g, o));
}
BENCHMARK(BM_CanonicalHash)->Unit(benchmark::kMicrosecond);

void BM_Scan(benchmark::State& state) {
  const Graph g = GenerateToyModel(BenchToy());
  for (auto _ : state) benchmark::DoNotOptimize(Scan(g));
}
BENCHMARK(BM_Scan)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace graphsentry

BENCHMARK_MAIN();
