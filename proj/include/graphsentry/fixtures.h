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


// Deterministic generators for toy transformer graphs, synthetic activation
// dumps and small random graphs.
//
// Toy model I/O convention:
//   input_ids      i64 [1, seq]          token ids
//   key_cache      f32 [layers, P, d]    rolling key cache, P = cache_len
//   logits         f32 [1, seq, vocab]
//   key_cache_out  f32 [layers, P, d]
// Hidden states are f32 [1, seq, d]. Each layer exposes the outputs of its two
// layer norms under "input_layernorm" and "post_attention_layernorm" names.

#ifndef GRAPHSENTRY_FIXTURES_H_
#define GRAPHSENTRY_FIXTURES_H_

#include <cstdint>
#include <string>
#include <vector>

#include "graphsentry/graph.h"
#include "graphsentry/interpreter.h"
#include "graphsentry/vector_lab.h"

namespace graphsentry {

enum class NamingScheme {
  kLlama,  // layers.0.input_layernorm.out
  kPhi,    // model.layers.0.input_layernorm/output_0
};

struct ToyModelConfig {
  int64_t layers = 2;
  int64_t hidden_dim = 8;
  int64_t vocab_size = 32;
  int64_t seq_len = 0;  // 0 declares a symbolic "seq" extent
  int64_t cache_len = 4;
  uint64_t seed = 1;
  NamingScheme naming = NamingScheme::kLlama;
};

// Throws kInvalidConfig.
void ValidateToyConfig(const ToyModelConfig& config);
Graph GenerateToyModel(const ToyModelConfig& config);

struct FixtureManifest {
  std::string fixture;
  std::vector<std::string> expected_aliases;  // name-sorted
  std::vector<std::string> inputs;            // "name dtype[shape]"
  std::vector<std::string> outputs;

  std::string ToText() const;
  static FixtureManifest Parse(const std::string& text);  // kMalformedManifest
};

FixtureManifest ToyManifest(const ToyModelConfig& config);

// Random bindings for a toy graph. Tokens are drawn from [1, vocab) minus
// `avoid_tokens`; the cache is uniform on [-1, 1).
TensorMap RandomToyInputs(const ToyModelConfig& config, int64_t seq_len,
                          uint64_t seed,
                          const std::vector<int64_t>& avoid_tokens = {});

// Twenty toy models of varied size, seed and naming scheme.
std::vector<ToyModelConfig> CleanCorpusConfigs();

struct SyntheticDumpConfig {
  uint32_t layers = 4;
  uint32_t hidden_dim = 64;
  uint32_t per_class_count = 100;
  uint32_t planted_layer = 0;
  std::vector<float> planted_direction;  // empty: random unit direction
  double delta = 1.0;
  double noise_sigma = 0.1;
  uint64_t seed = 1;
};

struct SyntheticTruth {
  uint32_t layer = 0;
  double delta = 0.0;
  std::vector<double> direction;  // unit length
  uint64_t seed = 0;

  std::string ToJson() const;
  static SyntheticTruth FromJson(const std::string& text);  // kMalformedManifest
};

struct SyntheticDump {
  ActivationDump dump;
  SyntheticTruth truth;
};

// Throws kInvalidConfig.
SyntheticDump GenerateSyntheticDump(const SyntheticDumpConfig& config);

struct RandomGraphOptions {
  int max_nodes = 10;
  int max_dim = 8;
  bool allow_if = true;
};

// Well-formed f32 graph of 1..max_nodes nodes with extents <= max_dim. No two
// nodes share op, attributes and inputs. Unconsumed values become outputs.
Graph GenerateRandomGraph(uint64_t seed, const RandomGraphOptions& options = {});

// Random bindings for every graph input.
TensorMap RandomInputsFor(const Graph& graph, uint64_t seed);

}  // namespace graphsentry

#endif  // GRAPHSENTRY_FIXTURES_H_
