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

// Reference executor for the supported operator subset.
//
// Nodes run one at a time in TopoOrder with no fusion or folding, so every
// node in the graph is exercised. If evaluates only the taken branch.
// Arithmetic is IEEE-754 single precision; f32 division by zero yields
// infinities, integer division by zero raises kNumericDomain.

#ifndef GRAPHSENTRY_INTERPRETER_H_
#define GRAPHSENTRY_INTERPRETER_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "graphsentry/graph.h"
#include "graphsentry/tensor.h"

namespace graphsentry {

inline constexpr float kDefaultLayerNormEpsilon = 1e-5f;

using TensorMap = std::map<std::string, Tensor>;

enum class KernelBackend { kParallel, kReference };

struct ExecutionRequest {
  const Graph* graph = nullptr;
  TensorMap inputs;
  bool capture_intermediates = false;
  KernelBackend backend = KernelBackend::kParallel;
  bool validate = true;
};

struct ExecutionResult {
  TensorMap outputs;        // exactly graph.outputs
  TensorMap intermediates;  // every computed value, iff captured
  int64_t elapsed_ns = 0;
};

// Throws kShapeMismatch, kMissingInput, kNumericDomain, kUnsupportedDtype,
// kInvalidGraph. Node-level failures name the node in the message.
ExecutionResult Execute(const ExecutionRequest& request);

ExecutionResult Execute(const Graph& graph, TensorMap inputs,
                        bool capture_intermediates = false);

struct ComparisonTolerance {
  enum class Mode { kBitwise, kRelative };
  Mode mode = Mode::kBitwise;
  double eps = 0.0;

  static ComparisonTolerance Bitwise() { return {}; }
  static ComparisonTolerance Relative(double e) { return {Mode::kRelative, e}; }
};

struct OutputComparison {
  std::string name;
  bool pass = false;
  int64_t differing_elements = 0;
  double max_abs_diff = 0.0;
  std::string note;  // set on dtype/shape disagreement
};

struct ComparisonReport {
  std::vector<OutputComparison> outputs;  // name-sorted
  bool all_pass() const;
};

// Relative mode passes an element when |a - b| <= eps * max(|a|, |b|, 1).
// Throws kSignatureMismatch when the output name sets differ.
ComparisonReport CompareRuns(const ExecutionResult& a, const ExecutionResult& b,
                             const ComparisonTolerance& tolerance);

}  // namespace graphsentry

#endif  // GRAPHSENTRY_INTERPRETER_H_
