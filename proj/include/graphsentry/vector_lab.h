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


// Difference-of-means steering direction from class-labeled activations.
//
// Class means and norms accumulate in double; directions are stored as f32
// because that is the precision they are embedded at. The direction points
// from the harmful mean toward the benign mean.

#ifndef GRAPHSENTRY_VECTOR_LAB_H_
#define GRAPHSENTRY_VECTOR_LAB_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "graphsentry/tensor.h"

namespace graphsentry {

enum class PromptClass : uint8_t { kBenign = 0, kHarmful = 1 };

std::string_view PromptClassName(PromptClass c);   // "benign" | "harmful"
PromptClass PromptClassFromName(std::string_view name);  // kClassLabelUnknown

struct ActivationRecord {
  PromptClass label = PromptClass::kBenign;
  uint64_t prompt_id = 0;
  std::vector<float> values;  // layer-major, layer_count * hidden_dim

  std::span<const float> Layer(uint32_t layer, uint32_t hidden_dim) const {
    return std::span<const float>(values).subspan(
        static_cast<size_t>(layer) * hidden_dim, hidden_dim);
  }
};

struct ActivationDump {
  uint32_t layer_count = 0;
  uint32_t hidden_dim = 0;
  std::vector<ActivationRecord> records;

  // Record shapes only; throws kMalformedDump naming the record index.
  void CheckShape() const;
  // CheckShape plus both classes present; throws kEmptyClass.
  void Validate() const;
};

// Mean over the token axis of an f32 [tokens, d] (or [1, tokens, d]) tensor.
// Throws kEmptySequence for zero tokens.
std::vector<float> TokenAverage(const Tensor& per_token);

struct LayerSeparation {
  std::vector<double> benign_mean;
  std::vector<double> harmful_mean;
  double separation = 0.0;  // ||benign_mean - harmful_mean||_2
};

struct SeparationProfile {
  std::vector<LayerSeparation> layers;
  std::vector<double> Separations() const;
};

// Throws kEmptyClass, kMalformedDump.
SeparationProfile ComputeSeparationProfile(const ActivationDump& dump);

struct LayerSelection {
  int64_t layer = 0;
  bool degenerate = false;  // every separation is zero
  std::string warning;      // "DegenerateSeparation: ..." when degenerate
};

// Argmax with ties to the lowest index.
LayerSelection SelectLayer(const SeparationProfile& profile);

inline constexpr double kDefaultAlpha = 2.0;
inline constexpr double kMinAlpha = 0.1;
inline constexpr double kMaxAlpha = 10.0;

struct UncensoringVector {
  int64_t layer = 0;
  std::vector<float> direction;  // unit length
  double alpha = kDefaultAlpha;

  int64_t dim() const { return static_cast<int64_t>(direction.size()); }
  // f32 [d, d] holding alpha * direction * direction^T.
  Tensor AblationMatrix() const;
};

// Throws kZeroSeparation when the chosen layer's separation is below 1e-9,
// kInvalidArgument for a non-positive alpha or an out-of-range layer.
UncensoringVector BuildUncensoringVector(const SeparationProfile& profile,
                                         int64_t layer, double alpha);

// Binary dump ("AVD1") and vector ("UVEC") files. Throw kMalformedDump,
// kClassLabelUnknown or kIoError.
std::vector<uint8_t> EncodeDump(const ActivationDump& dump);
ActivationDump DecodeDump(std::span<const uint8_t> bytes);
void WriteDump(const std::filesystem::path& path, const ActivationDump& dump);
ActivationDump ReadDump(const std::filesystem::path& path);

std::vector<uint8_t> EncodeVector(const UncensoringVector& v);
UncensoringVector DecodeVector(std::span<const uint8_t> bytes);
void WriteVector(const std::filesystem::path& path, const UncensoringVector& v);
UncensoringVector ReadVector(const std::filesystem::path& path);

}  // namespace graphsentry

#endif  // GRAPHSENTRY_VECTOR_LAB_H_
