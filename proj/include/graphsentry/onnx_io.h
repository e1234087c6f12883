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

// ONNX protobuf codec for the supported subset: ModelProto, GraphProto,
// NodeProto, TensorProto, AttributeProto, ValueInfoProto and opset imports.
// Unknown optional fields (doc strings, metadata, value_info) are skipped on
// read and never written. Tensor payloads are always written as raw_data.

#ifndef GRAPHSENTRY_ONNX_IO_H_
#define GRAPHSENTRY_ONNX_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "graphsentry/graph.h"

namespace graphsentry {

// Throws kMalformedEncoding, kUnsupportedOperator, kUnsupportedDtype,
// kUnsupportedFeature or kInvalidGraph.
Graph ParseModel(std::span<const uint8_t> bytes);

// Deterministic: identical graphs give identical bytes. Throws kInvalidGraph.
std::vector<uint8_t> SerializeModel(const Graph& graph);

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const uint8_t> bytes);

Graph LoadModel(const std::filesystem::path& path);
void SaveModel(const std::filesystem::path& path, const Graph& graph);

}  // namespace graphsentry

#endif  // GRAPHSENTRY_ONNX_IO_H_
