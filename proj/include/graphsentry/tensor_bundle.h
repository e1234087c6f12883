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


// Named tensor bundles ("ATB1" files) for interpreter bindings and results.
//
// Layout, little-endian: magic "ATB1", u32 count, then per tensor in name
// order: u32 name length, name bytes, u8 dtype (0 f32, 1 i64, 2 bool),
// u32 rank, rank x i64 dims, u64 payload length, payload bytes.

#ifndef GRAPHSENTRY_TENSOR_BUNDLE_H_
#define GRAPHSENTRY_TENSOR_BUNDLE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "graphsentry/interpreter.h"

namespace graphsentry {

std::vector<uint8_t> EncodeBundle(const TensorMap& tensors);
TensorMap DecodeBundle(std::span<const uint8_t> bytes);  // kMalformedEncoding

void WriteBundle(const std::filesystem::path& path, const TensorMap& tensors);
TensorMap ReadBundle(const std::filesystem::path& path);

}  // namespace graphsentry

#endif  // GRAPHSENTRY_TENSOR_BUNDLE_H_
