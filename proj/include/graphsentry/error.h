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

#ifndef GRAPHSENTRY_ERROR_H_
#define GRAPHSENTRY_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace graphsentry {

// Stable error identifiers. The string form returned by ErrorCodeName() is
// part of the CLI contract and must not change between releases.
enum class ErrorCode {
  kMalformedEncoding,
  kUnsupportedOperator,
  kUnsupportedDtype,
  kUnsupportedFeature,
  kInvalidGraph,
  kInvalidTensor,
  kCycleDetected,
  kUnknownValue,
  kWouldCreateCycle,
  kNameCollision,
  kShapeMismatch,
  kMissingInput,
  kNumericDomain,
  kUnboundSymbolicDim,
  kSignatureMismatch,
  kEmptySequence,
  kEmptyClass,
  kZeroSeparation,
  kMalformedDump,
  kClassLabelUnknown,
  kBadPattern,
  kNoMatches,
  kTriggerTooLong,
  kMissingCacheOutput,
  kDimensionMismatch,
  kAlreadyInjected,
  kInvalidTriggerSpec,
  kAlgorithmUnsupported,
  kMalformedManifest,
  kMalformedRuleset,
  kDuplicateEntry,
  kNotFound,
  kStoreIO,
  kInvalidConfig,
  kInvalidArgument,
  kIoError,
  kUsageError,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace graphsentry

#endif  // GRAPHSENTRY_ERROR_H_
