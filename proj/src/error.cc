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

#include "graphsentry/error.h"

namespace graphsentry {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedEncoding: return "MalformedEncoding";
    case ErrorCode::kUnsupportedOperator: return "UnsupportedOperator";
    case ErrorCode::kUnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::kUnsupportedFeature: return "UnsupportedFeature";
    case ErrorCode::kInvalidGraph: return "InvalidGraph";
    case ErrorCode::kInvalidTensor: return "InvalidTensor";
    case ErrorCode::kCycleDetected: return "CycleDetected";
    case ErrorCode::kUnknownValue: return "UnknownValue";
    case ErrorCode::kWouldCreateCycle: return "WouldCreateCycle";
    case ErrorCode::kNameCollision: return "NameCollision";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kMissingInput: return "MissingInput";
    case ErrorCode::kNumericDomain: return "NumericDomain";
    case ErrorCode::kUnboundSymbolicDim: return "UnboundSymbolicDim";
    case ErrorCode::kSignatureMismatch: return "SignatureMismatch";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kZeroSeparation: return "ZeroSeparation";
    case ErrorCode::kMalformedDump: return "MalformedDump";
    case ErrorCode::kClassLabelUnknown: return "ClassLabelUnknown";
    case ErrorCode::kBadPattern: return "BadPattern";
    case ErrorCode::kNoMatches: return "NoMatches";
    case ErrorCode::kTriggerTooLong: return "TriggerTooLong";
    case ErrorCode::kMissingCacheOutput: return "MissingCacheOutput";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kAlreadyInjected: return "AlreadyInjected";
    case ErrorCode::kInvalidTriggerSpec: return "InvalidTriggerSpec";
    case ErrorCode::kAlgorithmUnsupported: return "AlgorithmUnsupported";
    case ErrorCode::kMalformedManifest: return "MalformedManifest";
    case ErrorCode::kMalformedRuleset: return "MalformedRuleset";
    case ErrorCode::kDuplicateEntry: return "DuplicateEntry";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kStoreIO: return "StoreIO";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUsageError: return "UsageError";
  }
  return "Unknown";
}

}  // namespace graphsentry
