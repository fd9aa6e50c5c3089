// Copyright 2026 The t2imt Authors
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

#include "t2imt/error.hpp"

namespace t2imt {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kUnknownSurfaceForm: return "UnknownSurfaceForm";
    case ErrorCode::kRegistryOverflow: return "RegistryOverflow";
    case ErrorCode::kEmptyPool: return "EmptyPool";
    case ErrorCode::kNoEligibleReplacement: return "NoEligibleReplacement";
    case ErrorCode::kInsufficientDensity: return "InsufficientDensity";
    case ErrorCode::kNoEligibleAugmentation: return "NoEligibleAugmentation";
    case ErrorCode::kNoSubstitutableWord: return "NoSubstitutableWord";
    case ErrorCode::kUnknownTemplateSlot: return "UnknownTemplateSlot";
    case ErrorCode::kBackendTimeout: return "BackendTimeout";
    case ErrorCode::kBackendRejected: return "BackendRejected";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kPersistFailure: return "PersistFailure";
    case ErrorCode::kUnparseablePrompt: return "UnparseablePrompt";
    case ErrorCode::kBudgetExhausted: return "BudgetExhausted";
    case ErrorCode::kDetectorUnavailable: return "DetectorUnavailable";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kUnknownClassStrict: return "UnknownClassStrict";
    case ErrorCode::kOperatorMismatch: return "OperatorMismatch";
    case ErrorCode::kEmptyVerdictSet: return "EmptyVerdictSet";
    case ErrorCode::kZeroDenominator: return "ZeroDenominator";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEigDecompositionFailure: return "EigDecompositionFailure";
    case ErrorCode::kNonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::kInvalidDistribution: return "InvalidDistribution";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIncompleteRun: return "IncompleteRun";
    case ErrorCode::kIoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace t2imt
