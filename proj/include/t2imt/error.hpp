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

#ifndef T2IMT_ERROR_HPP_
#define T2IMT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace t2imt {

enum class ErrorCode {
  // input / registry
  kInvalidInput,
  kUnknownSurfaceForm,
  kRegistryOverflow,
  // mutation
  kEmptyPool,
  kNoEligibleReplacement,
  kInsufficientDensity,
  kNoEligibleAugmentation,
  kNoSubstitutableWord,
  // synthesis
  kUnknownTemplateSlot,
  // generation
  kBackendTimeout,
  kBackendRejected,
  kRateLimited,
  kPersistFailure,
  kUnparseablePrompt,
  kBudgetExhausted,
  // detection
  kDetectorUnavailable,
  kMalformedResponse,
  kUnknownClassStrict,
  // evaluation
  kOperatorMismatch,
  kEmptyVerdictSet,
  kZeroDenominator,
  // numerics
  kTooFewSamples,
  kNonFiniteInput,
  kDimensionMismatch,
  kEigDecompositionFailure,
  kNonPositiveTemperature,
  kInvalidDistribution,
  kEmptyMatrix,
  // orchestration
  kConfigError,
  kIncompleteRun,
  kIoError,
};

const char* error_code_name(ErrorCode code);

// Single exception type for all expected failure modes; the code
// distinguishes them for callers that need to branch (the campaign
// runner maps a subset to "inapplicable" rather than "failed").
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace t2imt

#endif  // T2IMT_ERROR_HPP_
