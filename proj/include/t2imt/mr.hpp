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
//
// Consistency relations between the seed image's detected classes and the
// follow-up image's detected classes, one per mutation operator. With
// K = seed-detected ∩ follow-detected:
//   entity change   K_e == seed \ {replaced}  and  K_e == follow \ {replacement};
//                   relation sets must match K_r on both sides
//   triple removal  K == follow sets (follow must be contained in seed)
//   triple augment  K == seed sets   (everything seen in seed must persist)
//   synonym sub     follow sets must equal the input pool's sets exactly
// A violated entity-side clause sets the entity flag, relation-side the
// relation flag.

#ifndef T2IMT_MR_HPP_
#define T2IMT_MR_HPP_

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "t2imt/detection.hpp"
#include "t2imt/er.hpp"
#include "t2imt/mutation.hpp"

namespace t2imt {

struct MRCase {
  MutationRecord record;
  DetectionResult seed_detection;
  DetectionResult follow_detection;
};

struct MRVerdict {
  bool entity_violation = false;    // p_e
  bool relation_violation = false;  // p_r
  std::vector<std::string> violated_clauses;
  // Witness material: the sets the clauses were evaluated over.
  ClassSets common;      // K
  ClassSets seed_sets;   // detected in the seed image (input pool sets for ss)
  ClassSets follow_sets; // detected in the follow-up image

  bool clean() const { return !entity_violation && !relation_violation; }
  nlohmann::json to_json(const Registry& reg) const;
};

// Set-level checks (the case-level functions below extract the sets and
// delegate here; tests drive these directly with enumerated set pairs).
MRVerdict check_ec_sets(const ClassSets& seed, const ClassSets& follow, EntityId replaced,
                        EntityId replacement);
MRVerdict check_er_r_sets(const ClassSets& seed, const ClassSets& follow);
MRVerdict check_er_a_sets(const ClassSets& seed, const ClassSets& follow);
MRVerdict check_ss_sets(const ClassSets& input_pool, const ClassSets& follow);

// Throw OperatorMismatch if the record's operator (or its parameters) does
// not match the check.
MRVerdict check_ec(const MRCase& c);
MRVerdict check_er_r(const MRCase& c);
MRVerdict check_er_a(const MRCase& c);
MRVerdict check_ss(const MRCase& c);

// Dispatch on the record's operator. For combined operators the record is
// the second stage's record, so its own operator decides the relation.
MRVerdict check(const MRCase& c);

struct ErrorRates {
  double entity = 0.0;    // sum(p_e) / N
  double relation = 0.0;  // sum(p_r) / N
  size_t count = 0;
};

// Throws EmptyVerdictSet when verdicts is empty.
ErrorRates error_rates(std::span<const MRVerdict> verdicts);

struct MissCase {
  ClassSets input;     // classes in the prompt's pool
  ClassSets detected;  // classes detected in the generated image
};

struct MissRates {
  // Absent when the corpus-wide denominator is zero (reported, not divided).
  std::optional<double> entity;
  std::optional<double> relation;
  size_t entity_detected = 0, entity_total = 0;
  size_t relation_detected = 0, relation_total = 0;
};

// 1 - (sum over cases of |detected ∩ input|) / (sum of |input|), computed
// with corpus-summed denominators.
MissRates miss_rates(std::span<const MissCase> cases);
MissRates miss_rates(std::span<const std::pair<ERPool, DetectionResult>> cases);

}  // namespace t2imt

#endif  // T2IMT_MR_HPP_
