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

#include "t2imt/mr.hpp"

#include "t2imt/error.hpp"

namespace t2imt {

namespace {

ClassSets intersect(const ClassSets& a, const ClassSets& b) {
  return {set_intersection(a.entities, b.entities), set_intersection(a.relations, b.relations)};
}

std::vector<EntityId> minus_one(const std::vector<EntityId>& s, EntityId e) {
  return set_difference(s, std::vector<EntityId>{e});
}

}  // namespace

MRVerdict check_ec_sets(const ClassSets& seed, const ClassSets& follow, EntityId replaced,
                        EntityId replacement) {
  if (replaced == replacement)
    raise(ErrorCode::kOperatorMismatch, "entity change requires distinct classes");
  MRVerdict v;
  v.common = intersect(seed, follow);
  v.seed_sets = seed;
  v.follow_sets = follow;

  if (v.common.entities != minus_one(seed.entities, replaced)) {
    v.entity_violation = true;
    v.violated_clauses.push_back("ec.entity.seed_minus_replaced");
  }
  if (v.common.entities != minus_one(follow.entities, replacement)) {
    v.entity_violation = true;
    v.violated_clauses.push_back("ec.entity.follow_minus_replacement");
  }
  if (v.common.relations != seed.relations) {
    v.relation_violation = true;
    v.violated_clauses.push_back("ec.relation.seed");
  }
  if (v.common.relations != follow.relations) {
    v.relation_violation = true;
    v.violated_clauses.push_back("ec.relation.follow");
  }
  return v;
}

MRVerdict check_er_r_sets(const ClassSets& seed, const ClassSets& follow) {
  MRVerdict v;
  v.common = intersect(seed, follow);
  v.seed_sets = seed;
  v.follow_sets = follow;
  if (v.common.entities != follow.entities) {
    v.entity_violation = true;
    v.violated_clauses.push_back("er_r.entity.follow_subset");
  }
  if (v.common.relations != follow.relations) {
    v.relation_violation = true;
    v.violated_clauses.push_back("er_r.relation.follow_subset");
  }
  return v;
}

MRVerdict check_er_a_sets(const ClassSets& seed, const ClassSets& follow) {
  MRVerdict v;
  v.common = intersect(seed, follow);
  v.seed_sets = seed;
  v.follow_sets = follow;
  if (v.common.entities != seed.entities) {
    v.entity_violation = true;
    v.violated_clauses.push_back("er_a.entity.seed_retained");
  }
  if (v.common.relations != seed.relations) {
    v.relation_violation = true;
    v.violated_clauses.push_back("er_a.relation.seed_retained");
  }
  return v;
}

MRVerdict check_ss_sets(const ClassSets& input_pool, const ClassSets& follow) {
  MRVerdict v;
  v.common = intersect(input_pool, follow);
  v.seed_sets = input_pool;
  v.follow_sets = follow;
  if (follow.entities != input_pool.entities) {
    v.entity_violation = true;
    v.violated_clauses.push_back("ss.entity.exact");
  }
  if (follow.relations != input_pool.relations) {
    v.relation_violation = true;
    v.violated_clauses.push_back("ss.relation.exact");
  }
  return v;
}

namespace {

void require_op(const MRCase& c, Op expected, const char* name) {
  if (c.record.op != expected)
    raise(ErrorCode::kOperatorMismatch, std::string(name) + " check on '" +
                                            std::string(op_token(c.record.op)) + "' record");
}

}  // namespace

MRVerdict check_ec(const MRCase& c) {
  require_op(c, Op::kEntityChange, "entity-change");
  const auto* params = std::get_if<EcParams>(&c.record.params);
  if (!params) raise(ErrorCode::kOperatorMismatch, "record lacks entity-change parameters");
  return check_ec_sets(to_er_sets(c.seed_detection), to_er_sets(c.follow_detection),
                       params->replaced, params->replacement);
}

MRVerdict check_er_r(const MRCase& c) {
  require_op(c, Op::kTripleRemoval, "triple-removal");
  return check_er_r_sets(to_er_sets(c.seed_detection), to_er_sets(c.follow_detection));
}

MRVerdict check_er_a(const MRCase& c) {
  require_op(c, Op::kTripleAugment, "triple-augment");
  return check_er_a_sets(to_er_sets(c.seed_detection), to_er_sets(c.follow_detection));
}

MRVerdict check_ss(const MRCase& c) {
  require_op(c, Op::kSynonymSub, "synonym-substitution");
  // ss leaves the pool untouched; the follow image must show exactly the
  // input pool's classes.
  return check_ss_sets(pool_class_sets(c.record.follow_pool), to_er_sets(c.follow_detection));
}

MRVerdict check(const MRCase& c) {
  switch (c.record.op) {
    case Op::kSynonymSub: return check_ss(c);
    case Op::kEntityChange: return check_ec(c);
    case Op::kTripleRemoval: return check_er_r(c);
    case Op::kTripleAugment: return check_er_a(c);
    default:
      raise(ErrorCode::kOperatorMismatch,
            "combined operator records must carry the second stage's record");
  }
}

nlohmann::json MRVerdict::to_json(const Registry& reg) const {
  nlohmann::json doc;
  doc["p_e"] = entity_violation;
  doc["p_r"] = relation_violation;
  doc["violated_clauses"] = violated_clauses;
  auto sets_json = [&reg](const ClassSets& s) {
    nlohmann::json j;
    auto& ents = j["entities"] = nlohmann::json::array();
    for (EntityId e : s.entities) ents.push_back(reg.entity(e).label);
    auto& rels = j["relations"] = nlohmann::json::array();
    for (RelationId r : s.relations) rels.push_back(reg.relation(r).label);
    return j;
  };
  doc["witness"] = {{"common", sets_json(common)},
                    {"seed", sets_json(seed_sets)},
                    {"follow", sets_json(follow_sets)}};
  return doc;
}

ErrorRates error_rates(std::span<const MRVerdict> verdicts) {
  if (verdicts.empty()) raise(ErrorCode::kEmptyVerdictSet, "no verdicts to aggregate");
  ErrorRates rates;
  rates.count = verdicts.size();
  size_t e = 0, r = 0;
  for (const auto& v : verdicts) {
    e += v.entity_violation ? 1 : 0;
    r += v.relation_violation ? 1 : 0;
  }
  rates.entity = static_cast<double>(e) / static_cast<double>(verdicts.size());
  rates.relation = static_cast<double>(r) / static_cast<double>(verdicts.size());
  return rates;
}

MissRates miss_rates(std::span<const MissCase> cases) {
  MissRates out;
  for (const auto& c : cases) {
    out.entity_total += c.input.entities.size();
    out.relation_total += c.input.relations.size();
    out.entity_detected += set_intersection(c.detected.entities, c.input.entities).size();
    out.relation_detected += set_intersection(c.detected.relations, c.input.relations).size();
  }
  if (out.entity_total > 0)
    out.entity = 1.0 - static_cast<double>(out.entity_detected) /
                           static_cast<double>(out.entity_total);
  if (out.relation_total > 0)
    out.relation = 1.0 - static_cast<double>(out.relation_detected) /
                             static_cast<double>(out.relation_total);
  return out;
}

MissRates miss_rates(std::span<const std::pair<ERPool, DetectionResult>> cases) {
  std::vector<MissCase> set_cases;
  set_cases.reserve(cases.size());
  for (const auto& [pool, detection] : cases)
    set_cases.push_back({pool_class_sets(pool), to_er_sets(detection)});
  return miss_rates(set_cases);
}

}  // namespace t2imt
