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
// Mutation operators over ER pools. Each operator produces a follow-up pool
// with a fixed density relationship to its seed:
//   ec   — entity change: one entity class swapped, density unchanged
//   er_r — triple removal: one triple removed, density - 1
//   er_a — triple augmentation: one triple added, density + 1
//   ss   — synonym substitution on the surface caption, pool unchanged
// Combined operators (ec+er_r, ec+er_a) apply ec first, then the second
// stage on the ec result.

#ifndef T2IMT_MUTATION_HPP_
#define T2IMT_MUTATION_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "t2imt/er.hpp"

namespace t2imt {

enum class Op {
  kSynonymSub,
  kEntityChange,
  kTripleRemoval,
  kTripleAugment,
  kChangeThenRemoval,
  kChangeThenAugment,
};

// Stable interface tokens used by configs, CLIs and reports.
std::string_view op_token(Op op);
std::optional<Op> op_from_token(std::string_view token);
constexpr bool is_combined(Op op) {
  return op == Op::kChangeThenRemoval || op == Op::kChangeThenAugment;
}
constexpr Op second_stage(Op op) {
  return op == Op::kChangeThenRemoval ? Op::kTripleRemoval : Op::kTripleAugment;
}
// Canonical report/column order.
std::span<const Op> all_ops();

struct WeightedEntity {
  EntityId entity;
  double weight = 1.0;
};

struct Attachment {
  RelationId predicate;
  EntityId entity;
  constexpr auto operator<=>(const Attachment&) const = default;
};

// Replacement entities and (predicate, entity) attachments available to the
// ec / er_a operators. Built from a corpus (entities by frequency,
// attachments from observed predicate-object pairs) or loaded from a file.
struct CandidatePool {
  std::vector<WeightedEntity> entities;   // sorted by id, weights > 0
  std::vector<Attachment> attachments;    // sorted, deduplicated

  static CandidatePool from_corpus(std::span<const SeedRecord> seeds, const Registry& reg);
  static CandidatePool from_json(const nlohmann::json& doc, const Registry& reg);
  static CandidatePool load(const std::filesystem::path& path, const Registry& reg);
  nlohmann::json to_json(const Registry& reg) const;
};

struct EcParams {
  EntityId replaced;     // e1: present in seed only
  EntityId replacement;  // e2: present in follow-up only
};
struct ErRParams {
  ERTriple removed;
};
struct ErAParams {
  ERTriple added;
};
struct SsParams {
  std::string original_word;
  std::string substitute;
  size_t occurrence = 0;  // index among lexicon hits, left to right
};
using MutationParams = std::variant<EcParams, ErRParams, ErAParams, SsParams>;

struct MutationRecord {
  ERPool seed_pool;
  Op op = Op::kEntityChange;
  MutationParams params;
  ERPool follow_pool;
  int seed_density = 0;
  int follow_density = 0;
  uint64_t rng_seed = 0;

  nlohmann::json to_json(const Registry& reg) const;
  static MutationRecord from_json(const nlohmann::json& doc, const Registry& reg);
};

// Substitutes one entity class everywhere it occurs. The replacement is
// sampled from the candidates excluding classes already in the pool (so the
// one-entity symmetric difference is well defined); weighted by candidate
// weight unless uniform_sampling is set.
// Errors: EmptyPool, NoEligibleReplacement.
MutationRecord mutate_ec(const ERPool& seed, const CandidatePool& cands, uint64_t rng_seed,
                         bool uniform_sampling = false);

// Removes one uniformly-chosen triple. Requires density > 1.
// Errors: InsufficientDensity.
MutationRecord mutate_er_r(const ERPool& seed, uint64_t rng_seed);

// Adds one sampled attachment anchored at a uniformly-chosen existing
// entity (for an empty pool the anchor is drawn from the candidate
// entities). Resamples duplicates up to max_retries.
// Errors: NoEligibleAugmentation.
MutationRecord mutate_er_a(const ERPool& seed, const CandidatePool& cands, uint64_t rng_seed,
                           int max_retries = 32);

struct SynonymLexicon {
  std::map<std::string, std::vector<std::string>> synonyms;  // word -> alternatives

  static SynonymLexicon from_json(const nlohmann::json& doc);
  static SynonymLexicon load(const std::filesystem::path& path);
};

struct SsResult {
  std::string caption;
  SsParams params;
};

// Replaces one lexicon word occurrence (uniform over occurrences, then
// uniform over its synonyms). Surface-level only; the caption's pool is
// untouched by construction.
// Errors: NoSubstitutableWord.
SsResult mutate_ss(const std::string& caption, const SynonymLexicon& lexicon, uint64_t rng_seed);

// ---------------------------------------------------------------------------
// Density-stratified aggregation. Scores are grouped by scenario density
// level; the per-level means are compared pairwise and any pair whose
// absolute difference reaches epsilon is flagged.

struct DensityScore {
  int level = 0;
  double score = 0.0;
};

struct DensityLevelStat {
  int level = 0;
  size_t count = 0;
  double mean = 0.0;
};

struct DensityPairDistance {
  int level_a = 0;
  int level_b = 0;
  double distance = 0.0;
  bool flagged = false;  // distance >= epsilon
};

struct DensityBreakdown {
  double epsilon = 0.0;
  std::vector<DensityLevelStat> levels;       // populated levels, ascending
  std::vector<DensityPairDistance> pairs;     // all pairs of populated levels
  std::vector<int> empty_levels;              // expected levels with no cases

  nlohmann::json to_json() const;
  static DensityBreakdown from_json(const nlohmann::json& doc);
};

DensityBreakdown stratify_by_density(std::span<const DensityScore> scores, double epsilon,
                                     std::span<const int> expected_levels = {});

}  // namespace t2imt

#endif  // T2IMT_MUTATION_HPP_
