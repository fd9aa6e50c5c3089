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
// Canonical entity/relation data model. A caption's scene content is held
// as a pool of (subject, predicate, object) class triples; every downstream
// stage (mutation, synthesis, consistency checks) works on these pools.

#ifndef T2IMT_ER_HPP_
#define T2IMT_ER_HPP_

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace t2imt {

struct EntityId {
  int value = -1;
  constexpr auto operator<=>(const EntityId&) const = default;
};

struct RelationId {
  int value = -1;
  constexpr auto operator<=>(const RelationId&) const = default;
};

struct EntityClass {
  EntityId id;
  std::string label;  // canonical: lowercase, trimmed, unique
};

struct RelationClass {
  RelationId id;
  std::string label;
};

// A triple as it appears in input data, before canonicalization.
struct SurfaceTriple {
  std::string subject;
  std::string predicate;
  std::string object;
};

struct ERTriple {
  EntityId subject;
  RelationId predicate;
  EntityId object;
  constexpr auto operator<=>(const ERTriple&) const = default;
};

struct RegistryLimits {
  size_t max_entities = 150;
  size_t max_relations = 50;
};

// Class registry plus surface-form alias tables. Immutable once built:
// construct via from_json/load (or add_* during setup), then share as const.
class Registry {
 public:
  explicit Registry(RegistryLimits limits = {}) : limits_(limits) {}

  static Registry from_json(const nlohmann::json& doc, RegistryLimits limits = {});
  static Registry load(const std::filesystem::path& path, RegistryLimits limits = {});

  EntityId add_entity(std::string_view label);
  RelationId add_relation(std::string_view label);
  void add_entity_alias(std::string_view surface, std::string_view label);
  void add_relation_alias(std::string_view surface, std::string_view label);

  const EntityClass& entity(EntityId id) const;
  const RelationClass& relation(RelationId id) const;
  size_t entity_count() const { return entities_.size(); }
  size_t relation_count() const { return relations_.size(); }

  std::optional<EntityId> find_entity(std::string_view label) const;
  std::optional<RelationId> find_relation(std::string_view label) const;
  // Alias lookup only (no exact-label fallback).
  std::optional<EntityId> entity_alias(std::string_view surface) const;
  std::optional<RelationId> relation_alias(std::string_view surface) const;

  // Longest alias/label length, in word tokens. Bounds extractor lookahead.
  size_t max_entity_tokens() const { return max_entity_tokens_; }
  size_t max_relation_tokens() const { return max_relation_tokens_; }

  nlohmann::json to_json() const;

 private:
  RegistryLimits limits_;
  std::vector<EntityClass> entities_;
  std::vector<RelationClass> relations_;
  std::map<std::string, EntityId, std::less<>> entity_by_label_;
  std::map<std::string, RelationId, std::less<>> relation_by_label_;
  std::map<std::string, EntityId, std::less<>> entity_aliases_;
  std::map<std::string, RelationId, std::less<>> relation_aliases_;
  size_t max_entity_tokens_ = 1;
  size_t max_relation_tokens_ = 1;
};

enum class SurfaceKind { kEntity, kRelation };

// Maps a surface form to its registered class. Alias table first; an exact
// label match is accepted as already canonical. Unknown surfaces return
// nullopt, or throw UnknownSurfaceForm in strict mode. Empty input throws
// InvalidInput. Matching is case-insensitive.
std::optional<EntityId> canonicalize_entity(std::string_view surface, const Registry& reg,
                                            bool strict = false);
std::optional<RelationId> canonicalize_relation(std::string_view surface, const Registry& reg,
                                                bool strict = false);

// The canonical set of triples for one caption. Triples are deduplicated and
// kept sorted by (subject, predicate, object) ids; entity_set/relation_set
// are always the projections of the stored triples. Immutable.
class ERPool {
 public:
  ERPool() = default;
  static ERPool from_triples(std::string caption, std::vector<ERTriple> triples);

  const std::vector<ERTriple>& triples() const { return triples_; }
  const std::vector<EntityId>& entity_set() const { return entity_set_; }
  const std::vector<RelationId>& relation_set() const { return relation_set_; }
  const std::string& source_caption() const { return caption_; }
  int density() const { return static_cast<int>(triples_.size()); }
  bool empty() const { return triples_.empty(); }
  bool contains(const ERTriple& t) const;

  // Semantic identity: same canonical triples. Captions are provenance
  // metadata and do not participate.
  bool operator==(const ERPool& other) const { return triples_ == other.triples_; }

  nlohmann::json to_json(const Registry& reg) const;
  static ERPool from_json(const nlohmann::json& doc, const Registry& reg);

 private:
  std::string caption_;
  std::vector<ERTriple> triples_;
  std::vector<EntityId> entity_set_;
  std::vector<RelationId> relation_set_;
};

struct TripleIssue {
  SurfaceTriple triple;
  std::string surface;  // the member that failed
  std::string reason;
};

struct PoolBuild {
  ERPool pool;
  std::vector<TripleIssue> issues;  // uncanonicalized members (non-strict mode)
};

// Canonicalizes pre-extracted surface triples into a pool. Strict mode
// throws UnknownSurfaceForm carrying a per-triple report; otherwise
// offending triples are dropped and reported in issues.
PoolBuild build_pool(const std::string& caption, std::span<const SurfaceTriple> triples,
                     const Registry& reg, bool strict = false);

// Greedy pattern extractor: longest-match alias scan for entity mentions,
// then a relation alias between each pair of adjacent mentions. Left to
// right, deterministic, never errors. Returns surface forms as matched.
std::vector<SurfaceTriple> naive_extract(const std::string& caption, const Registry& reg);

struct SeedRecord {
  std::string id;
  std::string caption;
  std::vector<SurfaceTriple> triples;
};

// Line-delimited JSON, one record per caption:
//   {"id": ..., "caption": ..., "triples": [[subj, pred, obj], ...]}
std::vector<SeedRecord> load_seed_corpus(const std::filesystem::path& path);

// Sorted-set helpers shared by the consistency checks.
template <typename T>
std::vector<T> set_intersection(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  auto ia = a.begin(), ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else { out.push_back(*ia); ++ia; ++ib; }
  }
  return out;
}

template <typename T>
std::vector<T> set_difference(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  auto ia = a.begin(), ib = b.begin();
  while (ia != a.end()) {
    if (ib == b.end() || *ia < *ib) { out.push_back(*ia); ++ia; }
    else if (*ib < *ia) ++ib;
    else { ++ia; ++ib; }
  }
  return out;
}

template <typename T>
bool set_contains(const std::vector<T>& sorted, const T& v) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
  return it != sorted.end() && *it == v;
}

}  // namespace t2imt

#endif  // T2IMT_ER_HPP_
