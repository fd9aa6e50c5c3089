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

#include "t2imt/er.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "t2imt/error.hpp"
#include "t2imt/util.hpp"

namespace t2imt {

namespace {

std::string canonical_key(std::string_view surface) { return to_lower(trim(surface)); }

size_t token_count(std::string_view s) { return tokenize_words(s).size(); }

}  // namespace

EntityId Registry::add_entity(std::string_view label) {
  std::string key = canonical_key(label);
  if (key.empty()) raise(ErrorCode::kInvalidInput, "empty entity label");
  if (auto it = entity_by_label_.find(key); it != entity_by_label_.end()) return it->second;
  if (entities_.size() >= limits_.max_entities) {
    raise(ErrorCode::kRegistryOverflow,
          "entity registry limit " + std::to_string(limits_.max_entities) + " exceeded");
  }
  EntityId id{static_cast<int>(entities_.size())};
  entities_.push_back({id, key});
  entity_by_label_.emplace(key, id);
  max_entity_tokens_ = std::max(max_entity_tokens_, token_count(key));
  return id;
}

RelationId Registry::add_relation(std::string_view label) {
  std::string key = canonical_key(label);
  if (key.empty()) raise(ErrorCode::kInvalidInput, "empty relation label");
  if (auto it = relation_by_label_.find(key); it != relation_by_label_.end()) return it->second;
  if (relations_.size() >= limits_.max_relations) {
    raise(ErrorCode::kRegistryOverflow,
          "relation registry limit " + std::to_string(limits_.max_relations) + " exceeded");
  }
  RelationId id{static_cast<int>(relations_.size())};
  relations_.push_back({id, key});
  relation_by_label_.emplace(key, id);
  max_relation_tokens_ = std::max(max_relation_tokens_, token_count(key));
  return id;
}

void Registry::add_entity_alias(std::string_view surface, std::string_view label) {
  std::string key = canonical_key(surface);
  if (key.empty()) raise(ErrorCode::kInvalidInput, "empty entity alias");
  auto target = find_entity(label);
  if (!target) raise(ErrorCode::kUnknownSurfaceForm, "alias target not registered: " + std::string(label));
  entity_aliases_[key] = *target;
  max_entity_tokens_ = std::max(max_entity_tokens_, token_count(key));
}

void Registry::add_relation_alias(std::string_view surface, std::string_view label) {
  std::string key = canonical_key(surface);
  if (key.empty()) raise(ErrorCode::kInvalidInput, "empty relation alias");
  auto target = find_relation(label);
  if (!target) raise(ErrorCode::kUnknownSurfaceForm, "alias target not registered: " + std::string(label));
  relation_aliases_[key] = *target;
  max_relation_tokens_ = std::max(max_relation_tokens_, token_count(key));
}

const EntityClass& Registry::entity(EntityId id) const {
  if (id.value < 0 || id.value >= static_cast<int>(entities_.size()))
    raise(ErrorCode::kInvalidInput, "entity id out of range");
  return entities_[static_cast<size_t>(id.value)];
}

const RelationClass& Registry::relation(RelationId id) const {
  if (id.value < 0 || id.value >= static_cast<int>(relations_.size()))
    raise(ErrorCode::kInvalidInput, "relation id out of range");
  return relations_[static_cast<size_t>(id.value)];
}

std::optional<EntityId> Registry::find_entity(std::string_view label) const {
  auto it = entity_by_label_.find(canonical_key(label));
  if (it == entity_by_label_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> Registry::find_relation(std::string_view label) const {
  auto it = relation_by_label_.find(canonical_key(label));
  if (it == relation_by_label_.end()) return std::nullopt;
  return it->second;
}

std::optional<EntityId> Registry::entity_alias(std::string_view surface) const {
  auto it = entity_aliases_.find(canonical_key(surface));
  if (it == entity_aliases_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> Registry::relation_alias(std::string_view surface) const {
  auto it = relation_aliases_.find(canonical_key(surface));
  if (it == relation_aliases_.end()) return std::nullopt;
  return it->second;
}

Registry Registry::from_json(const nlohmann::json& doc, RegistryLimits limits) {
  Registry reg(limits);
  if (!doc.contains("entities") || !doc.contains("relations"))
    raise(ErrorCode::kConfigError, "registry file needs 'entities' and 'relations'");
  for (const auto& e : doc.at("entities")) reg.add_entity(e.get<std::string>());
  for (const auto& r : doc.at("relations")) reg.add_relation(r.get<std::string>());
  if (doc.contains("entity_aliases")) {
    for (const auto& [surface, label] : doc.at("entity_aliases").items())
      reg.add_entity_alias(surface, label.get<std::string>());
  }
  if (doc.contains("relation_aliases")) {
    for (const auto& [surface, label] : doc.at("relation_aliases").items())
      reg.add_relation_alias(surface, label.get<std::string>());
  }
  return reg;
}

Registry Registry::load(const std::filesystem::path& path, RegistryLimits limits) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kConfigError, "registry " + path.string() + ": " + e.what());
  }
  return from_json(doc, limits);
}

nlohmann::json Registry::to_json() const {
  nlohmann::json doc;
  doc["version"] = 1;
  auto& ents = doc["entities"] = nlohmann::json::array();
  for (const auto& e : entities_) ents.push_back(e.label);
  auto& rels = doc["relations"] = nlohmann::json::array();
  for (const auto& r : relations_) rels.push_back(r.label);
  auto& ea = doc["entity_aliases"] = nlohmann::json::object();
  for (const auto& [surface, id] : entity_aliases_) ea[surface] = entity(id).label;
  auto& ra = doc["relation_aliases"] = nlohmann::json::object();
  for (const auto& [surface, id] : relation_aliases_) ra[surface] = relation(id).label;
  return doc;
}

std::optional<EntityId> canonicalize_entity(std::string_view surface, const Registry& reg,
                                            bool strict) {
  if (trim(surface).empty()) raise(ErrorCode::kInvalidInput, "empty surface form");
  if (auto id = reg.entity_alias(surface)) return id;
  if (auto id = reg.find_entity(surface)) return id;
  if (strict) raise(ErrorCode::kUnknownSurfaceForm, "entity '" + std::string(surface) + "'");
  return std::nullopt;
}

std::optional<RelationId> canonicalize_relation(std::string_view surface, const Registry& reg,
                                                bool strict) {
  if (trim(surface).empty()) raise(ErrorCode::kInvalidInput, "empty surface form");
  if (auto id = reg.relation_alias(surface)) return id;
  if (auto id = reg.find_relation(surface)) return id;
  if (strict) raise(ErrorCode::kUnknownSurfaceForm, "relation '" + std::string(surface) + "'");
  return std::nullopt;
}

ERPool ERPool::from_triples(std::string caption, std::vector<ERTriple> triples) {
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  ERPool pool;
  pool.caption_ = std::move(caption);
  pool.triples_ = std::move(triples);
  for (const auto& t : pool.triples_) {
    pool.entity_set_.push_back(t.subject);
    pool.entity_set_.push_back(t.object);
    pool.relation_set_.push_back(t.predicate);
  }
  auto dedup = [](auto& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedup(pool.entity_set_);
  dedup(pool.relation_set_);
  return pool;
}

bool ERPool::contains(const ERTriple& t) const {
  auto it = std::lower_bound(triples_.begin(), triples_.end(), t);
  return it != triples_.end() && *it == t;
}

nlohmann::json ERPool::to_json(const Registry& reg) const {
  nlohmann::json doc;
  doc["caption"] = caption_;
  auto& arr = doc["triples"] = nlohmann::json::array();
  for (const auto& t : triples_) {
    arr.push_back({reg.entity(t.subject).label, reg.relation(t.predicate).label,
                   reg.entity(t.object).label});
  }
  return doc;
}

ERPool ERPool::from_json(const nlohmann::json& doc, const Registry& reg) {
  std::vector<ERTriple> triples;
  if (doc.contains("triples")) {
    for (const auto& t : doc.at("triples")) {
      auto subj = canonicalize_entity(t[0].get<std::string>(), reg, true);
      auto pred = canonicalize_relation(t[1].get<std::string>(), reg, true);
      auto obj = canonicalize_entity(t[2].get<std::string>(), reg, true);
      triples.push_back({*subj, *pred, *obj});
    }
  }
  return from_triples(doc.value("caption", std::string{}), std::move(triples));
}

PoolBuild build_pool(const std::string& caption, std::span<const SurfaceTriple> triples,
                     const Registry& reg, bool strict) {
  PoolBuild out;
  std::vector<ERTriple> canonical;
  for (const auto& st : triples) {
    std::optional<EntityId> subj, obj;
    std::optional<RelationId> pred;
    TripleIssue issue{st, "", ""};
    try {
      subj = canonicalize_entity(st.subject, reg, false);
      if (!subj) issue = {st, st.subject, "unknown entity surface form"};
      pred = canonicalize_relation(st.predicate, reg, false);
      if (subj && !pred) issue = {st, st.predicate, "unknown relation surface form"};
      obj = canonicalize_entity(st.object, reg, false);
      if (subj && pred && !obj) issue = {st, st.object, "unknown entity surface form"};
    } catch (const Error& e) {
      issue = {st, "", e.what()};
    }
    if (subj && pred && obj) {
      canonical.push_back({*subj, *pred, *obj});
    } else {
      out.issues.push_back(std::move(issue));
    }
  }
  if (strict && !out.issues.empty()) {
    std::ostringstream msg;
    msg << out.issues.size() << " triple(s) failed canonicalization:";
    for (const auto& i : out.issues) {
      msg << " (" << i.triple.subject << "," << i.triple.predicate << "," << i.triple.object
          << "): " << i.reason << ";";
    }
    raise(ErrorCode::kUnknownSurfaceForm, msg.str());
  }
  out.pool = ERPool::from_triples(caption, std::move(canonical));
  return out;
}

namespace {

// Longest alias/label match starting at tokens[pos]; returns matched token
// count (0 = no match) and the matched surface text.
template <typename Lookup>
size_t longest_match(const std::vector<std::string>& tokens, size_t pos, size_t max_len,
                     const Lookup& lookup, std::string* matched_surface) {
  size_t limit = std::min(max_len, tokens.size() - pos);
  for (size_t len = limit; len >= 1; --len) {
    std::string candidate = tokens[pos];
    for (size_t k = 1; k < len; ++k) candidate += " " + tokens[pos + k];
    if (lookup(candidate)) {
      *matched_surface = std::move(candidate);
      return len;
    }
  }
  return 0;
}

}  // namespace

std::vector<SurfaceTriple> naive_extract(const std::string& caption, const Registry& reg) {
  std::vector<std::string> tokens = tokenize_words(caption);
  struct Mention {
    std::string surface;
    size_t begin;  // token index
    size_t end;    // one past last token
  };
  std::vector<Mention> mentions;
  auto is_entity = [&](const std::string& s) {
    return reg.entity_alias(s).has_value() || reg.find_entity(s).has_value();
  };
  size_t i = 0;
  while (i < tokens.size()) {
    std::string surface;
    size_t len = longest_match(tokens, i, reg.max_entity_tokens(), is_entity, &surface);
    if (len > 0) {
      mentions.push_back({std::move(surface), i, i + len});
      i += len;
    } else {
      ++i;
    }
  }

  std::vector<SurfaceTriple> out;
  auto is_relation = [&](const std::string& s) {
    return reg.relation_alias(s).has_value() || reg.find_relation(s).has_value();
  };
  for (size_t m = 0; m + 1 < mentions.size(); ++m) {
    size_t gap_begin = mentions[m].end;
    size_t gap_end = mentions[m + 1].begin;
    // Leftmost-longest relation match inside the gap.
    for (size_t pos = gap_begin; pos < gap_end; ++pos) {
      std::string rel_surface;
      size_t limit = std::min(reg.max_relation_tokens(), gap_end - pos);
      size_t len = 0;
      for (size_t l = limit; l >= 1; --l) {
        std::string candidate = tokens[pos];
        for (size_t k = 1; k < l; ++k) candidate += " " + tokens[pos + k];
        if (is_relation(candidate)) {
          rel_surface = std::move(candidate);
          len = l;
          break;
        }
      }
      if (len > 0) {
        out.push_back({mentions[m].surface, rel_surface, mentions[m + 1].surface});
        break;
      }
    }
  }
  return out;
}

std::vector<SeedRecord> load_seed_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::kIoError, "cannot open seed corpus " + path.string());
  std::vector<SeedRecord> seeds;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorCode::kConfigError,
            path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    SeedRecord rec;
    if (doc.contains("id") && doc.at("id").is_string()) rec.id = doc.at("id").get<std::string>();
    else rec.id = "seed-" + std::to_string(lineno);
    rec.caption = doc.value("caption", std::string{});
    if (doc.contains("triples")) {
      for (const auto& t : doc.at("triples")) {
        if (!t.is_array() || t.size() != 3)
          raise(ErrorCode::kConfigError, path.string() + ":" + std::to_string(lineno) +
                                             ": triple must be [subject, predicate, object]");
        rec.triples.push_back({t[0].get<std::string>(), t[1].get<std::string>(),
                               t[2].get<std::string>()});
      }
    }
    seeds.push_back(std::move(rec));
  }
  return seeds;
}

}  // namespace t2imt
