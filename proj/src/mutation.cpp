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

#include "t2imt/mutation.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "t2imt/error.hpp"
#include "t2imt/rng.hpp"
#include "t2imt/util.hpp"

namespace t2imt {

namespace {

constexpr std::array<Op, 6> kAllOps = {
    Op::kSynonymSub,       Op::kTripleRemoval,     Op::kTripleAugment,
    Op::kEntityChange,     Op::kChangeThenRemoval, Op::kChangeThenAugment,
};

}  // namespace

std::string_view op_token(Op op) {
  switch (op) {
    case Op::kSynonymSub: return "ss";
    case Op::kEntityChange: return "ec";
    case Op::kTripleRemoval: return "er_r";
    case Op::kTripleAugment: return "er_a";
    case Op::kChangeThenRemoval: return "ec+er_r";
    case Op::kChangeThenAugment: return "ec+er_a";
  }
  return "?";
}

std::optional<Op> op_from_token(std::string_view token) {
  for (Op op : kAllOps)
    if (op_token(op) == token) return op;
  return std::nullopt;
}

std::span<const Op> all_ops() { return kAllOps; }

CandidatePool CandidatePool::from_corpus(std::span<const SeedRecord> seeds, const Registry& reg) {
  std::map<EntityId, double> freq;
  std::vector<Attachment> attachments;
  for (const auto& seed : seeds) {
    for (const auto& st : seed.triples) {
      auto subj = canonicalize_entity(st.subject, reg, false);
      auto pred = canonicalize_relation(st.predicate, reg, false);
      auto obj = canonicalize_entity(st.object, reg, false);
      if (subj) freq[*subj] += 1.0;
      if (obj) freq[*obj] += 1.0;
      if (pred && obj) attachments.push_back({*pred, *obj});
    }
  }
  CandidatePool pool;
  for (const auto& [id, weight] : freq) pool.entities.push_back({id, weight});
  std::sort(attachments.begin(), attachments.end());
  attachments.erase(std::unique(attachments.begin(), attachments.end()), attachments.end());
  pool.attachments = std::move(attachments);
  return pool;
}

CandidatePool CandidatePool::from_json(const nlohmann::json& doc, const Registry& reg) {
  CandidatePool pool;
  if (doc.contains("entities")) {
    for (const auto& e : doc.at("entities")) {
      std::string label = e.at("label").get<std::string>();
      double weight = e.value("weight", 1.0);
      if (weight <= 0) raise(ErrorCode::kConfigError, "candidate weight must be > 0: " + label);
      auto id = canonicalize_entity(label, reg, true);
      pool.entities.push_back({*id, weight});
    }
  }
  if (doc.contains("attachments")) {
    for (const auto& a : doc.at("attachments")) {
      if (!a.is_array() || a.size() != 2)
        raise(ErrorCode::kConfigError, "attachment must be [predicate, entity]");
      auto pred = canonicalize_relation(a[0].get<std::string>(), reg, true);
      auto ent = canonicalize_entity(a[1].get<std::string>(), reg, true);
      pool.attachments.push_back({*pred, *ent});
    }
  }
  std::sort(pool.entities.begin(), pool.entities.end(),
            [](const WeightedEntity& a, const WeightedEntity& b) { return a.entity < b.entity; });
  std::sort(pool.attachments.begin(), pool.attachments.end());
  pool.attachments.erase(std::unique(pool.attachments.begin(), pool.attachments.end()),
                         pool.attachments.end());
  return pool;
}

CandidatePool CandidatePool::load(const std::filesystem::path& path, const Registry& reg) {
  try {
    return from_json(nlohmann::json::parse(read_file(path)), reg);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kConfigError, "candidate file " + path.string() + ": " + e.what());
  }
}

nlohmann::json CandidatePool::to_json(const Registry& reg) const {
  nlohmann::json doc;
  auto& ents = doc["entities"] = nlohmann::json::array();
  for (const auto& e : entities)
    ents.push_back({{"label", reg.entity(e.entity).label}, {"weight", e.weight}});
  auto& atts = doc["attachments"] = nlohmann::json::array();
  for (const auto& a : attachments)
    atts.push_back({reg.relation(a.predicate).label, reg.entity(a.entity).label});
  return doc;
}

nlohmann::json MutationRecord::to_json(const Registry& reg) const {
  nlohmann::json doc;
  doc["op"] = std::string(op_token(op));
  doc["seed_pool"] = seed_pool.to_json(reg);
  doc["follow_pool"] = follow_pool.to_json(reg);
  doc["seed_density"] = seed_density;
  doc["follow_density"] = follow_density;
  doc["rng_seed"] = rng_seed;
  nlohmann::json p;
  if (const auto* ec = std::get_if<EcParams>(&params)) {
    p["replaced"] = reg.entity(ec->replaced).label;
    p["replacement"] = reg.entity(ec->replacement).label;
  } else if (const auto* rr = std::get_if<ErRParams>(&params)) {
    p["removed"] = {reg.entity(rr->removed.subject).label,
                    reg.relation(rr->removed.predicate).label,
                    reg.entity(rr->removed.object).label};
  } else if (const auto* ra = std::get_if<ErAParams>(&params)) {
    p["added"] = {reg.entity(ra->added.subject).label, reg.relation(ra->added.predicate).label,
                  reg.entity(ra->added.object).label};
  } else if (const auto* ss = std::get_if<SsParams>(&params)) {
    p["original_word"] = ss->original_word;
    p["substitute"] = ss->substitute;
    p["occurrence"] = ss->occurrence;
  }
  doc["params"] = std::move(p);
  return doc;
}

MutationRecord MutationRecord::from_json(const nlohmann::json& doc, const Registry& reg) {
  MutationRecord rec;
  auto op = op_from_token(doc.at("op").get<std::string>());
  if (!op) raise(ErrorCode::kConfigError, "unknown operator token in record");
  rec.op = *op;
  rec.seed_pool = ERPool::from_json(doc.at("seed_pool"), reg);
  rec.follow_pool = ERPool::from_json(doc.at("follow_pool"), reg);
  rec.seed_density = doc.value("seed_density", rec.seed_pool.density());
  rec.follow_density = doc.value("follow_density", rec.follow_pool.density());
  rec.rng_seed = doc.value("rng_seed", 0ull);
  const auto& p = doc.at("params");
  switch (rec.op) {
    case Op::kEntityChange:
      rec.params = EcParams{*canonicalize_entity(p.at("replaced").get<std::string>(), reg, true),
                            *canonicalize_entity(p.at("replacement").get<std::string>(), reg, true)};
      break;
    case Op::kTripleRemoval: {
      const auto& t = p.at("removed");
      rec.params = ErRParams{{*canonicalize_entity(t[0].get<std::string>(), reg, true),
                              *canonicalize_relation(t[1].get<std::string>(), reg, true),
                              *canonicalize_entity(t[2].get<std::string>(), reg, true)}};
      break;
    }
    case Op::kTripleAugment: {
      const auto& t = p.at("added");
      rec.params = ErAParams{{*canonicalize_entity(t[0].get<std::string>(), reg, true),
                              *canonicalize_relation(t[1].get<std::string>(), reg, true),
                              *canonicalize_entity(t[2].get<std::string>(), reg, true)}};
      break;
    }
    case Op::kSynonymSub:
      rec.params = SsParams{p.value("original_word", std::string{}),
                            p.value("substitute", std::string{}),
                            p.value("occurrence", size_t{0})};
      break;
    default:
      raise(ErrorCode::kConfigError, "combined operators persist their stage records");
  }
  return rec;
}

MutationRecord mutate_ec(const ERPool& seed, const CandidatePool& cands, uint64_t rng_seed,
                         bool uniform_sampling) {
  if (seed.empty()) raise(ErrorCode::kEmptyPool, "ec needs a non-empty seed pool");
  Rng rng(rng_seed);

  const auto& entities = seed.entity_set();
  EntityId replaced = entities[rng.uniform_index(entities.size())];

  std::vector<WeightedEntity> eligible;
  for (const auto& cand : cands.entities) {
    if (!set_contains(entities, cand.entity)) eligible.push_back(cand);
  }
  if (eligible.empty())
    raise(ErrorCode::kNoEligibleReplacement, "every candidate entity is already in the pool");

  EntityId replacement;
  if (uniform_sampling) {
    replacement = eligible[rng.uniform_index(eligible.size())].entity;
  } else {
    double total = 0;
    for (const auto& c : eligible) total += c.weight;
    double draw = rng.uniform01() * total;
    double acc = 0;
    replacement = eligible.back().entity;
    for (const auto& c : eligible) {
      acc += c.weight;
      if (draw < acc) {
        replacement = c.entity;
        break;
      }
    }
  }

  std::vector<ERTriple> follow;
  follow.reserve(seed.triples().size());
  for (ERTriple t : seed.triples()) {
    if (t.subject == replaced) t.subject = replacement;
    if (t.object == replaced) t.object = replacement;
    follow.push_back(t);
  }

  MutationRecord rec;
  rec.seed_pool = seed;
  rec.op = Op::kEntityChange;
  rec.params = EcParams{replaced, replacement};
  rec.follow_pool = ERPool::from_triples(seed.source_caption(), std::move(follow));
  rec.seed_density = seed.density();
  rec.follow_density = rec.follow_pool.density();
  rec.rng_seed = rng_seed;
  return rec;
}

MutationRecord mutate_er_r(const ERPool& seed, uint64_t rng_seed) {
  if (seed.density() <= 1)
    raise(ErrorCode::kInsufficientDensity,
          "removal needs density > 1, got " + std::to_string(seed.density()));
  Rng rng(rng_seed);
  size_t idx = rng.uniform_index(seed.triples().size());
  ERTriple removed = seed.triples()[idx];

  std::vector<ERTriple> follow;
  follow.reserve(seed.triples().size() - 1);
  for (size_t i = 0; i < seed.triples().size(); ++i)
    if (i != idx) follow.push_back(seed.triples()[i]);

  MutationRecord rec;
  rec.seed_pool = seed;
  rec.op = Op::kTripleRemoval;
  rec.params = ErRParams{removed};
  rec.follow_pool = ERPool::from_triples(seed.source_caption(), std::move(follow));
  rec.seed_density = seed.density();
  rec.follow_density = rec.follow_pool.density();
  rec.rng_seed = rng_seed;
  return rec;
}

MutationRecord mutate_er_a(const ERPool& seed, const CandidatePool& cands, uint64_t rng_seed,
                           int max_retries) {
  if (cands.attachments.empty())
    raise(ErrorCode::kNoEligibleAugmentation, "candidate attachment list is empty");
  Rng rng(rng_seed);

  ERTriple added{};
  bool found = false;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    const Attachment& att = cands.attachments[rng.uniform_index(cands.attachments.size())];
    EntityId anchor;
    if (seed.empty()) {
      if (cands.entities.empty())
        raise(ErrorCode::kNoEligibleAugmentation, "empty pool and no candidate anchor entities");
      anchor = cands.entities[rng.uniform_index(cands.entities.size())].entity;
    } else {
      anchor = seed.entity_set()[rng.uniform_index(seed.entity_set().size())];
    }
    ERTriple candidate{anchor, att.predicate, att.entity};
    if (!seed.contains(candidate)) {
      added = candidate;
      found = true;
      break;
    }
  }
  if (!found)
    raise(ErrorCode::kNoEligibleAugmentation,
          "no non-duplicate augmentation found in " + std::to_string(max_retries) + " tries");

  std::vector<ERTriple> follow(seed.triples());
  follow.push_back(added);

  MutationRecord rec;
  rec.seed_pool = seed;
  rec.op = Op::kTripleAugment;
  rec.params = ErAParams{added};
  rec.follow_pool = ERPool::from_triples(seed.source_caption(), std::move(follow));
  rec.seed_density = seed.density();
  rec.follow_density = rec.follow_pool.density();
  rec.rng_seed = rng_seed;
  return rec;
}

SynonymLexicon SynonymLexicon::from_json(const nlohmann::json& doc) {
  SynonymLexicon lex;
  for (const auto& [word, syns] : doc.items()) {
    std::vector<std::string> list;
    for (const auto& s : syns) list.push_back(to_lower(s.get<std::string>()));
    if (!list.empty()) lex.synonyms[to_lower(word)] = std::move(list);
  }
  return lex;
}

SynonymLexicon SynonymLexicon::load(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kConfigError, "synonym file " + path.string() + ": " + e.what());
  }
}

SsResult mutate_ss(const std::string& caption, const SynonymLexicon& lexicon, uint64_t rng_seed) {
  // Word occurrences are located on the raw caption so the replacement can
  // splice without disturbing the surrounding text.
  struct Hit {
    size_t begin, length;
    std::string word;
  };
  std::vector<Hit> hits;
  size_t i = 0;
  while (i < caption.size()) {
    if (std::isalnum(static_cast<unsigned char>(caption[i]))) {
      size_t begin = i;
      while (i < caption.size() && std::isalnum(static_cast<unsigned char>(caption[i]))) ++i;
      std::string word = to_lower(std::string_view(caption).substr(begin, i - begin));
      if (lexicon.synonyms.count(word)) hits.push_back({begin, i - begin, word});
    } else {
      ++i;
    }
  }
  if (hits.empty())
    raise(ErrorCode::kNoSubstitutableWord, "no lexicon word found in caption");

  Rng rng(rng_seed);
  size_t pick = rng.uniform_index(hits.size());
  const Hit& hit = hits[pick];
  const auto& syns = lexicon.synonyms.at(hit.word);
  const std::string& substitute = syns[rng.uniform_index(syns.size())];

  std::string mutated = caption.substr(0, hit.begin) + substitute +
                        caption.substr(hit.begin + hit.length);
  return {std::move(mutated), SsParams{hit.word, substitute, pick}};
}

DensityBreakdown stratify_by_density(std::span<const DensityScore> scores, double epsilon,
                                     std::span<const int> expected_levels) {
  std::map<int, std::pair<size_t, double>> acc;  // level -> (count, sum)
  for (const auto& s : scores) {
    auto& slot = acc[s.level];
    slot.first += 1;
    slot.second += s.score;
  }
  DensityBreakdown out;
  out.epsilon = epsilon;
  for (const auto& [level, slot] : acc)
    out.levels.push_back({level, slot.first, slot.second / static_cast<double>(slot.first)});
  for (int expected : expected_levels)
    if (!acc.count(expected)) out.empty_levels.push_back(expected);
  std::sort(out.empty_levels.begin(), out.empty_levels.end());
  for (size_t a = 0; a < out.levels.size(); ++a) {
    for (size_t b = a + 1; b < out.levels.size(); ++b) {
      double d = std::abs(out.levels[a].mean - out.levels[b].mean);
      out.pairs.push_back({out.levels[a].level, out.levels[b].level, d, d >= epsilon});
    }
  }
  return out;
}

nlohmann::json DensityBreakdown::to_json() const {
  nlohmann::json doc;
  doc["epsilon"] = epsilon;
  auto& lv = doc["levels"] = nlohmann::json::array();
  for (const auto& l : levels)
    lv.push_back({{"level", l.level}, {"count", l.count}, {"mean", l.mean}});
  auto& pr = doc["pairs"] = nlohmann::json::array();
  for (const auto& p : pairs)
    pr.push_back({{"level_a", p.level_a},
                  {"level_b", p.level_b},
                  {"distance", p.distance},
                  {"flagged", p.flagged}});
  doc["empty_levels"] = empty_levels;
  return doc;
}

DensityBreakdown DensityBreakdown::from_json(const nlohmann::json& doc) {
  DensityBreakdown out;
  out.epsilon = doc.value("epsilon", 0.0);
  if (doc.contains("levels")) {
    for (const auto& l : doc.at("levels"))
      out.levels.push_back({l.at("level").get<int>(), l.at("count").get<size_t>(),
                            l.at("mean").get<double>()});
  }
  if (doc.contains("pairs")) {
    for (const auto& p : doc.at("pairs"))
      out.pairs.push_back({p.at("level_a").get<int>(), p.at("level_b").get<int>(),
                           p.at("distance").get<double>(), p.at("flagged").get<bool>()});
  }
  if (doc.contains("empty_levels"))
    out.empty_levels = doc.at("empty_levels").get<std::vector<int>>();
  return out;
}

}  // namespace t2imt
