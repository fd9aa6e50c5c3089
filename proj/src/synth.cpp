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

#include "t2imt/synth.hpp"

#include "t2imt/error.hpp"
#include "t2imt/util.hpp"

namespace t2imt {

TemplateSet TemplateSet::from_json(const nlohmann::json& doc) {
  TemplateSet t;
  t.triple_template = doc.value("triple_template", t.triple_template);
  t.joiner = doc.value("joiner", t.joiner);
  t.default_article = doc.value("default_article", t.default_article);
  t.empty_fallback = doc.value("empty_fallback", t.empty_fallback);
  if (doc.contains("article_overrides")) {
    for (const auto& [label, article] : doc.at("article_overrides").items())
      t.article_overrides[to_lower(label)] = article.get<std::string>();
  }
  return t;
}

TemplateSet TemplateSet::load(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kConfigError, "template file " + path.string() + ": " + e.what());
  }
}

nlohmann::json TemplateSet::to_json() const {
  nlohmann::json doc;
  doc["triple_template"] = triple_template;
  doc["joiner"] = joiner;
  doc["default_article"] = default_article;
  doc["empty_fallback"] = empty_fallback;
  doc["article_overrides"] = article_overrides;
  return doc;
}

namespace {

bool starts_with_vowel(const std::string& word) {
  if (word.empty()) return false;
  char c = word.front();
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

std::string noun_phrase(const std::string& label, const TemplateSet& t) {
  std::string article = t.default_article;
  if (auto it = t.article_overrides.find(label); it != t.article_overrides.end())
    article = it->second;
  if (article.empty()) return label;
  if (article == "a") article = starts_with_vowel(label) ? "an" : "a";
  return article + " " + label;
}

}  // namespace

std::string render(const ERPool& pool, const TemplateSet& templates, const Registry& reg) {
  if (pool.empty()) {
    return templates.empty_fallback == "caption" ? pool.source_caption()
                                                 : templates.empty_fallback;
  }
  std::string out;
  bool first = true;
  for (const auto& triple : pool.triples()) {
    std::string clause;
    const std::string& tpl = templates.triple_template;
    size_t i = 0;
    while (i < tpl.size()) {
      if (tpl[i] == '{') {
        size_t close = tpl.find('}', i);
        if (close == std::string::npos)
          raise(ErrorCode::kUnknownTemplateSlot, "unterminated slot in triple_template");
        std::string slot = tpl.substr(i + 1, close - i - 1);
        if (slot == "subject") {
          clause += noun_phrase(reg.entity(triple.subject).label, templates);
        } else if (slot == "object") {
          clause += noun_phrase(reg.entity(triple.object).label, templates);
        } else if (slot == "predicate") {
          clause += reg.relation(triple.predicate).label;
        } else {
          raise(ErrorCode::kUnknownTemplateSlot, "slot '" + slot + "'");
        }
        i = close + 1;
      } else {
        clause.push_back(tpl[i]);
        ++i;
      }
    }
    if (!first) out += templates.joiner;
    out += clause;
    first = false;
  }
  return out;
}

}  // namespace t2imt
