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

#ifndef T2IMT_SYNTH_HPP_
#define T2IMT_SYNTH_HPP_

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "t2imt/er.hpp"

namespace t2imt {

// Deterministic prompt rendering. Triples are rendered in canonical pool
// order with {subject} {predicate} {object} slots and joined; noun phrases
// take an article ("a"/"an" by vowel, overridable per class, "" for mass
// nouns). Rendering adds no style or scene description beyond the pool.
struct TemplateSet {
  std::string triple_template = "{subject} {predicate} {object}";
  std::string joiner = " and ";
  std::string default_article = "a";  // "a" = indefinite with vowel rule; "" = bare; any other literal
  std::map<std::string, std::string> article_overrides;  // class label -> article literal ("" = bare)
  // Rendering of an empty pool: "caption" falls back to the source caption,
  // anything else is emitted literally.
  std::string empty_fallback = "caption";

  static TemplateSet from_json(const nlohmann::json& doc);
  static TemplateSet load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

// Throws UnknownTemplateSlot if triple_template references a slot other
// than subject/predicate/object.
std::string render(const ERPool& pool, const TemplateSet& templates, const Registry& reg);

}  // namespace t2imt

#endif  // T2IMT_SYNTH_HPP_
