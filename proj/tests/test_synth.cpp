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

#include <doctest.h>

#include <set>

#include "t2imt/er.hpp"
#include "t2imt/error.hpp"
#include "t2imt/synth.hpp"

using namespace t2imt;

namespace {

Registry fixture_registry() { return Registry::load(T2IMT_FIXTURE_DIR "/fixture_registry.json"); }
TemplateSet fixture_templates() {
  return TemplateSet::load(T2IMT_FIXTURE_DIR "/fixture_templates.json");
}

ERPool make_pool(const Registry& reg, std::vector<SurfaceTriple> triples,
                 const std::string& caption = "c") {
  return build_pool(caption, triples, reg, true).pool;
}

// all pools with up to max_triples distinct triples over the registry
std::vector<ERPool> enumerate_pools(const Registry& reg, size_t max_triples) {
  std::vector<ERTriple> space;
  for (size_t s = 0; s < reg.entity_count(); ++s)
    for (size_t p = 0; p < reg.relation_count(); ++p)
      for (size_t o = 0; o < reg.entity_count(); ++o)
        space.push_back({EntityId{static_cast<int>(s)}, RelationId{static_cast<int>(p)},
                         EntityId{static_cast<int>(o)}});
  std::vector<ERPool> pools;
  if (max_triples >= 1) {
    for (const auto& t : space) pools.push_back(ERPool::from_triples("c", {t}));
  }
  if (max_triples >= 2) {
    for (size_t i = 0; i < space.size(); ++i)
      for (size_t j = i + 1; j < space.size(); ++j)
        pools.push_back(ERPool::from_triples("c", {space[i], space[j]}));
  }
  return pools;
}

}  // namespace

TEST_CASE("render produces articled clauses in canonical order") {
  Registry reg = fixture_registry();
  TemplateSet templates = fixture_templates();
  CHECK(render(make_pool(reg, {{"dog", "with", "cat"}}), templates, reg) == "a dog with a cat");
  CHECK(render(make_pool(reg, {{"dog", "on", "bed"}, {"cat", "on", "bed"}}), templates, reg) ==
        "a dog on a bed and a cat on a bed");
  // vowel rule
  CHECK(render(make_pool(reg, {{"person", "holding", "umbrella"}}), templates, reg) ==
        "a person holding an umbrella");
}

TEST_CASE("render is deterministic and order-stable") {
  Registry reg = fixture_registry();
  TemplateSet templates = fixture_templates();
  ERPool a = make_pool(reg, {{"dog", "with", "cat"}, {"cat", "on", "bed"}});
  ERPool b = make_pool(reg, {{"cat", "on", "bed"}, {"dog", "with", "cat"}});
  CHECK(render(a, templates, reg) == render(b, templates, reg));
}

TEST_CASE("empty pool renders the fallback") {
  Registry reg = fixture_registry();
  TemplateSet templates = fixture_templates();
  ERPool empty = ERPool::from_triples("original caption text", {});
  CHECK(render(empty, templates, reg) == "original caption text");
  templates.empty_fallback = "a scene";
  CHECK(render(empty, templates, reg) == "a scene");
}

TEST_CASE("unknown template slots are rejected") {
  Registry reg = fixture_registry();
  TemplateSet templates = fixture_templates();
  templates.triple_template = "{subject} {verb} {object}";
  CHECK_THROWS_AS(render(make_pool(reg, {{"dog", "with", "cat"}}), templates, reg), Error);
}

TEST_CASE("render is injective over small pools of the fixture registry") {
  Registry reg = fixture_registry();
  TemplateSet templates = fixture_templates();
  auto pools = enumerate_pools(reg, 2);
  std::set<std::string> prompts;
  for (const auto& pool : pools) prompts.insert(render(pool, templates, reg));
  CHECK(prompts.size() == pools.size());
}

TEST_CASE("rendered prompts round-trip through the extractor") {
  Registry reg = fixture_registry();
  TemplateSet templates = fixture_templates();
  for (const auto& pool : enumerate_pools(reg, 2)) {
    std::string prompt = render(pool, templates, reg);
    ERPool back = build_pool(prompt, naive_extract(prompt, reg), reg, true).pool;
    REQUIRE(back == pool);
  }
}
