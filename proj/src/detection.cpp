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

#include "t2imt/detection.hpp"

#include <httplib.h>

#include <algorithm>

#include "t2imt/error.hpp"
#include "t2imt/util.hpp"

namespace t2imt {

RawDetection raw_detection_from_json(const nlohmann::json& doc) {
  RawDetection raw;
  try {
    if (doc.contains("entities")) {
      for (const auto& e : doc.at("entities")) {
        RawEntity ent;
        ent.label = e.at("label").get<std::string>();
        ent.confidence = e.value("confidence", 1.0);
        if (e.contains("bbox")) {
          const auto& b = e.at("bbox");
          if (!b.is_array() || b.size() != 4)
            raise(ErrorCode::kMalformedResponse,
                  "bbox must have 4 values; body: " + doc.dump().substr(0, 512));
          for (size_t i = 0; i < 4; ++i) ent.bbox[i] = b[i].get<double>();
        }
        raw.entities.push_back(std::move(ent));
      }
    }
    if (doc.contains("relations")) {
      for (const auto& r : doc.at("relations")) {
        RawRelation rel;
        rel.subject = r.at("subject").get<int>();
        rel.predicate = r.at("predicate").get<std::string>();
        rel.object = r.at("object").get<int>();
        rel.confidence = r.value("confidence", 1.0);
        raw.relations.push_back(std::move(rel));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kMalformedResponse,
          std::string(e.what()) + "; body: " + doc.dump().substr(0, 512));
  }
  for (const auto& rel : raw.relations) {
    if (rel.subject < 0 || rel.object < 0 ||
        rel.subject >= static_cast<int>(raw.entities.size()) ||
        rel.object >= static_cast<int>(raw.entities.size()))
      raise(ErrorCode::kMalformedResponse,
            "relation index out of range; body: " + doc.dump().substr(0, 512));
  }
  return raw;
}

DetectionResult postprocess_detection(const RawDetection& raw, std::string image_ref,
                                      const Registry& reg, const DetectorConfig& cfg) {
  DetectionResult out;
  out.image_ref = std::move(image_ref);

  // old entity index -> new index, or -1 if filtered
  std::vector<int> remap(raw.entities.size(), -1);
  for (size_t i = 0; i < raw.entities.size(); ++i) {
    const RawEntity& e = raw.entities[i];
    auto cls = canonicalize_entity(e.label, reg, false);
    if (!cls) {
      if (cfg.strict) raise(ErrorCode::kUnknownClassStrict, "entity '" + e.label + "'");
      ++out.diagnostics.unknown_entities;
      continue;
    }
    if (e.confidence < cfg.entity_threshold) {
      ++out.diagnostics.below_threshold_entities;
      continue;
    }
    remap[i] = static_cast<int>(out.entities.size());
    out.entities.push_back({*cls, e.confidence, e.bbox});
  }

  for (const RawRelation& r : raw.relations) {
    auto pred = canonicalize_relation(r.predicate, reg, false);
    if (!pred) {
      if (cfg.strict) raise(ErrorCode::kUnknownClassStrict, "relation '" + r.predicate + "'");
      ++out.diagnostics.unknown_relations;
      continue;
    }
    if (remap[static_cast<size_t>(r.subject)] < 0 || remap[static_cast<size_t>(r.object)] < 0) {
      // follow-on failure: endpoint entity was dropped
      ++out.diagnostics.orphaned_relations;
      continue;
    }
    if (r.confidence < cfg.relation_threshold) {
      ++out.diagnostics.below_threshold_relations;
      continue;
    }
    out.relations.push_back({remap[static_cast<size_t>(r.subject)], *pred,
                             remap[static_cast<size_t>(r.object)], r.confidence});
  }
  return out;
}

ClassSets to_er_sets(const DetectionResult& d) {
  ClassSets sets;
  for (const auto& e : d.entities) sets.entities.push_back(e.cls);
  for (const auto& r : d.relations) sets.relations.push_back(r.predicate);
  auto dedup = [](auto& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedup(sets.entities);
  dedup(sets.relations);
  return sets;
}

ClassSets pool_class_sets(const ERPool& pool) {
  return {pool.entity_set(), pool.relation_set()};
}

nlohmann::json DetectionResult::to_json(const Registry& reg) const {
  nlohmann::json doc;
  doc["image_ref"] = image_ref;
  auto& ents = doc["entities"] = nlohmann::json::array();
  for (const auto& e : entities) {
    ents.push_back({{"label", reg.entity(e.cls).label},
                    {"confidence", e.confidence},
                    {"bbox", e.bbox}});
  }
  auto& rels = doc["relations"] = nlohmann::json::array();
  for (const auto& r : relations) {
    rels.push_back({{"subject", r.subject_index},
                    {"predicate", reg.relation(r.predicate).label},
                    {"object", r.object_index},
                    {"confidence", r.confidence}});
  }
  doc["diagnostics"] = {{"below_threshold_entities", diagnostics.below_threshold_entities},
                        {"below_threshold_relations", diagnostics.below_threshold_relations},
                        {"unknown_entities", diagnostics.unknown_entities},
                        {"unknown_relations", diagnostics.unknown_relations},
                        {"orphaned_relations", diagnostics.orphaned_relations}};
  return doc;
}

DetectionResult DetectionResult::from_json(const nlohmann::json& doc, const Registry& reg) {
  DetectionResult out;
  out.image_ref = doc.value("image_ref", std::string{});
  if (doc.contains("entities")) {
    for (const auto& e : doc.at("entities")) {
      DetectedEntity ent;
      auto cls = canonicalize_entity(e.at("label").get<std::string>(), reg, true);
      ent.cls = *cls;
      ent.confidence = e.value("confidence", 1.0);
      if (e.contains("bbox"))
        for (size_t i = 0; i < 4; ++i) ent.bbox[i] = e.at("bbox")[i].get<double>();
      out.entities.push_back(ent);
    }
  }
  if (doc.contains("relations")) {
    for (const auto& r : doc.at("relations")) {
      DetectedRelation rel;
      rel.subject_index = r.at("subject").get<int>();
      auto pred = canonicalize_relation(r.at("predicate").get<std::string>(), reg, true);
      rel.predicate = *pred;
      rel.object_index = r.at("object").get<int>();
      rel.confidence = r.value("confidence", 1.0);
      out.relations.push_back(rel);
    }
  }
  if (doc.contains("diagnostics")) {
    const auto& d = doc.at("diagnostics");
    out.diagnostics.below_threshold_entities = d.value("below_threshold_entities", 0u);
    out.diagnostics.below_threshold_relations = d.value("below_threshold_relations", 0u);
    out.diagnostics.unknown_entities = d.value("unknown_entities", 0u);
    out.diagnostics.unknown_relations = d.value("unknown_relations", 0u);
    out.diagnostics.orphaned_relations = d.value("orphaned_relations", 0u);
  }
  return out;
}

RawDetection SidecarDetector::detect_raw(const std::string& image_ref) {
  std::filesystem::path sidecar = image_ref + ".sidecar.json";
  if (!std::filesystem::exists(sidecar))
    raise(ErrorCode::kDetectorUnavailable, "no sidecar at " + sidecar.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(sidecar));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kMalformedResponse, sidecar.string() + ": " + e.what());
  }

  RawDetection raw;
  std::map<std::string, int> index;
  if (doc.contains("entities")) {
    for (const auto& e : doc.at("entities")) {
      std::string label = e.get<std::string>();
      if (!index.count(label)) {
        index[label] = static_cast<int>(raw.entities.size());
        raw.entities.push_back({label, 1.0, {0, 0, 0, 0}});
      }
    }
  }
  if (doc.contains("relations")) {
    for (const auto& t : doc.at("relations")) {
      if (!t.is_array() || t.size() != 3)
        raise(ErrorCode::kMalformedResponse, sidecar.string() + ": relation must be a triple");
      std::string subj = t[0].get<std::string>(), pred = t[1].get<std::string>(),
                  obj = t[2].get<std::string>();
      if (!index.count(subj) || !index.count(obj))
        raise(ErrorCode::kMalformedResponse,
              sidecar.string() + ": relation references absent entity");
      raw.relations.push_back({index[subj], pred, index[obj], 1.0});
    }
  }
  return raw;
}

RawDetection FixtureDetector::detect_raw(const std::string& image_ref) {
  std::filesystem::path fixture =
      dir_ / (std::filesystem::path(image_ref).filename().string() + ".json");
  if (!std::filesystem::exists(fixture))
    raise(ErrorCode::kDetectorUnavailable, "no fixture at " + fixture.string());
  try {
    return raw_detection_from_json(nlohmann::json::parse(read_file(fixture)));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kMalformedResponse, fixture.string() + ": " + e.what());
  }
}

RawDetection HttpDetector::detect_raw(const std::string& image_ref) {
  auto scheme_end = cfg_.endpoint.find("://");
  if (scheme_end == std::string::npos)
    raise(ErrorCode::kConfigError, "bad detector endpoint " + cfg_.endpoint);
  auto path_begin = cfg_.endpoint.find('/', scheme_end + 3);
  std::string host = cfg_.endpoint.substr(0, path_begin);
  std::string path = path_begin == std::string::npos ? "/" : cfg_.endpoint.substr(path_begin);

  nlohmann::json body;
  if (cfg_.send == "image_ref") {
    body["image_ref"] = image_ref;
  } else {
    std::string bytes = read_file(image_ref);
    static const char* b64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string enc;
    enc.reserve((bytes.size() + 2) / 3 * 4);
    for (size_t i = 0; i < bytes.size(); i += 3) {
      uint32_t chunk = static_cast<uint32_t>(static_cast<unsigned char>(bytes[i])) << 16;
      if (i + 1 < bytes.size()) chunk |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[i + 1])) << 8;
      if (i + 2 < bytes.size()) chunk |= static_cast<unsigned char>(bytes[i + 2]);
      enc.push_back(b64[(chunk >> 18) & 63]);
      enc.push_back(b64[(chunk >> 12) & 63]);
      enc.push_back(i + 1 < bytes.size() ? b64[(chunk >> 6) & 63] : '=');
      enc.push_back(i + 2 < bytes.size() ? b64[chunk & 63] : '=');
    }
    body["image_b64"] = std::move(enc);
  }

  httplib::Client client(host);
  client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
  client.set_connection_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) raise(ErrorCode::kDetectorUnavailable, "no response from " + cfg_.endpoint);
  if (res->status < 200 || res->status >= 300)
    raise(ErrorCode::kDetectorUnavailable,
          "status " + std::to_string(res->status) + "; body: " + res->body.substr(0, 512));
  try {
    return raw_detection_from_json(nlohmann::json::parse(res->body));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kMalformedResponse,
          std::string(e.what()) + "; body: " + res->body.substr(0, 512));
  }
}

DetectionResult DetectorGateway::detect(const std::string& image_ref) {
  if (!std::filesystem::exists(image_ref))
    raise(ErrorCode::kInvalidInput, "image does not exist: " + image_ref);
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < cfg_.max_in_flight; });
    ++in_flight_;
  }
  struct Release {
    DetectorGateway* g;
    ~Release() {
      std::lock_guard lock(g->mu_);
      --g->in_flight_;
      g->cv_.notify_one();
    }
  } release{this};
  RawDetection raw = backend_->detect_raw(image_ref);
  return postprocess_detection(raw, image_ref, *registry_, cfg_);
}

}  // namespace t2imt
