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
// Entity/relation detection for generated images. Detections come from an
// external service speaking the wire schema below, from a simulator sidecar,
// or from fixture files; the gateway canonicalizes labels, applies the
// confidence thresholds and keeps relation indices consistent.

#ifndef T2IMT_DETECTION_HPP_
#define T2IMT_DETECTION_HPP_

#include <array>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "t2imt/er.hpp"

namespace t2imt {

// Wire schema (also the fixture file format):
//   {"entities":  [{"label": str, "confidence": num, "bbox": [4 num]}],
//    "relations": [{"subject": idx, "predicate": str, "object": idx,
//                   "confidence": num}]}
struct RawEntity {
  std::string label;
  double confidence = 1.0;
  std::array<double, 4> bbox{0, 0, 0, 0};
};

struct RawRelation {
  int subject = 0;
  std::string predicate;
  int object = 0;
  double confidence = 1.0;
};

struct RawDetection {
  std::vector<RawEntity> entities;
  std::vector<RawRelation> relations;
};

// Throws MalformedResponse on schema violations; the offending body is
// preserved in the message.
RawDetection raw_detection_from_json(const nlohmann::json& doc);

struct DetectedEntity {
  EntityId cls;
  double confidence = 1.0;
  std::array<double, 4> bbox{0, 0, 0, 0};
};

struct DetectedRelation {
  int subject_index = 0;
  RelationId predicate;
  int object_index = 0;
  double confidence = 1.0;
};

// Filtered / dropped detections are counted, never silently discarded.
struct DetectionDiagnostics {
  size_t below_threshold_entities = 0;
  size_t below_threshold_relations = 0;
  size_t unknown_entities = 0;
  size_t unknown_relations = 0;
  size_t orphaned_relations = 0;  // endpoint entity was filtered out
};

struct DetectionResult {
  std::string image_ref;
  std::vector<DetectedEntity> entities;    // confidence >= threshold, canonical classes
  std::vector<DetectedRelation> relations; // indices into entities, re-indexed after filtering
  DetectionDiagnostics diagnostics;

  nlohmann::json to_json(const Registry& reg) const;
  static DetectionResult from_json(const nlohmann::json& doc, const Registry& reg);
};

struct ClassSets {
  std::vector<EntityId> entities;     // sorted unique
  std::vector<RelationId> relations;  // sorted unique
  bool operator==(const ClassSets&) const = default;
};

ClassSets to_er_sets(const DetectionResult& d);
ClassSets pool_class_sets(const ERPool& pool);

struct DetectorConfig {
  double entity_threshold = 0.08;
  double relation_threshold = 0.08;
  bool strict = false;  // unknown classes throw instead of being counted
  int max_in_flight = 4;
};

// Canonicalization + threshold filtering + re-indexing. A relation whose
// endpoint entity fails the threshold is excluded as well (counted as
// orphaned) so the failure surfaces on both the entity and relation side.
DetectionResult postprocess_detection(const RawDetection& raw, std::string image_ref,
                                      const Registry& reg, const DetectorConfig& cfg);

class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;
  virtual std::string id() const = 0;
  virtual RawDetection detect_raw(const std::string& image_ref) = 0;
};

// Reads "<image_ref>.sidecar.json" written by the simulator:
//   {"entities": [label...], "relations": [[subj, pred, obj]...]}
class SidecarDetector : public DetectorBackend {
 public:
  explicit SidecarDetector(std::string id = "sidecar") : id_(std::move(id)) {}
  std::string id() const override { return id_; }
  RawDetection detect_raw(const std::string& image_ref) override;

 private:
  std::string id_;
};

// Serves wire-schema fixture files: <dir>/<image filename>.json.
class FixtureDetector : public DetectorBackend {
 public:
  FixtureDetector(std::string id, std::filesystem::path dir)
      : id_(std::move(id)), dir_(std::move(dir)) {}
  std::string id() const override { return id_; }
  RawDetection detect_raw(const std::string& image_ref) override;

 private:
  std::string id_;
  std::filesystem::path dir_;
};

struct HttpDetectorConfig {
  std::string endpoint;            // e.g. http://host:8000/detect
  std::string send = "image_b64";  // "image_b64" | "image_ref"
  int timeout_ms = 30000;
};

class HttpDetector : public DetectorBackend {
 public:
  HttpDetector(std::string id, HttpDetectorConfig cfg) : id_(std::move(id)), cfg_(std::move(cfg)) {}
  std::string id() const override { return id_; }
  RawDetection detect_raw(const std::string& image_ref) override;

 private:
  std::string id_;
  HttpDetectorConfig cfg_;
};

// Stateless request/response facade: raw detection from the backend, then
// postprocessing. Concurrent detect() calls are bounded by max_in_flight.
class DetectorGateway {
 public:
  DetectorGateway(std::unique_ptr<DetectorBackend> backend, std::shared_ptr<const Registry> reg,
                  DetectorConfig cfg = {})
      : backend_(std::move(backend)), registry_(std::move(reg)), cfg_(cfg) {}

  DetectionResult detect(const std::string& image_ref);
  const std::string backend_id() const { return backend_->id(); }

 private:
  std::unique_ptr<DetectorBackend> backend_;
  std::shared_ptr<const Registry> registry_;
  DetectorConfig cfg_;
  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
};

}  // namespace t2imt

#endif  // T2IMT_DETECTION_HPP_
