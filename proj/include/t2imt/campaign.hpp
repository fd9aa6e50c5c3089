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
// End-to-end orchestration: seed ingestion, mutation fan-out, synthesis,
// generation, detection, consistency evaluation, metrics, reports. Every
// (backend, seed, operator) cell persists its artifacts under the run
// directory and is marked in an append-only manifest; re-running a campaign
// resumes from the manifest without recomputation.

#ifndef T2IMT_CAMPAIGN_HPP_
#define T2IMT_CAMPAIGN_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "t2imt/detection.hpp"
#include "t2imt/generation.hpp"
#include "t2imt/mutation.hpp"
#include "t2imt/report.hpp"
#include "t2imt/synth.hpp"

namespace t2imt {

struct GeneratorSpec {
  std::string id;
  std::string type;  // "simulator" | "http"
  SimulatorConfig simulator;
  HttpGeneratorConfig http;
  GatewayConfig gateway;
};

struct DetectorSpec {
  std::string id = "sidecar";
  std::string type = "sidecar";  // "sidecar" | "fixture" | "http"
  std::filesystem::path fixture_dir;
  HttpDetectorConfig http;
};

struct TestSetFiles {
  std::filesystem::path features;  // for I-FID (with metrics.real_features)
  std::filesystem::path logits;    // for I-IS
  std::filesystem::path sims;      // for RP
};

// Out-of-process metric inputs; all optional.
struct MetricFiles {
  std::filesystem::path real_features;
  double temperature = 1.0;
  std::filesystem::path fit_logits;  // when set (with fit_labels), overrides temperature
  std::filesystem::path fit_labels;
  int is_splits = 10;
  // backend id -> test set token ("orig", "ss", "ec", ...) -> files
  std::map<std::string, std::map<std::string, TestSetFiles>> sets;
};

struct CampaignConfig {
  std::filesystem::path seeds;
  std::filesystem::path registry;
  std::filesystem::path templates;   // optional; built-in defaults otherwise
  std::filesystem::path candidates;  // optional; derived from the corpus otherwise
  std::filesystem::path synonyms;    // required when ss is enabled
  std::vector<Op> operators;
  uint64_t rng_seed = 0;
  double epsilon = 0.1;
  DetectorConfig detector_thresholds;
  bool ec_uniform_sampling = false;
  int width = 512;
  int height = 512;
  int concurrency = 1;
  uint64_t generate_budget = 0;  // 0 = unlimited; reached -> graceful interrupt
  std::filesystem::path output_dir;
  std::vector<GeneratorSpec> generators;
  DetectorSpec detector;
  MetricFiles metrics;
  RegistryLimits registry_limits;

  static CampaignConfig from_json(const nlohmann::json& doc);
  static CampaignConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

// Schema and cross-field checks; never touches the network. Returns the
// aggregated problem list (empty = valid).
std::vector<std::string> validate_config(const CampaignConfig& config);
std::vector<std::string> validate_config_file(const std::filesystem::path& path);

enum class CellStatus { kCompleted, kInapplicable, kFailed };

const char* cell_status_name(CellStatus s);

struct ManifestEntry {
  std::string cell;
  CellStatus status = CellStatus::kCompleted;
  std::string detail;
};

// Append-only event log at <run_dir>/manifest.jsonl. The header line pins
// the content hashes of the config and inputs; resuming with different
// inputs is refused.
class RunManifest {
 public:
  static RunManifest open(const std::filesystem::path& run_dir, const std::string& inputs_hash);

  void append(const ManifestEntry& entry);
  std::optional<CellStatus> status(const std::string& cell) const;
  size_t count(CellStatus s) const;
  const std::map<std::string, ManifestEntry>& entries() const { return entries_; }

 private:
  std::filesystem::path path_;
  std::map<std::string, ManifestEntry> entries_;
  std::unique_ptr<std::mutex> write_mu_ = std::make_unique<std::mutex>();
};

std::string cell_id(const std::string& backend, const std::string& seed_id, Op op);

struct CampaignResult {
  MetricReport report;
  size_t cells_total = 0;
  size_t completed = 0;
  size_t inapplicable = 0;
  size_t failed = 0;
  bool interrupted = false;  // generate budget reached; rerun to resume
  uint64_t generator_calls = 0;
};

// Runs (or resumes) the campaign described by config. Per-cell failures are
// recorded and skipped; config errors abort before any side effect.
CampaignResult run_campaign(const CampaignConfig& config);

// Rebuilds the report from a finished (or partial) run directory.
MetricReport report_from_run_dir(const std::filesystem::path& run_dir);

// Re-runs consistency evaluation from persisted prompts and detections,
// rewriting verdicts and the report. Returns the rebuilt report.
MetricReport reevaluate_run(const std::filesystem::path& run_dir);

}  // namespace t2imt

#endif  // T2IMT_CAMPAIGN_HPP_
