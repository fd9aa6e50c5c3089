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

#include "t2imt/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#include "t2imt/error.hpp"
#include "t2imt/matrix.hpp"
#include "t2imt/metrics.hpp"
#include "t2imt/mr.hpp"
#include "t2imt/rng.hpp"
#include "t2imt/util.hpp"

namespace t2imt {

namespace {

std::filesystem::path path_or_empty(const nlohmann::json& doc, const char* key) {
  if (doc.contains(key) && doc.at(key).is_string()) return doc.at(key).get<std::string>();
  return {};
}

}  // namespace

CampaignConfig CampaignConfig::from_json(const nlohmann::json& doc) {
  CampaignConfig c;
  c.seeds = path_or_empty(doc, "seeds");
  c.registry = path_or_empty(doc, "registry");
  c.templates = path_or_empty(doc, "templates");
  c.candidates = path_or_empty(doc, "candidates");
  c.synonyms = path_or_empty(doc, "synonyms");
  if (doc.contains("operators")) {
    for (const auto& token : doc.at("operators")) {
      auto op = op_from_token(token.get<std::string>());
      if (!op)
        raise(ErrorCode::kConfigError, "unknown operator '" + token.get<std::string>() + "'");
      c.operators.push_back(*op);
    }
  }
  c.rng_seed = doc.value("rng_seed", 0ull);
  c.epsilon = doc.value("epsilon", 0.1);
  c.detector_thresholds.entity_threshold = doc.value("confidence_threshold", 0.08);
  c.detector_thresholds.relation_threshold =
      doc.value("relation_confidence_threshold", c.detector_thresholds.entity_threshold);
  c.detector_thresholds.strict = doc.value("strict_classes", false);
  c.ec_uniform_sampling = doc.value("ec_uniform_sampling", false);
  c.width = doc.value("width", 512);
  c.height = doc.value("height", 512);
  c.concurrency = doc.value("concurrency", 1);
  c.generate_budget = doc.value("generate_budget", 0ull);
  c.output_dir = path_or_empty(doc, "output_dir");
  if (doc.contains("registry_limits")) {
    const auto& l = doc.at("registry_limits");
    c.registry_limits.max_entities = l.value("max_entities", size_t{150});
    c.registry_limits.max_relations = l.value("max_relations", size_t{50});
  }
  if (doc.contains("generators")) {
    for (const auto& g : doc.at("generators")) {
      GeneratorSpec spec;
      spec.id = g.value("id", std::string{});
      spec.type = g.value("type", std::string{"simulator"});
      spec.simulator.p_drop_entity = g.value("p_drop_entity", 0.0);
      spec.simulator.p_drop_relation = g.value("p_drop_relation", 0.0);
      spec.simulator.p_swap_relation = g.value("p_swap_relation", 0.0);
      spec.simulator.rng_seed = g.value("sim_rng_seed", 0ull);
      spec.http.endpoint = g.value("endpoint", std::string{});
      spec.http.api_key_env = g.value("api_key_env", std::string{});
      spec.http.auth_header = g.value("auth_header", std::string{"Authorization"});
      spec.http.auth_scheme = g.value("auth_scheme", std::string{"Bearer"});
      spec.http.timeout_ms = g.value("timeout_ms", 60000);
      if (g.contains("fields")) {
        const auto& f = g.at("fields");
        spec.http.prompt_field = f.value("prompt", "prompt");
        spec.http.width_field = f.value("width", "width");
        spec.http.height_field = f.value("height", "height");
        spec.http.seed_field = f.value("seed", "seed");
      }
      if (g.contains("response")) {
        const auto& r = g.at("response");
        spec.http.b64_field = r.value("b64_field", "image_b64");
        spec.http.url_field = r.value("url_field", "image_url");
      }
      spec.gateway.retry.max_attempts = g.value("max_attempts", 4);
      spec.gateway.retry.backoff_base_ms = g.value("backoff_base_ms", 100);
      spec.gateway.rate_per_s = g.value("rate_per_s", 0.0);
      spec.gateway.burst = g.value("burst", 1);
      spec.gateway.max_in_flight = g.value("max_in_flight", 4);
      c.generators.push_back(std::move(spec));
    }
  }
  if (doc.contains("detector")) {
    const auto& d = doc.at("detector");
    c.detector.id = d.value("id", std::string{"sidecar"});
    c.detector.type = d.value("type", std::string{"sidecar"});
    c.detector.fixture_dir = path_or_empty(d, "fixture_dir");
    c.detector.http.endpoint = d.value("endpoint", std::string{});
    c.detector.http.send = d.value("send", std::string{"image_b64"});
    c.detector.http.timeout_ms = d.value("timeout_ms", 30000);
  }
  if (doc.contains("metrics")) {
    const auto& m = doc.at("metrics");
    c.metrics.real_features = path_or_empty(m, "real_features");
    c.metrics.temperature = m.value("temperature", 1.0);
    c.metrics.fit_logits = path_or_empty(m, "fit_logits");
    c.metrics.fit_labels = path_or_empty(m, "fit_labels");
    c.metrics.is_splits = m.value("is_splits", 10);
    if (m.contains("sets")) {
      for (const auto& [backend, sets] : m.at("sets").items()) {
        for (const auto& [token, files] : sets.items()) {
          TestSetFiles tsf;
          tsf.features = path_or_empty(files, "features");
          tsf.logits = path_or_empty(files, "logits");
          tsf.sims = path_or_empty(files, "sims");
          c.metrics.sets[backend][token] = std::move(tsf);
        }
      }
    }
  }
  return c;
}

CampaignConfig CampaignConfig::load(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kConfigError, "config " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json CampaignConfig::to_json() const {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["seeds"] = seeds.string();
  doc["registry"] = registry.string();
  if (!templates.empty()) doc["templates"] = templates.string();
  if (!candidates.empty()) doc["candidates"] = candidates.string();
  if (!synonyms.empty()) doc["synonyms"] = synonyms.string();
  auto& ops = doc["operators"] = nlohmann::json::array();
  for (Op op : operators) ops.push_back(std::string(op_token(op)));
  doc["rng_seed"] = rng_seed;
  doc["epsilon"] = epsilon;
  doc["confidence_threshold"] = detector_thresholds.entity_threshold;
  doc["relation_confidence_threshold"] = detector_thresholds.relation_threshold;
  doc["strict_classes"] = detector_thresholds.strict;
  doc["ec_uniform_sampling"] = ec_uniform_sampling;
  doc["width"] = width;
  doc["height"] = height;
  doc["concurrency"] = concurrency;
  doc["generate_budget"] = generate_budget;
  doc["output_dir"] = output_dir.string();
  doc["registry_limits"] = {{"max_entities", registry_limits.max_entities},
                            {"max_relations", registry_limits.max_relations}};
  auto& gens = doc["generators"] = nlohmann::json::array();
  for (const auto& g : generators) {
    nlohmann::json gj;
    gj["id"] = g.id;
    gj["type"] = g.type;
    if (g.type == "simulator") {
      gj["p_drop_entity"] = g.simulator.p_drop_entity;
      gj["p_drop_relation"] = g.simulator.p_drop_relation;
      gj["p_swap_relation"] = g.simulator.p_swap_relation;
      gj["sim_rng_seed"] = g.simulator.rng_seed;
    } else {
      gj["endpoint"] = g.http.endpoint;
      gj["api_key_env"] = g.http.api_key_env;
      gj["auth_header"] = g.http.auth_header;
      gj["auth_scheme"] = g.http.auth_scheme;
      gj["timeout_ms"] = g.http.timeout_ms;
    }
    gj["max_attempts"] = g.gateway.retry.max_attempts;
    gj["rate_per_s"] = g.gateway.rate_per_s;
    gj["max_in_flight"] = g.gateway.max_in_flight;
    gens.push_back(std::move(gj));
  }
  nlohmann::json det;
  det["id"] = detector.id;
  det["type"] = detector.type;
  if (!detector.fixture_dir.empty()) det["fixture_dir"] = detector.fixture_dir.string();
  if (!detector.http.endpoint.empty()) {
    det["endpoint"] = detector.http.endpoint;
    det["send"] = detector.http.send;
  }
  doc["detector"] = std::move(det);
  if (!metrics.real_features.empty() || !metrics.sets.empty()) {
    nlohmann::json m;
    if (!metrics.real_features.empty()) m["real_features"] = metrics.real_features.string();
    m["temperature"] = metrics.temperature;
    if (!metrics.fit_logits.empty()) m["fit_logits"] = metrics.fit_logits.string();
    if (!metrics.fit_labels.empty()) m["fit_labels"] = metrics.fit_labels.string();
    m["is_splits"] = metrics.is_splits;
    auto& sets = m["sets"] = nlohmann::json::object();
    for (const auto& [backend, tokens] : metrics.sets) {
      for (const auto& [token, files] : tokens) {
        nlohmann::json f;
        if (!files.features.empty()) f["features"] = files.features.string();
        if (!files.logits.empty()) f["logits"] = files.logits.string();
        if (!files.sims.empty()) f["sims"] = files.sims.string();
        sets[backend][token] = std::move(f);
      }
    }
    doc["metrics"] = std::move(m);
  }
  return doc;
}

std::vector<std::string> validate_config(const CampaignConfig& c) {
  std::vector<std::string> problems;
  auto need_file = [&problems](const std::filesystem::path& p, const char* what,
                               bool required) {
    if (p.empty()) {
      if (required) problems.push_back(std::string(what) + " path is missing");
      return;
    }
    if (!std::filesystem::exists(p))
      problems.push_back(std::string(what) + " path does not exist: " + p.string());
  };
  need_file(c.seeds, "seeds", true);
  need_file(c.registry, "registry", true);
  need_file(c.templates, "templates", false);
  need_file(c.candidates, "candidates", false);
  need_file(c.synonyms, "synonyms", false);
  if (c.operators.empty()) problems.push_back("operator list is empty");
  bool ss_enabled = std::find(c.operators.begin(), c.operators.end(), Op::kSynonymSub) !=
                    c.operators.end();
  if (ss_enabled && c.synonyms.empty())
    problems.push_back("ss operator enabled but no synonyms file configured");
  if (c.epsilon < 0) problems.push_back("epsilon must be >= 0");
  auto check01 = [&problems](double v, const char* what) {
    if (v < 0.0 || v > 1.0) problems.push_back(std::string(what) + " must be in [0, 1]");
  };
  check01(c.detector_thresholds.entity_threshold, "confidence_threshold");
  check01(c.detector_thresholds.relation_threshold, "relation_confidence_threshold");
  if (c.width <= 0 || c.height <= 0) problems.push_back("image dimensions must be positive");
  if (c.concurrency < 1) problems.push_back("concurrency must be >= 1");
  if (c.output_dir.empty()) problems.push_back("output_dir is missing");
  if (c.generators.empty()) problems.push_back("no generator backends configured");
  std::vector<std::string> ids;
  for (const auto& g : c.generators) {
    if (g.id.empty()) problems.push_back("generator without id");
    ids.push_back(g.id);
    if (g.type == "simulator") {
      check01(g.simulator.p_drop_entity, "p_drop_entity");
      check01(g.simulator.p_drop_relation, "p_drop_relation");
      check01(g.simulator.p_swap_relation, "p_swap_relation");
    } else if (g.type == "http") {
      if (g.http.endpoint.empty())
        problems.push_back("http generator '" + g.id + "' has no endpoint");
    } else {
      problems.push_back("generator '" + g.id + "' has unknown type '" + g.type + "'");
    }
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    problems.push_back("generator ids are not unique");
  if (c.detector.type == "fixture") {
    if (c.detector.fixture_dir.empty() || !std::filesystem::exists(c.detector.fixture_dir))
      problems.push_back("fixture detector needs an existing fixture_dir");
  } else if (c.detector.type == "http") {
    if (c.detector.http.endpoint.empty()) problems.push_back("http detector has no endpoint");
  } else if (c.detector.type != "sidecar") {
    problems.push_back("detector type '" + c.detector.type + "' unknown");
  }
  need_file(c.metrics.real_features, "metrics.real_features", false);
  need_file(c.metrics.fit_logits, "metrics.fit_logits", false);
  need_file(c.metrics.fit_labels, "metrics.fit_labels", false);
  for (const auto& [backend, tokens] : c.metrics.sets) {
    for (const auto& [token, files] : tokens) {
      if (token != "orig" && !op_from_token(token))
        problems.push_back("metrics.sets has unknown test set '" + token + "'");
      need_file(files.features, "metrics features", false);
      need_file(files.logits, "metrics logits", false);
      need_file(files.sims, "metrics sims", false);
    }
  }
  return problems;
}

std::vector<std::string> validate_config_file(const std::filesystem::path& path) {
  CampaignConfig config;
  try {
    config = CampaignConfig::load(path);
  } catch (const Error& e) {
    return {e.what()};
  }
  return validate_config(config);
}

const char* cell_status_name(CellStatus s) {
  switch (s) {
    case CellStatus::kCompleted: return "completed";
    case CellStatus::kInapplicable: return "inapplicable";
    case CellStatus::kFailed: return "failed";
  }
  return "?";
}

std::string cell_id(const std::string& backend, const std::string& seed_id, Op op) {
  return backend + "/" + seed_id + "/" + std::string(op_token(op));
}

RunManifest RunManifest::open(const std::filesystem::path& run_dir,
                              const std::string& inputs_hash) {
  RunManifest m;
  m.path_ = run_dir / "manifest.jsonl";
  if (std::filesystem::exists(m.path_)) {
    std::ifstream in(m.path_);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      nlohmann::json doc = nlohmann::json::parse(line);
      if (doc.value("type", "") == "header") {
        header_seen = true;
        if (!inputs_hash.empty() && doc.value("inputs_hash", "") != inputs_hash)
          raise(ErrorCode::kConfigError,
                "run directory belongs to a campaign with different inputs");
        continue;
      }
      ManifestEntry entry;
      entry.cell = doc.at("cell").get<std::string>();
      std::string status = doc.value("status", "completed");
      entry.status = status == "inapplicable" ? CellStatus::kInapplicable
                     : status == "failed"     ? CellStatus::kFailed
                                              : CellStatus::kCompleted;
      entry.detail = doc.value("detail", "");
      m.entries_[entry.cell] = std::move(entry);
    }
    if (!header_seen && !inputs_hash.empty())
      raise(ErrorCode::kConfigError, "manifest without header: " + m.path_.string());
  } else if (!inputs_hash.empty()) {
    std::filesystem::create_directories(run_dir);
    nlohmann::json header;
    header["type"] = "header";
    header["inputs_hash"] = inputs_hash;
    std::ofstream out(m.path_, std::ios::app);
    out << header.dump() << "\n";
  }
  return m;
}

void RunManifest::append(const ManifestEntry& entry) {
  std::lock_guard lock(*write_mu_);
  nlohmann::json doc;
  doc["cell"] = entry.cell;
  doc["status"] = cell_status_name(entry.status);
  if (!entry.detail.empty()) doc["detail"] = entry.detail;
  std::ofstream out(path_, std::ios::app);
  out << doc.dump() << "\n";
  out.flush();
  entries_[entry.cell] = entry;
}

std::optional<CellStatus> RunManifest::status(const std::string& cell) const {
  std::lock_guard lock(*write_mu_);
  auto it = entries_.find(cell);
  if (it == entries_.end()) return std::nullopt;
  return it->second.status;
}

size_t RunManifest::count(CellStatus s) const {
  std::lock_guard lock(*write_mu_);
  size_t n = 0;
  for (const auto& [cell, entry] : entries_)
    if (entry.status == s) ++n;
  return n;
}

// ---------------------------------------------------------------------------
// Runner

namespace {

struct CampaignContext {
  CampaignConfig config;
  std::shared_ptr<const Registry> registry;
  std::vector<SeedRecord> seeds;
  TemplateSet templates;
  CandidatePool candidates;
  SynonymLexicon synonyms;
  std::filesystem::path run_dir;
  std::vector<std::unique_ptr<GeneratorGateway>> gateways;  // parallel to config.generators
  std::unique_ptr<DetectorGateway> detector;
  RunManifest* manifest = nullptr;
};

nlohmann::json class_sets_json(const ClassSets& sets, const Registry& reg) {
  nlohmann::json doc;
  auto& ents = doc["entities"] = nlohmann::json::array();
  for (EntityId e : sets.entities) ents.push_back(reg.entity(e).label);
  auto& rels = doc["relations"] = nlohmann::json::array();
  for (RelationId r : sets.relations) rels.push_back(reg.relation(r).label);
  return doc;
}

ClassSets class_sets_from_json(const nlohmann::json& doc, const Registry& reg) {
  ClassSets sets;
  for (const auto& e : doc.at("entities"))
    sets.entities.push_back(*canonicalize_entity(e.get<std::string>(), reg, true));
  for (const auto& r : doc.at("relations"))
    sets.relations.push_back(*canonicalize_relation(r.get<std::string>(), reg, true));
  std::sort(sets.entities.begin(), sets.entities.end());
  std::sort(sets.relations.begin(), sets.relations.end());
  return sets;
}

std::filesystem::path cell_file_path(const std::filesystem::path& run_dir,
                                     const std::string& backend, const std::string& seed_id,
                                     Op op) {
  return run_dir / "verdicts" / sanitize_filename(backend) /
         (sanitize_filename(seed_id) + "__" + sanitize_filename(op_token(op)) + ".json");
}

std::filesystem::path orig_miss_path(const std::filesystem::path& run_dir,
                                     const std::string& backend, const std::string& seed_id) {
  return run_dir / "misses" / sanitize_filename(backend) /
         (sanitize_filename(seed_id) + "__orig.json");
}

std::filesystem::path prompt_record_path(const std::filesystem::path& run_dir,
                                         const std::string& backend, const std::string& seed_id,
                                         Op op) {
  return run_dir / "prompts" / sanitize_filename(backend) /
         (sanitize_filename(seed_id) + "__" + sanitize_filename(op_token(op)) + ".json");
}

void persist_detection(const CampaignContext& ctx, const std::string& backend,
                       const DetectionResult& det) {
  std::filesystem::path dir = ctx.run_dir / "detections" / sanitize_filename(backend);
  std::filesystem::path file =
      dir / (std::filesystem::path(det.image_ref).filename().string() + ".json");
  write_file_atomic(file, det.to_json(*ctx.registry).dump(2));
}

// True when the error means "this operator does not apply to this seed".
bool inapplicable_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInsufficientDensity:
    case ErrorCode::kNoEligibleReplacement:
    case ErrorCode::kNoEligibleAugmentation:
    case ErrorCode::kNoSubstitutableWord:
    case ErrorCode::kEmptyPool:
      return true;
    default:
      return false;
  }
}

struct CellWork {
  size_t backend_index;
  size_t seed_index;
  Op op;
};

struct MutationPlan {
  MutationRecord mr_record;                  // record whose relation gets checked
  std::optional<MutationRecord> first_stage; // ec stage of combined operators
  std::string baseline_prompt;               // seed side of the relation
  std::string follow_prompt;
};

MutationPlan plan_mutation(const CampaignContext& ctx, const SeedRecord& seed,
                           const ERPool& pool, const std::string& seed_prompt, Op op) {
  const auto& cfg = ctx.config;
  uint64_t op_seed = derive_seed(cfg.rng_seed, {fnv1a64(seed.id), fnv1a64(op_token(op))});
  // The ec stage of a combined operator reuses the ec operator's stream so
  // the intermediate test set is shared with the plain ec cell.
  uint64_t ec_seed =
      derive_seed(cfg.rng_seed, {fnv1a64(seed.id), fnv1a64(op_token(Op::kEntityChange))});

  MutationPlan plan;
  switch (op) {
    case Op::kSynonymSub: {
      SsResult ss = mutate_ss(seed_prompt, ctx.synonyms, op_seed);
      MutationRecord rec;
      rec.seed_pool = pool;
      rec.op = Op::kSynonymSub;
      rec.params = ss.params;
      rec.follow_pool = pool;
      rec.seed_density = pool.density();
      rec.follow_density = pool.density();
      rec.rng_seed = op_seed;
      plan.mr_record = std::move(rec);
      plan.baseline_prompt = seed_prompt;
      plan.follow_prompt = ss.caption;
      return plan;
    }
    case Op::kEntityChange: {
      plan.mr_record = mutate_ec(pool, ctx.candidates, ec_seed, cfg.ec_uniform_sampling);
      plan.baseline_prompt = seed_prompt;
      plan.follow_prompt = render(plan.mr_record.follow_pool, ctx.templates, *ctx.registry);
      return plan;
    }
    case Op::kTripleRemoval: {
      plan.mr_record = mutate_er_r(pool, op_seed);
      plan.baseline_prompt = seed_prompt;
      plan.follow_prompt = render(plan.mr_record.follow_pool, ctx.templates, *ctx.registry);
      return plan;
    }
    case Op::kTripleAugment: {
      plan.mr_record = mutate_er_a(pool, ctx.candidates, op_seed);
      plan.baseline_prompt = seed_prompt;
      plan.follow_prompt = render(plan.mr_record.follow_pool, ctx.templates, *ctx.registry);
      return plan;
    }
    case Op::kChangeThenRemoval:
    case Op::kChangeThenAugment: {
      MutationRecord first = mutate_ec(pool, ctx.candidates, ec_seed, cfg.ec_uniform_sampling);
      MutationRecord second =
          op == Op::kChangeThenRemoval
              ? mutate_er_r(first.follow_pool, op_seed)
              : mutate_er_a(first.follow_pool, ctx.candidates, op_seed);
      plan.baseline_prompt = render(first.follow_pool, ctx.templates, *ctx.registry);
      plan.follow_prompt = render(second.follow_pool, ctx.templates, *ctx.registry);
      plan.first_stage = std::move(first);
      plan.mr_record = std::move(second);
      return plan;
    }
  }
  raise(ErrorCode::kOperatorMismatch, "unhandled operator");
}

void ensure_orig_miss(const CampaignContext& ctx, const std::string& backend_id,
                      const SeedRecord& seed, const ERPool& pool,
                      const std::string& seed_prompt, GeneratorGateway& gateway) {
  std::filesystem::path path = orig_miss_path(ctx.run_dir, backend_id, seed.id);
  if (std::filesystem::exists(path)) return;
  GenRequest req{seed_prompt, ctx.config.width, ctx.config.height, backend_id, std::nullopt};
  GenResult orig = gateway.generate(req);
  DetectionResult det = ctx.detector->detect(orig.image_ref.string());
  persist_detection(ctx, backend_id, det);
  nlohmann::json doc;
  doc["backend"] = backend_id;
  doc["seed_id"] = seed.id;
  doc["orig_image"] = orig.image_ref.filename().string();
  doc["input"] = class_sets_json(pool_class_sets(pool), *ctx.registry);
  doc["detected"] = class_sets_json(to_er_sets(det), *ctx.registry);
  doc["density"] = pool.density();
  write_file_atomic(path, doc.dump(2));
}

void process_cell(const CampaignContext& ctx, const CellWork& work) {
  const auto& cfg = ctx.config;
  const GeneratorSpec& gen_spec = cfg.generators[work.backend_index];
  GeneratorGateway& gateway = *ctx.gateways[work.backend_index];
  const SeedRecord& seed = ctx.seeds[work.seed_index];

  ERPool pool = build_pool(seed.caption, seed.triples, *ctx.registry, /*strict=*/true).pool;
  std::string seed_prompt =
      !seed.caption.empty() ? seed.caption : render(pool, ctx.templates, *ctx.registry);

  MutationPlan plan = plan_mutation(ctx, seed, pool, seed_prompt, work.op);

  // Prompt record first: re-evaluation needs it even if later stages fail.
  {
    nlohmann::json doc;
    doc["cell"] = cell_id(gen_spec.id, seed.id, work.op);
    doc["backend"] = gen_spec.id;
    doc["seed_id"] = seed.id;
    doc["op"] = std::string(op_token(work.op));
    doc["seed_prompt"] = seed_prompt;
    doc["baseline_prompt"] = plan.baseline_prompt;
    doc["follow_prompt"] = plan.follow_prompt;
    doc["record"] = plan.mr_record.to_json(*ctx.registry);
    if (plan.first_stage) doc["first_stage"] = plan.first_stage->to_json(*ctx.registry);
    write_file_atomic(prompt_record_path(ctx.run_dir, gen_spec.id, seed.id, work.op),
                      doc.dump(2));
  }

  // Original image and its miss contribution (shared per backend/seed).
  ensure_orig_miss(ctx, gen_spec.id, seed, pool, seed_prompt, gateway);

  GenRequest base_req{plan.baseline_prompt, cfg.width, cfg.height, gen_spec.id, std::nullopt};
  GenResult baseline = gateway.generate(base_req);
  GenRequest follow_req{plan.follow_prompt, cfg.width, cfg.height, gen_spec.id, std::nullopt};
  GenResult follow = gateway.generate(follow_req);

  DetectionResult baseline_det = ctx.detector->detect(baseline.image_ref.string());
  DetectionResult follow_det = ctx.detector->detect(follow.image_ref.string());
  persist_detection(ctx, gen_spec.id, baseline_det);
  persist_detection(ctx, gen_spec.id, follow_det);

  MRCase mr_case{plan.mr_record, baseline_det, follow_det};
  MRVerdict verdict = check(mr_case);

  nlohmann::json doc;
  doc["cell"] = cell_id(gen_spec.id, seed.id, work.op);
  doc["backend"] = gen_spec.id;
  doc["seed_id"] = seed.id;
  doc["op"] = std::string(op_token(work.op));
  doc["seed_prompt"] = seed_prompt;
  doc["baseline_prompt"] = plan.baseline_prompt;
  doc["follow_prompt"] = plan.follow_prompt;
  doc["baseline_image"] = baseline.image_ref.filename().string();
  doc["follow_image"] = follow.image_ref.filename().string();
  doc["record"] = plan.mr_record.to_json(*ctx.registry);
  if (plan.first_stage) doc["first_stage"] = plan.first_stage->to_json(*ctx.registry);
  doc["verdict"] = verdict.to_json(*ctx.registry);
  doc["follow_density"] = plan.mr_record.follow_pool.density();
  doc["miss"] = {
      {"input", class_sets_json(pool_class_sets(plan.mr_record.follow_pool), *ctx.registry)},
      {"detected", class_sets_json(to_er_sets(follow_det), *ctx.registry)}};
  write_file_atomic(cell_file_path(ctx.run_dir, gen_spec.id, seed.id, work.op), doc.dump(2));
}

struct ArtifactAggregation {
  MetricReport report;
  size_t completed = 0, inapplicable = 0, failed = 0;
};

void apply_metric_files(const CampaignConfig& config, MetricReport* report) {
  const MetricFiles& mf = config.metrics;
  if (mf.sets.empty()) return;

  double temperature = mf.temperature;
  if (!mf.fit_logits.empty() && !mf.fit_labels.empty()) {
    LogitSet fit_logits = LogitSet::load(mf.fit_logits);
    std::vector<int> labels = load_labels(mf.fit_labels);
    temperature = fit_temperature(fit_logits, labels).temperature;
  }

  std::optional<GaussianSummary> real_summary;
  if (!mf.real_features.empty())
    real_summary = summarize(FeatureSet::load(mf.real_features, FeatureSource::kReal));

  for (auto& backend : report->backends) {
    auto sets_it = mf.sets.find(backend.backend);
    if (sets_it == mf.sets.end()) continue;
    for (const auto& [token, files] : sets_it->second) {
      SetMetrics* target = nullptr;
      if (token == "orig") {
        target = &backend.orig;
      } else if (auto op = op_from_token(token)) {
        target = &backend.operators[*op];
      } else {
        continue;
      }
      if (!files.features.empty() && real_summary) {
        GaussianSummary gen =
            summarize(FeatureSet::load(files.features, FeatureSource::kGenerated));
        target->fid = frechet_distance(*real_summary, gen);
      }
      if (!files.logits.empty()) {
        LogitSet logits = LogitSet::load(files.logits);
        Mat probs = temperature_scale(logits, temperature);
        int splits = std::min<int>(mf.is_splits, static_cast<int>(probs.rows));
        SplitScore score = inception_score(probs, std::max(splits, 1));
        target->is_mean = score.mean;
        target->is_std = score.stddev;
      }
      if (!files.sims.empty()) {
        target->rp = r_precision(load_matrix(files.sims));
      }
    }
  }
}

ArtifactAggregation aggregate_artifacts(const CampaignConfig& config, const Registry& registry,
                                        const std::vector<SeedRecord>& seeds,
                                        const RunManifest& manifest,
                                        const std::filesystem::path& run_dir) {
  ArtifactAggregation agg;
  agg.report.epsilon = config.epsilon;

  for (const auto& gen : config.generators) {
    BackendReport backend;
    backend.backend = gen.id;

    // Originals: one miss contribution per seed.
    {
      std::vector<MissCase> orig_cases;
      for (const auto& seed : seeds) {
        std::filesystem::path p = orig_miss_path(run_dir, gen.id, seed.id);
        if (!std::filesystem::exists(p)) continue;
        nlohmann::json doc = nlohmann::json::parse(read_file(p));
        orig_cases.push_back({class_sets_from_json(doc.at("input"), registry),
                              class_sets_from_json(doc.at("detected"), registry)});
      }
      backend.orig.cases = orig_cases.size();
      if (!orig_cases.empty()) {
        MissRates mr = miss_rates(orig_cases);
        backend.orig.miss_e = mr.entity;
        backend.orig.miss_r = mr.relation;
      }
    }

    for (Op op : config.operators) {
      SetMetrics metrics;
      std::vector<MRVerdict> verdicts;
      std::vector<MissCase> miss_cases;
      std::vector<DensityScore> density_scores;
      for (const auto& seed : seeds) {
        const std::string id = cell_id(gen.id, seed.id, op);
        auto status = manifest.status(id);
        if (!status) {
          agg.report.missing_cells.push_back(id);
          continue;
        }
        switch (*status) {
          case CellStatus::kCompleted: ++metrics.cells.completed; break;
          case CellStatus::kInapplicable: ++metrics.cells.inapplicable; break;
          case CellStatus::kFailed: ++metrics.cells.failed; break;
        }
        if (*status != CellStatus::kCompleted) continue;
        std::filesystem::path p = cell_file_path(run_dir, gen.id, seed.id, op);
        if (!std::filesystem::exists(p)) {
          agg.report.missing_cells.push_back(id);
          continue;
        }
        nlohmann::json doc = nlohmann::json::parse(read_file(p));
        const auto& v = doc.at("verdict");
        MRVerdict verdict;
        verdict.entity_violation = v.at("p_e").get<bool>();
        verdict.relation_violation = v.at("p_r").get<bool>();
        verdicts.push_back(verdict);
        miss_cases.push_back({class_sets_from_json(doc.at("miss").at("input"), registry),
                              class_sets_from_json(doc.at("miss").at("detected"), registry)});
        density_scores.push_back(
            {doc.value("follow_density", 0), verdict.clean() ? 1.0 : 0.0});
      }
      metrics.cases = verdicts.size();
      if (!verdicts.empty()) {
        ErrorRates er = error_rates(verdicts);
        metrics.error_e = er.entity;
        metrics.error_r = er.relation;
        MissRates mr = miss_rates(miss_cases);
        metrics.miss_e = mr.entity;
        metrics.miss_r = mr.relation;
        agg.report.density[gen.id + "/" + std::string(op_token(op))] =
            stratify_by_density(density_scores, config.epsilon);
      }
      agg.completed += metrics.cells.completed;
      agg.inapplicable += metrics.cells.inapplicable;
      agg.failed += metrics.cells.failed;
      backend.operators[op] = std::move(metrics);
    }
    agg.report.backends.push_back(std::move(backend));
  }
  std::sort(agg.report.backends.begin(), agg.report.backends.end(),
            [](const BackendReport& a, const BackendReport& b) { return a.backend < b.backend; });
  std::sort(agg.report.missing_cells.begin(), agg.report.missing_cells.end());

  apply_metric_files(config, &agg.report);
  return agg;
}

void write_reports(const std::filesystem::path& run_dir, const MetricReport& report) {
  write_file_atomic(run_dir / "report.json", report.to_json().dump(2) + "\n");
  write_file_atomic(run_dir / "report.csv", render_csv(report));
  write_file_atomic(run_dir / "report.md", render_markdown(report));
}

// One line per completed cell, in canonical (seed corpus, operator) order,
// so equal campaigns produce byte-identical files. The verdict fields are
// lifted to the top level; the full cell record rides along under "detail".
void merge_verdict_files(const CampaignConfig& config, const std::vector<SeedRecord>& seeds,
                         const std::filesystem::path& run_dir) {
  for (const auto& gen : config.generators) {
    std::ostringstream merged;
    for (const auto& seed : seeds) {
      for (Op op : config.operators) {
        std::filesystem::path p = cell_file_path(run_dir, gen.id, seed.id, op);
        if (!std::filesystem::exists(p)) continue;
        nlohmann::json doc = nlohmann::json::parse(read_file(p));
        nlohmann::json line;
        line["case_id"] = doc.at("cell");
        line["operator"] = doc.at("op");
        line["p_e"] = doc.at("verdict").at("p_e");
        line["p_r"] = doc.at("verdict").at("p_r");
        line["violated_clauses"] = doc.at("verdict").at("violated_clauses");
        line["witness"] = doc.at("verdict").at("witness");
        line["detail"] = std::move(doc);
        merged << line.dump() << "\n";
      }
    }
    write_file_atomic(run_dir / "verdicts" / (sanitize_filename(gen.id) + ".jsonl"),
                      merged.str());
  }
}

std::string compute_inputs_hash(const CampaignConfig& config) {
  // Runtime knobs (budget, concurrency) do not change what the campaign
  // computes, so resuming with different values is allowed.
  CampaignConfig identity = config;
  identity.generate_budget = 0;
  identity.concurrency = 1;
  std::string blob = identity.to_json().dump();
  blob += sha256_hex(read_file(config.seeds));
  blob += sha256_hex(read_file(config.registry));
  if (!config.templates.empty()) blob += sha256_hex(read_file(config.templates));
  if (!config.candidates.empty()) blob += sha256_hex(read_file(config.candidates));
  if (!config.synonyms.empty()) blob += sha256_hex(read_file(config.synonyms));
  return sha256_hex(blob);
}

}  // namespace

CampaignResult run_campaign(const CampaignConfig& config) {
  {
    std::vector<std::string> problems = validate_config(config);
    if (!problems.empty()) {
      std::string joined;
      for (const auto& p : problems) joined += p + "; ";
      raise(ErrorCode::kConfigError, joined);
    }
  }

  CampaignContext ctx;
  ctx.config = config;
  ctx.registry = std::make_shared<Registry>(
      Registry::load(config.registry, config.registry_limits));
  ctx.seeds = load_seed_corpus(config.seeds);
  ctx.templates = config.templates.empty() ? TemplateSet{} : TemplateSet::load(config.templates);
  ctx.candidates = config.candidates.empty()
                       ? CandidatePool::from_corpus(ctx.seeds, *ctx.registry)
                       : CandidatePool::load(config.candidates, *ctx.registry);
  if (!config.synonyms.empty()) ctx.synonyms = SynonymLexicon::load(config.synonyms);
  ctx.run_dir = config.output_dir;
  std::filesystem::create_directories(ctx.run_dir);

  write_file_atomic(ctx.run_dir / "config.snapshot.json", config.to_json().dump(2) + "\n");

  std::string inputs_hash = compute_inputs_hash(config);
  RunManifest manifest = RunManifest::open(ctx.run_dir, inputs_hash);
  ctx.manifest = &manifest;

  for (const auto& spec : config.generators) {
    std::unique_ptr<GeneratorBackend> backend;
    if (spec.type == "simulator") {
      backend = std::make_unique<SimulatorBackend>(spec.id, spec.simulator, ctx.registry);
    } else {
      backend = std::make_unique<HttpGeneratorBackend>(spec.id, spec.http);
    }
    GatewayConfig gw = spec.gateway;
    gw.call_budget = config.generate_budget;
    ctx.gateways.push_back(std::make_unique<GeneratorGateway>(
        std::move(backend), ctx.run_dir / "images", gw));
  }

  std::unique_ptr<DetectorBackend> det_backend;
  if (config.detector.type == "fixture") {
    det_backend = std::make_unique<FixtureDetector>(config.detector.id,
                                                    config.detector.fixture_dir);
  } else if (config.detector.type == "http") {
    det_backend = std::make_unique<HttpDetector>(config.detector.id, config.detector.http);
  } else {
    det_backend = std::make_unique<SidecarDetector>(config.detector.id);
  }
  ctx.detector = std::make_unique<DetectorGateway>(std::move(det_backend), ctx.registry,
                                                   config.detector_thresholds);

  std::vector<CellWork> cells;
  for (size_t b = 0; b < config.generators.size(); ++b)
    for (size_t s = 0; s < ctx.seeds.size(); ++s)
      for (Op op : config.operators) cells.push_back({b, s, op});

  std::atomic<bool> interrupted{false};

#pragma omp parallel for schedule(dynamic) num_threads(ctx.config.concurrency)
  for (long long i = 0; i < static_cast<long long>(cells.size()); ++i) {
    if (interrupted.load()) continue;
    const CellWork& work = cells[static_cast<size_t>(i)];
    const std::string id = cell_id(config.generators[work.backend_index].id,
                                   ctx.seeds[work.seed_index].id, work.op);
    if (manifest.status(id)) continue;  // resumed run: cell already settled
    try {
      process_cell(ctx, work);
      manifest.append({id, CellStatus::kCompleted, ""});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kBudgetExhausted) {
        interrupted.store(true);  // no marker: the cell is retried on resume
      } else if (inapplicable_code(e.code())) {
        manifest.append({id, CellStatus::kInapplicable, e.what()});
      } else {
        manifest.append({id, CellStatus::kFailed, e.what()});
      }
    } catch (const std::exception& e) {
      manifest.append({id, CellStatus::kFailed, e.what()});
    } catch (...) {
      manifest.append({id, CellStatus::kFailed, "unknown error"});
    }
  }

  merge_verdict_files(config, ctx.seeds, ctx.run_dir);

  // Failure ledger.
  {
    std::ostringstream failures;
    for (const auto& [cell, entry] : manifest.entries()) {
      if (entry.status != CellStatus::kFailed) continue;
      nlohmann::json doc;
      doc["cell"] = cell;
      doc["error"] = entry.detail;
      failures << doc.dump() << "\n";
    }
    write_file_atomic(ctx.run_dir / "failures.jsonl", failures.str());
  }

  ArtifactAggregation agg =
      aggregate_artifacts(config, *ctx.registry, ctx.seeds, manifest, ctx.run_dir);
  write_reports(ctx.run_dir, agg.report);

  CampaignResult result;
  result.report = std::move(agg.report);
  result.cells_total = cells.size();
  result.completed = agg.completed;
  result.inapplicable = agg.inapplicable;
  result.failed = agg.failed;
  result.interrupted = interrupted.load();
  for (const auto& gw : ctx.gateways) result.generator_calls += gw->backend_calls();
  return result;
}

MetricReport report_from_run_dir(const std::filesystem::path& run_dir) {
  std::filesystem::path snapshot = run_dir / "config.snapshot.json";
  if (!std::filesystem::exists(snapshot))
    raise(ErrorCode::kIncompleteRun, "no config snapshot in " + run_dir.string());
  CampaignConfig config = CampaignConfig::load(snapshot);
  Registry registry = Registry::load(config.registry, config.registry_limits);
  std::vector<SeedRecord> seeds = load_seed_corpus(config.seeds);
  RunManifest manifest = RunManifest::open(run_dir, "");
  ArtifactAggregation agg = aggregate_artifacts(config, registry, seeds, manifest, run_dir);
  return agg.report;
}

MetricReport reevaluate_run(const std::filesystem::path& run_dir) {
  std::filesystem::path snapshot = run_dir / "config.snapshot.json";
  if (!std::filesystem::exists(snapshot))
    raise(ErrorCode::kIncompleteRun, "no config snapshot in " + run_dir.string());
  CampaignConfig config = CampaignConfig::load(snapshot);
  auto registry = std::make_shared<Registry>(
      Registry::load(config.registry, config.registry_limits));
  std::vector<SeedRecord> seeds = load_seed_corpus(config.seeds);
  RunManifest manifest = RunManifest::open(run_dir, "");

  for (const auto& gen : config.generators) {
    for (const auto& seed : seeds) {
      for (Op op : config.operators) {
        std::filesystem::path p = cell_file_path(run_dir, gen.id, seed.id, op);
        if (!std::filesystem::exists(p)) continue;
        nlohmann::json doc = nlohmann::json::parse(read_file(p));
        MutationRecord record = MutationRecord::from_json(doc.at("record"), *registry);

        auto detection_for = [&](const std::string& image_name) {
          std::filesystem::path dp =
              run_dir / "detections" / sanitize_filename(gen.id) / (image_name + ".json");
          if (!std::filesystem::exists(dp))
            raise(ErrorCode::kIncompleteRun, "missing detection " + dp.string());
          return DetectionResult::from_json(nlohmann::json::parse(read_file(dp)), *registry);
        };
        DetectionResult baseline = detection_for(doc.at("baseline_image").get<std::string>());
        DetectionResult follow = detection_for(doc.at("follow_image").get<std::string>());

        MRVerdict verdict = check({record, baseline, follow});
        doc["verdict"] = verdict.to_json(*registry);
        doc["miss"] = {
            {"input", class_sets_json(pool_class_sets(record.follow_pool), *registry)},
            {"detected", class_sets_json(to_er_sets(follow), *registry)}};
        write_file_atomic(p, doc.dump(2));
      }
    }
  }

  merge_verdict_files(config, seeds, run_dir);
  ArtifactAggregation agg = aggregate_artifacts(config, *registry, seeds, manifest, run_dir);
  write_reports(run_dir, agg.report);
  return agg.report;
}

}  // namespace t2imt
