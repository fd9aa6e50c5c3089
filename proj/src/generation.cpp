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

#include "t2imt/generation.hpp"

#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "t2imt/rng.hpp"
#include "t2imt/util.hpp"

namespace t2imt {

std::string request_cache_key(const GenRequest& req) {
  std::string canonical = req.backend_id;
  canonical += '\x1f';
  canonical += req.prompt;
  canonical += '\x1f';
  canonical += std::to_string(req.width) + "x" + std::to_string(req.height);
  canonical += '\x1f';
  canonical += req.request_seed ? std::to_string(*req.request_seed) : "-";
  return sha256_hex(canonical);
}

// ---------------------------------------------------------------------------
// Simulator

SimulatorBackend::SimulatorBackend(std::string id, SimulatorConfig cfg,
                                   std::shared_ptr<const Registry> reg)
    : id_(std::move(id)), cfg_(cfg), registry_(std::move(reg)) {
  auto in_range = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_range(cfg_.p_drop_entity) || !in_range(cfg_.p_drop_relation) ||
      !in_range(cfg_.p_swap_relation))
    raise(ErrorCode::kConfigError, "simulator probabilities must be in [0, 1]");
}

GeneratedPayload SimulatorBackend::generate_payload(const GenRequest& req) {
  if (req.prompt.empty()) raise(ErrorCode::kInvalidInput, "empty prompt");
  if (req.width <= 0 || req.height <= 0) raise(ErrorCode::kInvalidInput, "non-positive size");

  auto surface = naive_extract(req.prompt, *registry_);
  if (surface.empty())
    raise(ErrorCode::kUnparseablePrompt, "no triples recognized in '" + req.prompt + "'");
  ERPool pool = build_pool(req.prompt, surface, *registry_, false).pool;
  if (pool.empty())
    raise(ErrorCode::kUnparseablePrompt, "no canonical triples in '" + req.prompt + "'");

  // Fault draws depend only on the configured seed and the request content.
  uint64_t seed = derive_seed(cfg_.rng_seed,
                              {fnv1a64(req.prompt), req.request_seed.value_or(0),
                               static_cast<uint64_t>(req.width),
                               static_cast<uint64_t>(req.height)});
  Rng rng(seed);

  std::vector<EntityId> surviving;
  for (EntityId e : pool.entity_set()) {
    if (!rng.bernoulli(cfg_.p_drop_entity)) surviving.push_back(e);
  }

  struct RenderedTriple {
    EntityId subject;
    RelationId predicate;
    EntityId object;
  };
  std::vector<RenderedTriple> rendered;
  for (const ERTriple& t : pool.triples()) {
    if (!set_contains(surviving, t.subject) || !set_contains(surviving, t.object))
      continue;  // follow-on: a dropped entity takes its relations with it
    if (rng.bernoulli(cfg_.p_drop_relation)) continue;
    RelationId predicate = t.predicate;
    if (rng.bernoulli(cfg_.p_swap_relation) && registry_->relation_count() > 1) {
      size_t pick = rng.uniform_index(registry_->relation_count() - 1);
      int other = static_cast<int>(pick) >= predicate.value ? static_cast<int>(pick) + 1
                                                            : static_cast<int>(pick);
      predicate = RelationId{other};
    }
    rendered.push_back({t.subject, predicate, t.object});
  }

  nlohmann::json sidecar;
  auto& ents = sidecar["entities"] = nlohmann::json::array();
  for (EntityId e : surviving) ents.push_back(registry_->entity(e).label);
  auto& rels = sidecar["relations"] = nlohmann::json::array();
  for (const auto& t : rendered)
    rels.push_back({registry_->entity(t.subject).label, registry_->relation(t.predicate).label,
                    registry_->entity(t.object).label});

  // Placeholder image: deterministic noise, PPM P6.
  GeneratedPayload payload;
  payload.extension = "ppm";
  payload.sidecar = std::move(sidecar);
  std::string header = "P6\n" + std::to_string(req.width) + " " + std::to_string(req.height) +
                       "\n255\n";
  payload.bytes = header;
  Rng pixel_rng(derive_seed(seed, {fnv1a64("pixels")}));
  size_t n = static_cast<size_t>(req.width) * static_cast<size_t>(req.height) * 3;
  payload.bytes.reserve(header.size() + n);
  for (size_t i = 0; i < n; ++i)
    payload.bytes.push_back(static_cast<char>(pixel_rng.next() & 0xff));
  return payload;
}

// ---------------------------------------------------------------------------
// HTTP backend

namespace {

void split_endpoint(const std::string& endpoint, std::string* host, std::string* path) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos)
    raise(ErrorCode::kConfigError, "bad endpoint " + endpoint);
  auto path_begin = endpoint.find('/', scheme_end + 3);
  *host = endpoint.substr(0, path_begin);
  *path = path_begin == std::string::npos ? "/" : endpoint.substr(path_begin);
}

std::string sniff_extension(const std::string& bytes) {
  if (bytes.size() >= 4 && bytes.compare(0, 4, "\x89PNG") == 0) return "png";
  if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xff &&
      static_cast<unsigned char>(bytes[1]) == 0xd8 &&
      static_cast<unsigned char>(bytes[2]) == 0xff)
    return "jpg";
  if (bytes.size() >= 2 && bytes.compare(0, 2, "P6") == 0) return "ppm";
  return "bin";
}

}  // namespace

GeneratedPayload HttpGeneratorBackend::generate_payload(const GenRequest& req) {
  std::string host, path;
  split_endpoint(cfg_.endpoint, &host, &path);

  httplib::Client client(host);
  client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
  client.set_connection_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);

  httplib::Headers headers;
  if (!cfg_.api_key_env.empty()) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (!key)
      raise(ErrorCode::kConfigError, "credential env var " + cfg_.api_key_env + " not set");
    std::string value = cfg_.auth_scheme.empty() ? key : cfg_.auth_scheme + " " + key;
    headers.emplace(cfg_.auth_header, value);
  }

  nlohmann::json body;
  body[cfg_.prompt_field] = req.prompt;
  body[cfg_.width_field] = req.width;
  body[cfg_.height_field] = req.height;
  if (req.request_seed) body[cfg_.seed_field] = *req.request_seed;

  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) raise(ErrorCode::kBackendTimeout, "no response from " + cfg_.endpoint);
  if (res->status == 429) {
    int retry_after_ms = 0;
    if (res->has_header("Retry-After")) {
      try {
        retry_after_ms = std::stoi(res->get_header_value("Retry-After")) * 1000;
      } catch (...) {
      }
    }
    throw RateLimitedError("429 from " + cfg_.endpoint, retry_after_ms);
  }
  if (res->status < 200 || res->status >= 300)
    throw BackendRejectedError(
        "status " + std::to_string(res->status) + "; body: " + res->body.substr(0, 512),
        res->status);

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::kMalformedResponse,
          std::string(e.what()) + "; body: " + res->body.substr(0, 512));
  }

  GeneratedPayload payload;
  if (doc.contains(cfg_.b64_field)) {
    payload.bytes = base64_decode(doc.at(cfg_.b64_field).get<std::string>());
  } else if (doc.contains(cfg_.url_field)) {
    std::string url = doc.at(cfg_.url_field).get<std::string>();
    std::string img_host, img_path;
    split_endpoint(url, &img_host, &img_path);
    httplib::Client img_client(img_host);
    img_client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
    auto img = img_client.Get(img_path);
    if (!img) raise(ErrorCode::kBackendTimeout, "image fetch from " + url);
    if (img->status < 200 || img->status >= 300)
      throw BackendRejectedError("image fetch status " + std::to_string(img->status), img->status);
    payload.bytes = img->body;
  } else {
    raise(ErrorCode::kMalformedResponse,
          "response has neither " + cfg_.b64_field + " nor " + cfg_.url_field +
              "; body: " + res->body.substr(0, 512));
  }
  payload.extension = sniff_extension(payload.bytes);
  return payload;
}

// ---------------------------------------------------------------------------
// Gateway

struct GeneratorGateway::InFlight {
  std::mutex m;
  std::condition_variable cv;
  bool done = false;
  GenResult result;
  std::exception_ptr error;
};

GeneratorGateway::GeneratorGateway(std::unique_ptr<GeneratorBackend> backend,
                                   std::filesystem::path store_dir, GatewayConfig cfg,
                                   Sleeper sleeper)
    : backend_(std::move(backend)),
      store_dir_(std::move(store_dir)),
      cfg_(cfg),
      sleeper_(std::move(sleeper)) {
  if (!sleeper_)
    sleeper_ = [](int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
  std::filesystem::create_directories(store_dir_ / "requests");
  tokens_ = static_cast<double>(cfg_.burst);
  last_refill_ = std::chrono::steady_clock::now();
}

GeneratorGateway::~GeneratorGateway() = default;

GenResult GeneratorGateway::generate(const GenRequest& req) {
  if (req.prompt.empty()) raise(ErrorCode::kInvalidInput, "empty prompt");
  if (req.width <= 0 || req.height <= 0)
    raise(ErrorCode::kInvalidInput, "image dimensions must be positive");

  const std::string key = request_cache_key(req);
  const std::filesystem::path index_path = store_dir_ / "requests" / (key + ".json");

  auto load_cached = [&]() -> std::optional<GenResult> {
    if (!std::filesystem::exists(index_path)) return std::nullopt;
    nlohmann::json doc = nlohmann::json::parse(read_file(index_path));
    GenResult r;
    r.image_ref = store_dir_ / doc.at("image").get<std::string>();
    r.backend_id = backend_->id();
    r.from_cache = true;
    r.attempt_count = 0;
    if (!std::filesystem::exists(r.image_ref))
      raise(ErrorCode::kPersistFailure, "index entry without image: " + r.image_ref.string());
    return r;
  };

  if (auto cached = load_cached()) return *cached;

  // Single-flight: concurrent identical requests wait for the leader.
  std::shared_ptr<InFlight> flight;
  bool leader = false;
  {
    std::unique_lock lock(mu_);
    auto it = pending_.find(key);
    if (it != pending_.end()) {
      flight = it->second;
    } else {
      flight = std::make_shared<InFlight>();
      pending_[key] = flight;
      leader = true;
    }
  }
  if (!leader) {
    std::unique_lock fl(flight->m);
    flight->cv.wait(fl, [&] { return flight->done; });
    if (flight->error) std::rethrow_exception(flight->error);
    GenResult r = flight->result;
    r.from_cache = true;
    r.attempt_count = 0;
    return r;
  }

  GenResult result;
  std::exception_ptr error;
  try {
    if (auto cached = load_cached()) {
      result = *cached;
    } else {
      result = call_backend(req, key);
    }
  } catch (...) {
    error = std::current_exception();
  }
  {
    std::unique_lock lock(mu_);
    pending_.erase(key);
  }
  {
    std::unique_lock fl(flight->m);
    flight->done = true;
    flight->result = result;
    flight->error = error;
  }
  flight->cv.notify_all();
  if (error) std::rethrow_exception(error);
  return result;
}

GenResult GeneratorGateway::call_backend(const GenRequest& req, const std::string& request_key) {
  // Bounded in-flight slot.
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < cfg_.max_in_flight; });
    ++in_flight_;
  }
  struct SlotRelease {
    GeneratorGateway* g;
    ~SlotRelease() {
      std::unique_lock lock(g->mu_);
      --g->in_flight_;
      g->cv_.notify_one();
    }
  } release{this};

  // Token bucket.
  if (cfg_.rate_per_s > 0) {
    for (;;) {
      int wait_ms = 0;
      {
        std::unique_lock lock(mu_);
        auto now = std::chrono::steady_clock::now();
        double elapsed = std::chrono::duration<double>(now - last_refill_).count();
        last_refill_ = now;
        tokens_ = std::min(tokens_ + elapsed * cfg_.rate_per_s, static_cast<double>(cfg_.burst));
        if (tokens_ >= 1.0) {
          tokens_ -= 1.0;
        } else {
          wait_ms = static_cast<int>((1.0 - tokens_) / cfg_.rate_per_s * 1000.0) + 1;
        }
      }
      if (wait_ms == 0) break;
      sleeper_(wait_ms);
    }
  }

  if (cfg_.call_budget > 0) {
    uint64_t before = backend_calls_.fetch_add(1);
    if (before >= cfg_.call_budget) {
      backend_calls_.fetch_sub(1);
      raise(ErrorCode::kBudgetExhausted,
            "generator call budget " + std::to_string(cfg_.call_budget) + " reached");
    }
  } else {
    backend_calls_.fetch_add(1);
  }

  auto started = std::chrono::steady_clock::now();
  GeneratedPayload payload;
  int attempts = 0;
  for (;;) {
    ++attempts;
    try {
      payload = backend_->generate_payload(req);
      break;
    } catch (const Error& e) {
      bool retryable = e.code() == ErrorCode::kBackendTimeout ||
                       e.code() == ErrorCode::kRateLimited;
      if (const auto* rejected = dynamic_cast<const BackendRejectedError*>(&e))
        retryable = rejected->status() >= 500;
      if (!retryable || attempts >= cfg_.retry.max_attempts) throw;

      int delay = static_cast<int>(cfg_.retry.backoff_base_ms *
                                   std::pow(cfg_.retry.backoff_factor, attempts - 1));
      if (const auto* limited = dynamic_cast<const RateLimitedError*>(&e)) {
        if (limited->retry_after_ms() > 0) delay = limited->retry_after_ms();
      }
      sleeper_(std::min(delay, cfg_.retry.backoff_cap_ms));
    }
  }
  auto finished = std::chrono::steady_clock::now();

  // Content-addressed persistence.
  std::string content_hash = sha256_hex(payload.bytes);
  std::filesystem::path image_name = content_hash + "." + payload.extension;
  std::filesystem::path image_path = store_dir_ / image_name;
  write_file_atomic(image_path, payload.bytes);
  if (payload.sidecar)
    write_file_atomic(image_path.string() + ".sidecar.json", payload.sidecar->dump(2));
  nlohmann::json index;
  index["image"] = image_name.string();
  index["request_key"] = request_key;
  index["backend"] = backend_->id();
  write_file_atomic(store_dir_ / "requests" / (request_key + ".json"), index.dump(2));

  GenResult result;
  result.image_ref = image_path;
  result.backend_id = backend_->id();
  result.latency_ms =
      std::chrono::duration<double, std::milli>(finished - started).count();
  result.attempt_count = attempts;
  result.from_cache = false;
  return result;
}

}  // namespace t2imt
