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
// Uniform client for image-generation backends: remote HTTP services and
// the built-in scene simulator. The gateway persists images under a
// content-addressed store and never re-calls a backend for a request it has
// already served (idempotence keyed by backend, prompt, size and seed).

#ifndef T2IMT_GENERATION_HPP_
#define T2IMT_GENERATION_HPP_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "t2imt/er.hpp"
#include "t2imt/error.hpp"
#include "t2imt/synth.hpp"

namespace t2imt {

struct GenRequest {
  std::string prompt;
  int width = 512;
  int height = 512;
  std::string backend_id;
  std::optional<uint64_t> request_seed;
};

struct GenResult {
  std::filesystem::path image_ref;  // content-addressed: <sha256(bytes)>.<ext>
  std::string backend_id;
  double latency_ms = 0.0;
  int attempt_count = 0;  // backend attempts for this call; 0 when served from cache
  bool from_cache = false;
};

struct GeneratedPayload {
  std::string bytes;
  std::string extension = "bin";
  std::optional<nlohmann::json> sidecar;  // ground truth, when the backend knows it
};

class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  virtual std::string id() const = 0;
  virtual GeneratedPayload generate_payload(const GenRequest& req) = 0;
};

// ---------------------------------------------------------------------------
// Scene simulator. Parses the prompt back into a pool, applies the
// configured fault model and emits a placeholder image plus a sidecar
// listing exactly what was "rendered". Faults are derived from
// (rng_seed, request content) only, so identical requests always produce
// identical results.

struct SimulatorConfig {
  double p_drop_entity = 0.0;
  double p_drop_relation = 0.0;
  double p_swap_relation = 0.0;
  uint64_t rng_seed = 0;
};

class SimulatorBackend : public GeneratorBackend {
 public:
  SimulatorBackend(std::string id, SimulatorConfig cfg, std::shared_ptr<const Registry> reg);

  std::string id() const override { return id_; }
  GeneratedPayload generate_payload(const GenRequest& req) override;

 private:
  std::string id_;
  SimulatorConfig cfg_;
  std::shared_ptr<const Registry> registry_;
};

// ---------------------------------------------------------------------------
// Minimal HTTP adapter. POST {prompt, width, height, seed?} as JSON; the
// response carries image bytes base64-encoded or a URL to fetch. Field
// names are remappable per vendor; credentials come from the environment.

struct HttpGeneratorConfig {
  std::string endpoint;
  std::string api_key_env;                 // env var holding the credential; empty = none
  std::string auth_header = "Authorization";
  std::string auth_scheme = "Bearer";      // empty = raw value
  std::string prompt_field = "prompt";
  std::string width_field = "width";
  std::string height_field = "height";
  std::string seed_field = "seed";
  std::string b64_field = "image_b64";
  std::string url_field = "image_url";
  int timeout_ms = 60000;
};

class HttpGeneratorBackend : public GeneratorBackend {
 public:
  HttpGeneratorBackend(std::string id, HttpGeneratorConfig cfg)
      : id_(std::move(id)), cfg_(std::move(cfg)) {}
  std::string id() const override { return id_; }
  GeneratedPayload generate_payload(const GenRequest& req) override;

 private:
  std::string id_;
  HttpGeneratorConfig cfg_;
};

// ---------------------------------------------------------------------------
// Gateway: caching, retries with exponential backoff (Retry-After honored
// on rate limiting), a token-bucket rate limiter, bounded in-flight
// requests, and single-flight deduplication of concurrent identical calls.

// Carries the server's Retry-After so the gateway can honor it.
class RateLimitedError : public Error {
 public:
  RateLimitedError(const std::string& detail, int retry_after_ms)
      : Error(ErrorCode::kRateLimited, detail), retry_after_ms_(retry_after_ms) {}
  int retry_after_ms() const { return retry_after_ms_; }

 private:
  int retry_after_ms_;
};

class BackendRejectedError : public Error {
 public:
  BackendRejectedError(const std::string& detail, int status)
      : Error(ErrorCode::kBackendRejected, detail), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct RetryPolicy {
  int max_attempts = 4;
  int backoff_base_ms = 100;
  double backoff_factor = 2.0;
  int backoff_cap_ms = 10000;
};

struct GatewayConfig {
  RetryPolicy retry;
  double rate_per_s = 0.0;  // 0 = unlimited
  int burst = 1;
  int max_in_flight = 4;
  uint64_t call_budget = 0;  // 0 = unlimited; exceeded -> BudgetExhausted
};

using Sleeper = std::function<void(int /*ms*/)>;

class GeneratorGateway {
 public:
  GeneratorGateway(std::unique_ptr<GeneratorBackend> backend, std::filesystem::path store_dir,
                   GatewayConfig cfg = {}, Sleeper sleeper = {});
  ~GeneratorGateway();

  // Throws BackendTimeout / BackendRejected / RateLimited (after retries),
  // PersistFailure, BudgetExhausted.
  GenResult generate(const GenRequest& req);

  uint64_t backend_calls() const { return backend_calls_.load(); }
  const std::string backend_id() const { return backend_->id(); }
  const std::filesystem::path& store_dir() const { return store_dir_; }

 private:
  struct InFlight;
  GenResult call_backend(const GenRequest& req, const std::string& request_key);

  std::unique_ptr<GeneratorBackend> backend_;
  std::filesystem::path store_dir_;
  GatewayConfig cfg_;
  Sleeper sleeper_;

  std::atomic<uint64_t> backend_calls_{0};

  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  double tokens_ = 0.0;
  std::chrono::steady_clock::time_point last_refill_;
  std::map<std::string, std::shared_ptr<InFlight>> pending_;
};

// Canonical request identity used for the idempotence cache.
std::string request_cache_key(const GenRequest& req);

}  // namespace t2imt

#endif  // T2IMT_GENERATION_HPP_
