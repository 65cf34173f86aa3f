// Copyright 2026 The fairprompt Authors
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

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <thread>

#include "fairprompt/gateway/cache.hpp"
#include "fairprompt/gateway/providers.hpp"

namespace fairprompt::gateway {

struct GatewayStats {
  std::uint64_t requests = 0;
  std::uint64_t provider_invocations = 0;
  std::uint64_t retries = 0;
  std::uint64_t cache_hits = 0;
};

inline json to_json(const GatewayStats& s) {
  return json{{"requests", s.requests},
              {"provider_invocations", s.provider_invocations},
              {"retries", s.retries},
              {"cache_hits", s.cache_hits}};
}

inline bool is_transient(const ProviderFailure& f) {
  switch (f.code()) {
    case ErrorCode::RateLimited:
    case ErrorCode::Timeout: return true;
    case ErrorCode::ProviderError: return f.status() >= 500;
    default: return false;
  }
}

/// Full-jitter exponential backoff: uniform in [0, min(cap, base * 2^attempt)].
inline double backoff_delay_s(int attempt, double base_s, double cap_s, std::mt19937_64& rng) {
  const double ceiling = std::min(cap_s, base_s * std::ldexp(1.0, std::min(attempt, 60)));
  return std::uniform_real_distribution<double>(0.0, ceiling)(rng);
}

/// Thread-safe access to one endpoint. At most max_concurrent provider
/// attempts are in flight; backoff sleeps do not hold a slot.
class Gateway {
 public:
  Gateway(Endpoint endpoint, std::shared_ptr<Provider> provider, std::optional<std::filesystem::path> cache_dir = {})
      : endpoint_(std::move(endpoint)),
        provider_(std::move(provider)),
        slots_(std::max(1, endpoint_.max_concurrent)),
        jitter_(std::random_device{}()) {
    if (cache_dir) cache_.emplace(*cache_dir);
  }

  const Endpoint& endpoint() const { return endpoint_; }
  const std::string& model_id() const { return endpoint_.model_id; }

  ChatResponse complete(const ChatRequest& request) {
    validate(request);
    requests_++;
    for (int attempt = 0;; ++attempt) {
      try {
        slots_.acquire();
        invocations_++;
        struct Release {
          std::counting_semaphore<1024>& s;
          ~Release() { s.release(); }
        } release{slots_};
        return provider_->invoke(request);
      } catch (const ProviderFailure& f) {
        if (!is_transient(f) || attempt >= endpoint_.max_retries) throw;
      }
      retries_++;
      double delay;
      {
        std::lock_guard lock(jitter_mu_);
        delay = backoff_delay_s(attempt, endpoint_.backoff_base_s, endpoint_.backoff_cap_s, jitter_);
      }
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
  }

  /// Cache hit: no provider call and cached=true. Miss: complete() and persist.
  ChatResponse cached_complete(const ChatRequest& request, const std::filesystem::path& cache_dir) {
    return cached_complete(request, ResponseCache(cache_dir));
  }

  /// Uses the gateway's own cache when configured.
  ChatResponse call(const ChatRequest& request) {
    return cache_ ? cached_complete(request, *cache_) : complete(request);
  }

  GatewayStats stats() const {
    return {requests_.load(), invocations_.load(), retries_.load(), cache_hits_.load()};
  }

 private:
  ChatResponse cached_complete(const ChatRequest& request, const ResponseCache& cache) {
    validate(request);
    const auto key = cache_key(request);
    if (auto hit = cache.get(key)) {
      requests_++;
      cache_hits_++;
      return *hit;
    }
    auto response = complete(request);
    // failed generations are not worth replaying
    if (response.finish_reason != FinishReason::error) cache.put(key, request, response);
    response.cached = false;
    return response;
  }

  Endpoint endpoint_;
  std::shared_ptr<Provider> provider_;
  std::optional<ResponseCache> cache_;
  std::counting_semaphore<1024> slots_;
  std::mutex jitter_mu_;
  std::mt19937_64 jitter_;
  std::atomic<std::uint64_t> requests_{0}, invocations_{0}, retries_{0}, cache_hits_{0};
};

/// Builds the provider for `endpoint`. Rule stubs answer from `key`.
inline std::shared_ptr<Provider> make_provider(const Endpoint& endpoint, std::shared_ptr<const AnswerKey> key = nullptr) {
  validate(endpoint);
  switch (endpoint.kind) {
    case EndpointKind::http_chat: return std::make_shared<HttpChatProvider>(endpoint);
    case EndpointKind::scripted_stub: return std::make_shared<ScriptedStub>(endpoint);
    case EndpointKind::rule_stub: return std::make_shared<RuleStub>(endpoint, std::move(key));
  }
  fail(ErrorCode::ConfigError, "unsupported endpoint kind");
}

/// Standalone rule stub for a policy config.
inline std::shared_ptr<RuleStub> rule_stub_policy(const json& policy_config, std::shared_ptr<const AnswerKey> key = nullptr,
                                                  std::vector<ScriptRule> script = {}) {
  Endpoint e;
  e.kind = EndpointKind::rule_stub;
  e.model_id = "rule_stub";
  e.policy = policy_config;
  e.script = std::move(script);
  return std::make_shared<RuleStub>(e, std::move(key));
}

}  // namespace fairprompt::gateway
