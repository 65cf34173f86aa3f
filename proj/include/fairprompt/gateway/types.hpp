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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairprompt/error.hpp"

namespace fairprompt::gateway {

using nlohmann::json;

enum class Role { user, assistant };

inline std::string_view to_string(Role r) { return r == Role::user ? "user" : "assistant"; }

inline Role parse_role(std::string_view s) {
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  fail(ErrorCode::MalformedRecord, "unknown role: " + std::string(s));
}

struct Message {
  Role role = Role::user;
  std::string content;
};

struct ChatRequest {
  std::string model_id;
  std::optional<std::string> system_prompt;
  std::vector<Message> messages;
  double temperature = 0.0;
  int max_tokens = 512;
  std::optional<std::int64_t> request_seed;

  const std::string& last_user_message() const { return messages.back().content; }
};

inline ChatRequest user_request(std::string model_id, std::string content, std::optional<std::string> system_prompt = {}) {
  ChatRequest r;
  r.model_id = std::move(model_id);
  r.system_prompt = std::move(system_prompt);
  r.messages.push_back({Role::user, std::move(content)});
  return r;
}

inline void validate(const ChatRequest& r) {
  if (r.messages.empty()) fail(ErrorCode::InvalidArgument, "request has no messages");
  if (r.messages.back().role != Role::user) fail(ErrorCode::InvalidArgument, "last message must be from the user");
  if (!(r.temperature >= 0.0)) fail(ErrorCode::InvalidArgument, "temperature must be >= 0");
  if (r.max_tokens <= 0) fail(ErrorCode::InvalidArgument, "max_tokens must be > 0");
}

enum class FinishReason { stop, length, error };

inline std::string_view to_string(FinishReason f) {
  switch (f) {
    case FinishReason::stop: return "stop";
    case FinishReason::length: return "length";
    case FinishReason::error: return "error";
  }
  return "error";
}

inline FinishReason parse_finish_reason(std::string_view s) {
  if (s == "stop") return FinishReason::stop;
  if (s == "length") return FinishReason::length;
  return FinishReason::error;
}

struct TokenUsage {
  int prompt = 0;
  int completion = 0;
};

struct ChatResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::stop;
  TokenUsage token_usage;
  std::string provider;
  bool cached = false;
};

enum class EndpointKind { http_chat, scripted_stub, rule_stub };

inline std::string_view to_string(EndpointKind k) {
  switch (k) {
    case EndpointKind::http_chat: return "http_chat";
    case EndpointKind::scripted_stub: return "scripted_stub";
    case EndpointKind::rule_stub: return "rule_stub";
  }
  return "?";
}

inline EndpointKind parse_endpoint_kind(std::string_view s) {
  if (s == "http_chat") return EndpointKind::http_chat;
  if (s == "scripted_stub") return EndpointKind::scripted_stub;
  if (s == "rule_stub") return EndpointKind::rule_stub;
  fail(ErrorCode::ConfigError, "unknown endpoint kind: " + std::string(s));
}

/// One scripted reply. `match` is compared against the last user message,
/// exactly or as a substring depending on `contains`.
struct ScriptRule {
  std::string match;
  std::string reply;
  bool contains = false;
};

struct Endpoint {
  EndpointKind kind = EndpointKind::scripted_stub;
  std::string model_id;
  std::optional<std::string> base_url;
  std::optional<std::string> auth_ref;
  int max_concurrent = 4;
  int max_retries = 5;
  double timeout_s = 60.0;
  double backoff_base_s = 0.5;
  double backoff_cap_s = 30.0;
  // stubs
  std::vector<ScriptRule> script;
  std::optional<std::string> default_reply;
  std::optional<json> policy;  // rule_stub policy_config
};

inline void validate(const Endpoint& e) {
  if (e.kind == EndpointKind::http_chat && !e.base_url) fail(ErrorCode::ConfigError, "http_chat endpoint needs base_url");
  if (e.max_concurrent < 1) fail(ErrorCode::ConfigError, "max_concurrent must be >= 1");
  if (e.max_retries < 0) fail(ErrorCode::ConfigError, "max_retries must be >= 0");
  if (e.kind == EndpointKind::rule_stub && !e.policy) fail(ErrorCode::ConfigError, "rule_stub endpoint needs a policy");
}

inline json to_json(const Message& m) { return json{{"role", to_string(m.role)}, {"content", m.content}}; }

inline json to_json(const ChatRequest& r) {
  json j;
  j["model_id"] = r.model_id;
  j["system_prompt"] = r.system_prompt ? json(*r.system_prompt) : json(nullptr);
  j["messages"] = json::array();
  for (const auto& m : r.messages) j["messages"].push_back(to_json(m));
  j["temperature"] = r.temperature;
  j["max_tokens"] = r.max_tokens;
  j["request_seed"] = r.request_seed ? json(*r.request_seed) : json(nullptr);
  return j;
}

inline ChatRequest request_from_json(const json& j) {
  ChatRequest r;
  r.model_id = j.at("model_id").get<std::string>();
  if (!j.at("system_prompt").is_null()) r.system_prompt = j.at("system_prompt").get<std::string>();
  for (const auto& m : j.at("messages"))
    r.messages.push_back({parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
  r.temperature = j.at("temperature").get<double>();
  r.max_tokens = j.at("max_tokens").get<int>();
  if (!j.at("request_seed").is_null()) r.request_seed = j.at("request_seed").get<std::int64_t>();
  return r;
}

inline json to_json(const ChatResponse& r) {
  return json{{"text", r.text},
              {"finish_reason", to_string(r.finish_reason)},
              {"token_usage", {{"prompt", r.token_usage.prompt}, {"completion", r.token_usage.completion}}},
              {"provider", r.provider}};
}

inline ChatResponse response_from_json(const json& j) {
  ChatResponse r;
  r.text = j.at("text").get<std::string>();
  r.finish_reason = parse_finish_reason(j.at("finish_reason").get<std::string>());
  r.token_usage.prompt = j.at("token_usage").at("prompt").get<int>();
  r.token_usage.completion = j.at("token_usage").at("completion").get<int>();
  r.provider = j.at("provider").get<std::string>();
  return r;
}

/// Endpoint config as it appears in run configs:
///   {"kind": "http_chat", "model_id": "...", "base_url": "...", "auth_ref": "OPENAI_API_KEY", ...}
///   {"kind": "scripted_stub", "script": [{"match": "Q1", "reply": "client"}], "default_reply": "..."}
///   {"kind": "rule_stub", "policy": {"name": "answer_stereotype"}}
inline Endpoint endpoint_from_json(const json& j) {
  Endpoint e;
  try {
    e.kind = parse_endpoint_kind(j.at("kind").get<std::string>());
    e.model_id = j.value("model_id", std::string(to_string(e.kind)));
    if (j.contains("base_url")) e.base_url = j.at("base_url").get<std::string>();
    if (j.contains("auth_ref")) e.auth_ref = j.at("auth_ref").get<std::string>();
    e.max_concurrent = j.value("max_concurrent", e.max_concurrent);
    e.max_retries = j.value("max_retries", e.max_retries);
    e.timeout_s = j.value("timeout_s", e.timeout_s);
    e.backoff_base_s = j.value("backoff_base_s", e.backoff_base_s);
    e.backoff_cap_s = j.value("backoff_cap_s", e.backoff_cap_s);
    if (j.contains("script")) {
      for (const auto& rule : j.at("script"))
        e.script.push_back({rule.at("match").get<std::string>(), rule.at("reply").get<std::string>(),
                            rule.value("contains", false)});
    }
    if (j.contains("default_reply")) e.default_reply = j.at("default_reply").get<std::string>();
    if (j.contains("policy")) e.policy = j.at("policy");
  } catch (const json::exception& ex) {
    fail(ErrorCode::ConfigError, std::string("bad endpoint config: ") + ex.what());
  }
  validate(e);
  return e;
}

inline json to_json(const Endpoint& e) {
  json j{{"kind", to_string(e.kind)},
         {"model_id", e.model_id},
         {"max_concurrent", e.max_concurrent},
         {"max_retries", e.max_retries},
         {"timeout_s", e.timeout_s},
         {"backoff_base_s", e.backoff_base_s},
         {"backoff_cap_s", e.backoff_cap_s}};
  if (e.base_url) j["base_url"] = *e.base_url;
  if (e.auth_ref) j["auth_ref"] = *e.auth_ref;
  if (!e.script.empty()) {
    j["script"] = json::array();
    for (const auto& r : e.script) j["script"].push_back({{"match", r.match}, {"reply", r.reply}, {"contains", r.contains}});
  }
  if (e.default_reply) j["default_reply"] = *e.default_reply;
  if (e.policy) j["policy"] = *e.policy;
  return j;
}

}  // namespace fairprompt::gateway
