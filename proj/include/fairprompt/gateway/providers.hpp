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

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <httplib.h>

#include "fairprompt/corpus/example.hpp"
#include "fairprompt/corpus/query.hpp"
#include "fairprompt/extract/answer.hpp"
#include "fairprompt/gateway/types.hpp"

namespace fairprompt::gateway {

/// One transport attempt. Implementations throw ProviderFailure; the gateway
/// decides what is retried.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual ChatResponse invoke(const ChatRequest& request) = 0;
  virtual std::string name() const = 0;
};

inline ChatResponse stub_response(std::string text, std::string provider) {
  ChatResponse r;
  r.text = std::move(text);
  r.finish_reason = r.text.empty() ? FinishReason::error : FinishReason::stop;
  r.provider = std::move(provider);
  return r;
}

inline const ScriptRule* match_script(const std::vector<ScriptRule>& script, const std::string& message) {
  for (const auto& rule : script)
    if (!rule.contains && rule.match == message) return &rule;
  for (const auto& rule : script)
    if (rule.contains && message.find(rule.match) != std::string::npos) return &rule;
  return nullptr;
}

/// Exact matches win over substring rules; substring rules apply in order.
class ScriptedStub : public Provider {
 public:
  explicit ScriptedStub(const Endpoint& e) : script_(e.script), default_reply_(e.default_reply) {}

  ChatResponse invoke(const ChatRequest& request) override {
    if (const auto* rule = match_script(script_, request.last_user_message())) return stub_response(rule->reply, name());
    if (default_reply_) return stub_response(*default_reply_, name());
    throw ProviderFailure(ErrorCode::ProviderError, 404, "no scripted reply for: " + request.last_user_message());
  }

  std::string name() const override { return "scripted_stub"; }

 private:
  std::vector<ScriptRule> script_;
  std::optional<std::string> default_reply_;
};

/// What a rule stub may answer for one rendered query.
struct KeyEntry {
  std::string gold_reply;
  std::string stereotype_reply;
};

inline constexpr std::string_view kUnknownReply = extract::kCannotBeDetermined;

/// Rendered query -> replies, built from the examples under evaluation.
class AnswerKey {
 public:
  void add(const corpus::Example& ex) { entries_[corpus::render_query(ex)] = entry_for(ex); }

  static AnswerKey from(const std::vector<corpus::Example>& examples) {
    AnswerKey k;
    for (const auto& ex : examples) k.add(ex);
    return k;
  }

  void merge(const AnswerKey& other) {
    for (const auto& [q, e] : other.entries_) entries_[q] = e;
  }

  const KeyEntry* find(const std::string& query) const {
    auto it = entries_.find(query);
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return entries_.size(); }

  static KeyEntry entry_for(const corpus::Example& ex) {
    using corpus::DatasetId;
    KeyEntry e;
    const auto option_text = [&](int idx) { return (*ex.options)[static_cast<std::size_t>(idx - 1)]; };
    const auto other_candidate = [&]() -> std::string {
      if (ex.candidate_entities)
        for (const auto& c : *ex.candidate_entities)
          if (ex.gold && c != *ex.gold) return c;
      return std::string("Someone else.");
    };
    e.gold_reply = ex.gold.value_or(std::string(kUnknownReply));
    e.stereotype_reply = e.gold_reply;
    switch (ex.dataset_id) {
      case DatasetId::winobias:
      case DatasetId::winogender:
        if (ex.polarity == corpus::Polarity::anti_stereo) e.stereotype_reply = other_candidate();
        break;
      case DatasetId::gap:
      case DatasetId::bug:
        // no occupation labels to lean on: the biased policy only gets
        // feminine-pronoun items wrong
        if (ex.polarity == corpus::Polarity::anti_stereo ||
            (ex.polarity == corpus::Polarity::not_applicable && ex.pronoun_gender == corpus::PronounGender::feminine))
          e.stereotype_reply = other_candidate();
        break;
      case DatasetId::bbq:
        if (auto b = ex.meta_option("biased_option")) e.stereotype_reply = std::to_string(*b);
        break;
      case DatasetId::stereoset: {
        const auto st = ex.meta_option("stereotype_option");
        const auto anti = ex.meta_option("anti_stereotype_option");
        if (st) e.stereotype_reply = std::to_string(*st);
        // an unbiased chooser splits evenly between the two meaningful options
        unsigned sum = 0;
        for (unsigned char c : ex.id) sum += c;
        const auto fair = (sum % 2 == 0) ? st : anti;
        e.gold_reply = fair ? std::to_string(*fair) : e.stereotype_reply;
        break;
      }
      case DatasetId::unqover:
        if (ex.options && ex.options->size() == 2)
          e.stereotype_reply = option_text(ex.meta("question_polarity") == std::optional<std::string>("negated") ? 2 : 1);
        break;
      case DatasetId::mcq_utility:
        break;
    }
    return e;
  }

 private:
  std::map<std::string, KeyEntry> entries_;
};

/// Deterministic test double. Script rules are consulted first, then the
/// answer key under the configured policy, then stage-prompt heuristics.
///
/// policy_config: {"name": "answer_gold" | "answer_stereotype" |
///   "answer_stereotype_unless_marker" | "scripted_sequence",
///   "marker": "[FAIR]", "sequence": ["...", ...]}
class RuleStub : public Provider {
 public:
  enum class Policy { answer_gold, answer_stereotype, answer_stereotype_unless_marker, scripted_sequence };

  RuleStub(const Endpoint& e, std::shared_ptr<const AnswerKey> key)
      : script_(e.script), default_reply_(e.default_reply), key_(std::move(key)) {
    const json& cfg = e.policy ? *e.policy : json::object();
    const std::string name = cfg.is_string() ? cfg.get<std::string>() : cfg.value("name", std::string());
    if (name == "answer_gold") policy_ = Policy::answer_gold;
    else if (name == "answer_stereotype") policy_ = Policy::answer_stereotype;
    else if (name == "answer_stereotype_unless_marker") policy_ = Policy::answer_stereotype_unless_marker;
    else if (name == "scripted_sequence") policy_ = Policy::scripted_sequence;
    else fail(ErrorCode::UnknownPolicy, "unknown rule_stub policy: '" + name + "'");
    if (cfg.is_object()) {
      marker_ = cfg.value("marker", marker_);
      if (cfg.contains("sequence")) sequence_ = cfg.at("sequence").get<std::vector<std::string>>();
    }
    if (policy_ == Policy::scripted_sequence && sequence_.empty())
      fail(ErrorCode::UnknownPolicy, "scripted_sequence needs a non-empty sequence");
  }

  ChatResponse invoke(const ChatRequest& request) override {
    return stub_response(reply(request), name());
  }

  std::string name() const override { return "rule_stub"; }

  std::string reply(const ChatRequest& request) {
    const auto& message = request.last_user_message();
    if (const auto* rule = match_script(script_, message)) return rule->reply;
    if (policy_ == Policy::scripted_sequence) {
      // the i-th distinct request gets sequence[i mod n]; repeats are stable
      std::lock_guard lock(mu_);
      const auto digest = to_json(request).dump();
      auto it = seen_.find(digest);
      if (it == seen_.end()) it = seen_.emplace(digest, sequence_[seen_.size() % sequence_.size()]).first;
      return it->second;
    }
    if (key_) {
      if (const auto* entry = key_->find(message)) {
        switch (policy_) {
          case Policy::answer_gold: return entry->gold_reply;
          case Policy::answer_stereotype: return entry->stereotype_reply;
          case Policy::answer_stereotype_unless_marker:
            return has_marker(request) ? entry->gold_reply : entry->stereotype_reply;
          case Policy::scripted_sequence: break;
        }
      }
    }
    if (auto r = stage_reply(message)) return *r;
    if (default_reply_) return *default_reply_;
    return std::string(kUnknownReply);
  }

 private:
  bool has_marker(const ChatRequest& request) const {
    if (request.system_prompt && request.system_prompt->find(marker_) != std::string::npos) return true;
    for (std::size_t i = 0; i + 1 < request.messages.size(); ++i)
      if (request.messages[i].content.find(marker_) != std::string::npos) return true;
    return false;
  }

  static std::optional<std::string> quoted_after(const std::string& text, std::string_view lead) {
    const auto at = text.find(lead);
    if (at == std::string::npos) return std::nullopt;
    const auto start = at + lead.size();
    const auto end = text.find('"', start);
    if (end == std::string::npos) return std::nullopt;
    return text.substr(start, end - start);
  }

  // Reasoning prompts either carry the correct answer or an earlier
  // reasoning; answer with a fixed three-step outline or echo the reasoning.
  static std::optional<std::string> stage_reply(const std::string& message) {
    if (message.find("is correct? If not") != std::string::npos) {
      if (auto r = quoted_after(message, "the reasonning:\"")) return *r;
    }
    if (auto answer = quoted_after(message, "given correct answer: \"")) {
      return "Step 1: Identify the candidate entities in the text. Step 2: Check which candidate fits the "
             "described action and its semantic role. Step 3: The answer is " +
             *answer + ".";
    }
    if (auto r = quoted_after(message, "the reasoning: \"")) return *r;
    return std::nullopt;
  }

  std::vector<ScriptRule> script_;
  std::optional<std::string> default_reply_;
  std::shared_ptr<const AnswerKey> key_;
  Policy policy_ = Policy::answer_gold;
  std::string marker_ = "[FAIR]";
  std::vector<std::string> sequence_;
  std::mutex mu_;
  std::map<std::string, std::string> seen_;
};

/// OpenAI-style chat-completions client. One attempt per invoke().
class HttpChatProvider : public Provider {
 public:
  explicit HttpChatProvider(const Endpoint& e) : endpoint_(e) {
    const std::string& url = *e.base_url;
    const auto scheme_end = url.find("://");
    const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    origin_ = path_start == std::string::npos ? url : url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }

  std::string name() const override { return "http_chat:" + endpoint_.model_id; }

  static json wire_body(const ChatRequest& request) {
    json body{{"model", request.model_id}, {"temperature", request.temperature}, {"max_tokens", request.max_tokens}};
    body["messages"] = json::array();
    if (request.system_prompt) body["messages"].push_back({{"role", "system"}, {"content", *request.system_prompt}});
    for (const auto& m : request.messages) body["messages"].push_back(to_json(m));
    if (request.request_seed) body["seed"] = *request.request_seed;
    return body;
  }

  ChatResponse invoke(const ChatRequest& request) override {
    httplib::Client client(origin_);
    const auto timeout = std::chrono::milliseconds(static_cast<long>(endpoint_.timeout_s * 1000));
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout) + std::chrono::seconds(1));
    httplib::Headers headers;
    if (endpoint_.auth_ref) {
      const char* token = std::getenv(endpoint_.auth_ref->c_str());
      if (!token || !*token) throw ProviderFailure(ErrorCode::AuthFailure, 0, "env var " + *endpoint_.auth_ref + " not set");
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
    auto res = client.Post(path_prefix_ + "/chat/completions", headers, wire_body(request).dump(), "application/json");
    if (!res) throw ProviderFailure(ErrorCode::Timeout, 0, httplib::to_string(res.error()));
    const int status = res->status;
    if (status == 401 || status == 403) throw ProviderFailure(ErrorCode::AuthFailure, status, res->body);
    if (status == 429) throw ProviderFailure(ErrorCode::RateLimited, status, res->body);
    if (status == 408) throw ProviderFailure(ErrorCode::Timeout, status, res->body);
    if (status < 200 || status >= 300) throw ProviderFailure(ErrorCode::ProviderError, status, res->body);
    try {
      const auto j = json::parse(res->body);
      const auto& choice = j.at("choices").at(0);
      ChatResponse r;
      const auto& content = choice.at("message").at("content");
      r.text = content.is_null() ? std::string() : content.get<std::string>();
      r.finish_reason = choice.contains("finish_reason") && choice.at("finish_reason").is_string()
                            ? parse_finish_reason(choice.at("finish_reason").get<std::string>())
                            : FinishReason::stop;
      if (r.finish_reason == FinishReason::stop && r.text.empty()) r.finish_reason = FinishReason::error;
      if (j.contains("usage") && j.at("usage").is_object()) {
        r.token_usage.prompt = j.at("usage").value("prompt_tokens", 0);
        r.token_usage.completion = j.at("usage").value("completion_tokens", 0);
      }
      r.provider = name();
      return r;
    } catch (const json::exception& ex) {
      throw ProviderFailure(ErrorCode::ProviderError, status, std::string("malformed body: ") + ex.what());
    }
  }

 private:
  Endpoint endpoint_;
  std::string origin_;
  std::string path_prefix_;
};

}  // namespace fairprompt::gateway
