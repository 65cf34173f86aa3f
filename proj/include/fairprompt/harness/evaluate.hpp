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
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairprompt/corpus/query.hpp"
#include "fairprompt/extract/answer.hpp"
#include "fairprompt/gateway/gateway.hpp"
#include "fairprompt/metrics/report.hpp"
#include "fairprompt/pipeline/selection.hpp"

namespace fairprompt::harness {

using nlohmann::json;

struct EvalOptions {
  int repetitions = 3;
  std::uint64_t seed = 0;
  double temperature = 0.0;
  int max_tokens = 512;
};

/// Outcomes in example order. When a call fails, `outcomes` holds every
/// example finished before the abort and `error` the first failure.
struct EvalResult {
  std::vector<metrics::ExampleOutcome> outcomes;
  std::exception_ptr error;
  std::string failed_example;

  void rethrow_if_failed() const {
    if (error) std::rethrow_exception(error);
  }
};

inline gateway::ChatRequest query_request(const gateway::Gateway& gw, const corpus::Example& ex,
                                          const std::optional<std::string>& system_prompt, int rep,
                                          const EvalOptions& opt) {
  auto request = gateway::user_request(gw.model_id(), corpus::render_query(ex), system_prompt);
  request.temperature = opt.temperature;
  request.max_tokens = opt.max_tokens;
  request.request_seed = static_cast<std::int64_t>(opt.seed) + rep;
  return request;
}

/// m trials per example fanned out over max_concurrent workers.
inline EvalResult evaluate(gateway::Gateway& gw, const std::vector<corpus::Example>& examples,
                           const std::optional<std::string>& system_prompt, const EvalOptions& opt) {
  const std::size_t m = static_cast<std::size_t>(std::max(1, opt.repetitions));
  std::vector<std::optional<metrics::ExampleOutcome>> slots(examples.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex err_mu;
  EvalResult result;

  const auto work = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= examples.size() || abort) return;
      const auto& ex = examples[i];
      try {
        metrics::ExampleOutcome o;
        o.example_id = ex.id;
        for (std::size_t rep = 0; rep < m; ++rep) {
          auto response = gw.call(query_request(gw, ex, system_prompt, static_cast<int>(rep), opt));
          auto parsed = extract::extract_for(ex, response.text);
          if (ex.gold) o.verdicts.push_back(extract::judge(parsed, ex));
          o.responses.push_back(std::move(response.text));
          o.parsed.push_back(std::move(parsed));
        }
        slots[i] = std::move(o);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!result.error) {
          result.error = std::current_exception();
          result.failed_example = ex.id;
        }
        abort = true;
        return;
      }
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, gw.endpoint().max_concurrent)), examples.size());
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& s : slots)
    if (s) result.outcomes.push_back(std::move(*s));
  return result;
}

inline json to_json(const extract::ParsedAnswer& p) {
  json j{{"kind", extract::to_string(p.kind)}};
  if (const auto* e = p.entity()) j["value"] = *e;
  else if (const auto* o = p.option()) j["value"] = *o;
  else j["value"] = nullptr;
  return j;
}

/// One verdict-ledger line.
inline json to_json(const metrics::ExampleOutcome& o) {
  json j;
  j["example_id"] = o.example_id;
  j["responses"] = o.responses;
  j["parsed"] = json::array();
  for (const auto& p : o.parsed) j["parsed"].push_back(to_json(p));
  j["verdicts"] = json::array();
  for (auto v : o.verdicts) j["verdicts"].push_back(extract::to_string(v));
  if (!o.verdicts.empty()) j["acc"] = metrics::acc(metrics::TrialRecord{o.example_id, o.verdicts});
  return j;
}

inline std::string to_jsonl(const std::vector<metrics::ExampleOutcome>& outcomes) {
  std::string out;
  for (const auto& o : outcomes) out += to_json(o).dump() + "\n";
  return out;
}

/// Example-level verdicts (majority over repetitions) for gold-bearing items.
inline std::map<std::string, extract::Verdict> majority_verdicts(const std::vector<metrics::ExampleOutcome>& outcomes) {
  std::map<std::string, extract::Verdict> out;
  for (const auto& o : outcomes) {
    if (o.verdicts.empty()) continue;
    out[o.example_id] = pipeline::majority_verdict(o.verdicts);
  }
  return out;
}

}  // namespace fairprompt::harness
