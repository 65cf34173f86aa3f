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

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fairprompt/gateway/gateway.hpp"
#include "fairprompt/pipeline/prompts.hpp"

namespace fairprompt::pipeline {

struct GenerationOptions {
  double temperature = 0.0;
  int max_tokens = 1024;
  std::optional<std::int64_t> request_seed;
};

struct Ablation {
  bool no_verification = false;
  bool no_filtering = false;
  bool no_refinement = false;
};

inline std::string to_string(const Ablation& a) {
  std::string s;
  if (a.no_verification) s += "no_verification,";
  if (a.no_filtering) s += "no_filtering,";
  if (a.no_refinement) s += "no_refinement,";
  if (s.empty()) return "full";
  s.pop_back();
  return s;
}

namespace detail {

inline ReasoningCandidate ask(gateway::Gateway& reference, const Demonstration& d, const std::string& prompt, Stage stage,
                              const GenerationOptions& opt) {
  auto request = gateway::user_request(reference.model_id(), prompt);
  request.temperature = opt.temperature;
  request.max_tokens = opt.max_tokens;
  request.request_seed = opt.request_seed;
  auto response = reference.call(request);
  if (is_blank(response.text))
    fail(ErrorCode::EmptyReasoning, to_string(stage) + " reasoning for " + d.example_id + " is blank");
  return {d.example_id, stage, response.text, reference.model_id()};
}

}  // namespace detail

inline ReasoningCandidate initial_reasoning(gateway::Gateway& reference, const Demonstration& d,
                                            const GenerationOptions& opt = {}) {
  return detail::ask(reference, d, render_initial(d), {StageKind::initial, 0}, opt);
}

inline ReasoningCandidate verify_reasoning(gateway::Gateway& reference, const Demonstration& d,
                                           const ReasoningCandidate& prior, const GenerationOptions& opt = {}) {
  if (prior.stage.kind != StageKind::initial) fail(ErrorCode::InvalidArgument, "verification expects an initial reasoning");
  return detail::ask(reference, d, render_verification(d, prior.reasoning), {StageKind::verified, 0}, opt);
}

/// Expects a verified prior, or an initial one when verification is ablated.
inline ReasoningCandidate filter_gender_independence(gateway::Gateway& reference, const Demonstration& d,
                                                     const ReasoningCandidate& prior, const GenerationOptions& opt = {}) {
  if (prior.stage.kind != StageKind::verified && prior.stage.kind != StageKind::initial)
    fail(ErrorCode::InvalidArgument, "filtering expects a verified reasoning");
  return detail::ask(reference, d, render_filtering(d, prior.reasoning), {StageKind::filtered, 0}, opt);
}

/// R sequential rounds, each refining the previous output. A blank reply
/// ends the chain early; completed rounds are kept.
inline std::vector<ReasoningCandidate> refine_iteratively(gateway::Gateway& reference, const Demonstration& d,
                                                          const ReasoningCandidate& prior, int rounds,
                                                          const GenerationOptions& opt = {}) {
  if (rounds < 1) fail(ErrorCode::InvalidArgument, "refinement needs R >= 1");
  std::vector<ReasoningCandidate> out;
  const ReasoningCandidate* last = &prior;
  for (int k = 1; k <= rounds; ++k) {
    try {
      out.push_back(detail::ask(reference, d, render_refinement(d, last->reasoning), Stage::refined_round(k), opt));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyReasoning) throw;
      break;
    }
    last = &out.back();
  }
  return out;
}

/// Every stage output for one demonstration, in stage order. Ablated stages
/// are skipped and the next stage consumes the latest surviving output. A
/// blank reply ends the chain; an initial failure yields an empty chain.
inline std::vector<ReasoningCandidate> run_chain(gateway::Gateway& reference, const Demonstration& d, int rounds,
                                                 const Ablation& ablation, const GenerationOptions& opt = {}) {
  std::vector<ReasoningCandidate> chain;
  try {
    chain.push_back(initial_reasoning(reference, d, opt));
    if (!ablation.no_verification) chain.push_back(verify_reasoning(reference, d, chain.back(), opt));
    if (!ablation.no_filtering) chain.push_back(filter_gender_independence(reference, d, chain.back(), opt));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyReasoning) throw;
    return chain;
  }
  if (!ablation.no_refinement) {
    auto refined = refine_iteratively(reference, d, chain.back(), rounds, opt);
    chain.insert(chain.end(), refined.begin(), refined.end());
  }
  return chain;
}

/// One candidate per stage that every demonstration reached, in stage
/// order; the candidate for a stage renders all demonstrations with their
/// reasoning at that stage.
inline std::vector<SystemPromptCandidate> assemble_candidates(
    const std::vector<Demonstration>& demos, const std::vector<std::vector<ReasoningCandidate>>& chains,
    const Ablation& ablation = {}) {
  if (demos.empty() || demos.size() != chains.size()) fail(ErrorCode::NoCandidates, "no demonstrations to assemble");
  const auto dropped = [&](const Stage& s) {
    return (ablation.no_verification && s.kind == StageKind::verified) ||
           (ablation.no_filtering && s.kind == StageKind::filtered) ||
           (ablation.no_refinement && s.kind == StageKind::refined);
  };
  std::set<Stage> common;
  for (const auto& r : chains.front())
    if (!dropped(r.stage)) common.insert(r.stage);
  for (std::size_t i = 1; i < chains.size(); ++i) {
    std::set<Stage> here;
    for (const auto& r : chains[i])
      if (common.count(r.stage)) here.insert(r.stage);
    common = std::move(here);
  }
  std::vector<SystemPromptCandidate> out;
  for (const auto& stage : common) {
    std::vector<Member> members;
    for (std::size_t i = 0; i < demos.size(); ++i)
      for (const auto& r : chains[i])
        if (r.stage == stage) members.push_back({demos[i], r});
    auto c = render_system_prompt(members);
    c.label = to_string(stage);
    out.push_back(std::move(c));
  }
  if (out.empty()) fail(ErrorCode::NoCandidates, "no stage produced usable reasoning");
  return out;
}

inline int stage_rank(const SystemPromptCandidate& c) {
  return c.members.empty() ? std::numeric_limits<int>::max() : c.members.front().reasoning.stage.rank();
}

/// Index of the best already-scored candidate.
inline std::size_t best_scored(const std::vector<SystemPromptCandidate>& candidates) {
  if (candidates.empty()) fail(ErrorCode::NoCandidates, "nothing to select from");
  const auto score = [](const SystemPromptCandidate& c) {
    const double s = c.dev_score.value_or(std::numeric_limits<double>::quiet_NaN());
    return std::isnan(s) ? std::numeric_limits<double>::infinity() : s;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double a = score(candidates[i]), b = score(candidates[best]);
    if (a < b || (a == b && stage_rank(candidates[i]) < stage_rank(candidates[best]))) best = i;
  }
  return best;
}

/// Scores every candidate (lower is better) and returns the index of the
/// best. Ties go to the earliest stage; NaN scores rank last.
inline std::size_t select_best_prompt(std::vector<SystemPromptCandidate>& candidates,
                                      const std::function<double(const SystemPromptCandidate&)>& dev_eval) {
  if (candidates.empty()) fail(ErrorCode::NoCandidates, "nothing to select from");
  for (auto& c : candidates) c.dev_score = dev_eval(c);
  return best_scored(candidates);
}

/// Union of per-dataset selected members rendered as one prompt.
inline SystemPromptCandidate aggregate_prompt(const std::vector<SystemPromptCandidate>& selected) {
  std::vector<Member> members;
  for (const auto& c : selected) members.insert(members.end(), c.members.begin(), c.members.end());
  auto out = render_system_prompt(members);
  out.label = "drgap_agg";
  return out;
}

}  // namespace fairprompt::pipeline
