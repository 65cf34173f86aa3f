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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairprompt/error.hpp"

namespace fairprompt::pipeline {

// Stage prompt boxes, byte for byte (spelling included). The same text ships
// under assets/prompts/v1/ and is pinned by golden tests.
inline constexpr std::string_view kInitialReasoningBox =
    "For question:\"{question} {text}\" and given correct answer: \"{answer}\", please think step by step and "
    "provide a concise three-stage reasoning process.";

inline constexpr std::string_view kVerificationBox =
    "For question:\"{question}{text}\" and given correct answer: \"{answer}\", dose the reasonning:\"{reasoning}\" "
    "is correct? If not, think step by step and provide a concise three-stage reasoning process.";

inline constexpr std::string_view kGenderFilteringBox =
    "For question:\"{question}{text}\", the reasoning: \"{reasoning}\" is not effective enough to avoid gender "
    "bias, remove the reference to gender, and provide a concise three-stage reasoning process. You need to focus "
    "more on the logic of the semantics rather than the gender-specific information.";

inline constexpr std::string_view kIterativeRefinementBox =
    "For question:\"{question}{text}\", the reasoning: \"{reasoning}\" is not effective enough to avoid gender "
    "bias, please think step by step and provide a more appropriate gender-neutral reasoning process.";

inline constexpr std::string_view kSystemPreface =
    "You are a fair and impartial assistant who avoids gender bias as much as possible in your answers. Please "
    "think step by step.\nThere are some reasoning processes for reference:";

inline constexpr std::string_view kMemberBlock = "question: {question}\ntext: {text}\nreasoning: {reasoning}\nanswer: {answer}";

/// Replaces every {name} found in `vars`, scanning the template once so
/// substituted text is never re-expanded. Unknown braces are kept verbatim.
inline std::string substitute(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& vars) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = vars.find(tmpl.substr(i + 1, close - i - 1));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

struct Demonstration {
  std::string example_id;
  std::string question;
  std::string text;
  std::string answer;

  bool operator==(const Demonstration&) const = default;
};

enum class StageKind { initial, verified, filtered, refined };

struct Stage {
  StageKind kind = StageKind::initial;
  int round = 0;  // refined only, >= 1

  static Stage refined_round(int k) { return {StageKind::refined, k}; }

  /// initial < verified < filtered < refined(1) < refined(2) < ...
  int rank() const {
    switch (kind) {
      case StageKind::initial: return 0;
      case StageKind::verified: return 1;
      case StageKind::filtered: return 2;
      case StageKind::refined: return 2 + round;
    }
    return 0;
  }

  bool operator==(const Stage&) const = default;
  bool operator<(const Stage& o) const { return rank() < o.rank(); }
};

inline std::string to_string(const Stage& s) {
  switch (s.kind) {
    case StageKind::initial: return "initial";
    case StageKind::verified: return "verified";
    case StageKind::filtered: return "filtered";
    case StageKind::refined: return "refined(" + std::to_string(s.round) + ")";
  }
  return "?";
}

inline Stage parse_stage(std::string_view s) {
  if (s == "initial") return {StageKind::initial, 0};
  if (s == "verified") return {StageKind::verified, 0};
  if (s == "filtered") return {StageKind::filtered, 0};
  if (s.size() > 9 && s.substr(0, 8) == "refined(" && s.back() == ')') {
    const int k = std::stoi(std::string(s.substr(8, s.size() - 9)));
    if (k >= 1) return Stage::refined_round(k);
  }
  fail(ErrorCode::MalformedRecord, "unknown stage: " + std::string(s));
}

struct ReasoningCandidate {
  std::string demonstration_ref;  // Demonstration::example_id
  Stage stage;
  std::string reasoning;
  std::string generated_by;

  bool operator==(const ReasoningCandidate&) const = default;
};

struct Member {
  Demonstration demonstration;
  ReasoningCandidate reasoning;
};

struct SystemPromptCandidate {
  std::string rendered;
  std::vector<Member> members;
  std::optional<double> dev_score;
  std::string dev_metric;
  std::string label;  // e.g. the stage name, "manual", "drgap_agg"
};

inline std::string render_initial(const Demonstration& d) {
  return substitute(kInitialReasoningBox, {{"question", d.question}, {"text", d.text}, {"answer", d.answer}});
}

inline std::string render_verification(const Demonstration& d, const std::string& reasoning) {
  return substitute(kVerificationBox,
                    {{"question", d.question}, {"text", d.text}, {"answer", d.answer}, {"reasoning", reasoning}});
}

inline std::string render_filtering(const Demonstration& d, const std::string& reasoning) {
  return substitute(kGenderFilteringBox, {{"question", d.question}, {"text", d.text}, {"reasoning", reasoning}});
}

inline std::string render_refinement(const Demonstration& d, const std::string& reasoning) {
  return substitute(kIterativeRefinementBox, {{"question", d.question}, {"text", d.text}, {"reasoning", reasoning}});
}

inline bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

/// Preface followed by one four-line block per member, blocks separated by a
/// blank line.
inline SystemPromptCandidate render_system_prompt(const std::vector<Member>& members) {
  if (members.empty()) fail(ErrorCode::EmptyMembers, "system prompt needs at least one member");
  std::string out(kSystemPreface);
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& m = members[i];
    if (is_blank(m.reasoning.reasoning))
      fail(ErrorCode::EmptyMembers, "member " + m.demonstration.example_id + " has empty reasoning");
    out += i == 0 ? "\n" : "\n\n";
    out += substitute(kMemberBlock, {{"question", m.demonstration.question},
                                     {"text", m.demonstration.text},
                                     {"reasoning", m.reasoning.reasoning},
                                     {"answer", m.demonstration.answer}});
  }
  SystemPromptCandidate c;
  c.rendered = std::move(out);
  c.members = members;
  return c;
}

inline nlohmann::json to_json(const Demonstration& d) {
  return {{"example_id", d.example_id}, {"question", d.question}, {"text", d.text}, {"answer", d.answer}};
}

inline Demonstration demonstration_from_json(const nlohmann::json& j) {
  return {j.at("example_id").get<std::string>(), j.at("question").get<std::string>(), j.at("text").get<std::string>(),
          j.at("answer").get<std::string>()};
}

inline nlohmann::json to_json(const ReasoningCandidate& r) {
  return {{"demonstration_ref", r.demonstration_ref},
          {"stage", to_string(r.stage)},
          {"reasoning", r.reasoning},
          {"generated_by", r.generated_by}};
}

inline ReasoningCandidate reasoning_from_json(const nlohmann::json& j) {
  return {j.at("demonstration_ref").get<std::string>(), parse_stage(j.at("stage").get<std::string>()),
          j.at("reasoning").get<std::string>(), j.at("generated_by").get<std::string>()};
}

inline nlohmann::json to_json(const SystemPromptCandidate& c) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : c.members)
    members.push_back({{"demonstration", to_json(m.demonstration)}, {"reasoning", to_json(m.reasoning)}});
  return {{"label", c.label},
          {"rendered", c.rendered},
          {"members", members},
          {"dev_metric", c.dev_metric},
          {"dev_score", c.dev_score ? nlohmann::json(*c.dev_score) : nlohmann::json(nullptr)}};
}

inline SystemPromptCandidate candidate_from_json(const nlohmann::json& j) {
  SystemPromptCandidate c;
  c.label = j.value("label", std::string());
  c.rendered = j.at("rendered").get<std::string>();
  for (const auto& m : j.at("members"))
    c.members.push_back({demonstration_from_json(m.at("demonstration")), reasoning_from_json(m.at("reasoning"))});
  c.dev_metric = j.value("dev_metric", std::string());
  if (j.contains("dev_score") && !j.at("dev_score").is_null()) c.dev_score = j.at("dev_score").get<double>();
  return c;
}

}  // namespace fairprompt::pipeline
