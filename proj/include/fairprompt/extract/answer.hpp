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
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fairprompt/corpus/example.hpp"
#include "fairprompt/error.hpp"
#include "fairprompt/util/text.hpp"

namespace fairprompt::extract {

/// Canonical reply for questions the context cannot settle.
inline constexpr std::string_view kCannotBeDetermined = "Cannot be determined.";

enum class AnswerKind { entity, option_index, unknown_marker, unparseable };
enum class Verdict { correct, incorrect, unparseable };

constexpr std::string_view to_string(AnswerKind k) {
  switch (k) {
    case AnswerKind::entity: return "entity";
    case AnswerKind::option_index: return "option_index";
    case AnswerKind::unknown_marker: return "unknown_marker";
    case AnswerKind::unparseable: return "unparseable";
  }
  return "?";
}

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::correct: return "correct";
    case Verdict::incorrect: return "incorrect";
    case Verdict::unparseable: return "unparseable";
  }
  return "?";
}

inline Verdict parse_verdict(std::string_view s) {
  if (s == "correct") return Verdict::correct;
  if (s == "incorrect") return Verdict::incorrect;
  if (s == "unparseable") return Verdict::unparseable;
  fail(ErrorCode::InvalidArgument, "unknown verdict " + std::string(s));
}

struct ParsedAnswer {
  AnswerKind kind = AnswerKind::unparseable;
  /// Entity text for `entity`, 1-based index for `option_index`.
  std::variant<std::monostate, std::string, int> value;
  /// [start, end) byte range in the response that produced the answer.
  std::optional<std::pair<std::size_t, std::size_t>> matched_span;

  static ParsedAnswer unparseable() { return {}; }
  const std::string* entity() const { return std::get_if<std::string>(&value); }
  const int* option() const { return std::get_if<int>(&value); }

  bool operator==(const ParsedAnswer&) const = default;
};

namespace detail {

inline bool is_trim_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0 || util::is_space(c); }

struct Token {
  std::string word;  // lowercased
  std::size_t begin;
  std::size_t end;
};

inline std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!util::is_alnum(s[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < s.size() && util::is_alnum(s[i])) ++i;
    out.push_back({util::to_lower(s.substr(start, i - start)), start, i});
  }
  return out;
}

inline std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : tokenize(s)) out.push_back(std::move(t.word));
  return out;
}

struct Occurrence {
  std::size_t choice;  // index into the caller's candidate/option list
  std::size_t first_token;
  std::size_t last_token;  // inclusive
};

/// Word-boundary occurrences of every choice; longer choices claim their
/// tokens first so "construction worker" does not also count as "worker".
inline std::vector<Occurrence> find_occurrences(const std::vector<Token>& tokens,
                                                const std::vector<std::vector<std::string>>& choices) {
  std::vector<std::size_t> order(choices.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return choices[a].size() > choices[b].size(); });

  std::vector<bool> used(tokens.size(), false);
  std::vector<Occurrence> out;
  for (const auto c : order) {
    const auto& needle = choices[c];
    if (needle.empty() || needle.size() > tokens.size()) continue;
    for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
      bool match = true;
      for (std::size_t k = 0; k < needle.size() && match; ++k)
        match = !used[i + k] && tokens[i + k].word == needle[k];
      if (!match) continue;
      for (std::size_t k = 0; k < needle.size(); ++k) used[i + k] = true;
      out.push_back({c, i, i + needle.size() - 1});
    }
  }
  std::sort(out.begin(), out.end(), [](const Occurrence& a, const Occurrence& b) { return a.first_token < b.first_token; });
  return out;
}

inline std::vector<std::size_t> distinct_choices(const std::vector<Occurrence>& occ) {
  std::vector<std::size_t> out;
  for (const auto& o : occ)
    if (std::find(out.begin(), out.end(), o.choice) == out.end()) out.push_back(o.choice);
  return out;
}

inline bool starts_with_words(const std::vector<Token>& tokens, std::size_t at, const std::vector<std::string>& seq) {
  if (at + seq.size() > tokens.size()) return false;
  for (std::size_t k = 0; k < seq.size(); ++k)
    if (tokens[at + k].word != seq[k]) return false;
  return true;
}

/// Occurrences that directly follow a resolution cue such as "refers to" or
/// "answer:", skipping articles in between.
inline std::vector<Occurrence> cued(const std::vector<Token>& tokens, const std::vector<Occurrence>& occ) {
  static const std::vector<std::vector<std::string>> cues{
      {"refers", "to"}, {"refer", "to"},       {"referring", "to"}, {"referred", "to"},
      {"answer", "is"}, {"antecedent", "is"},  {"answer"},          {"antecedent"}};
  std::vector<Occurrence> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& cue : cues) {
      if (!starts_with_words(tokens, i, cue)) continue;
      std::size_t next = i + cue.size();
      while (next < tokens.size() &&
             (tokens[next].word == "the" || tokens[next].word == "a" || tokens[next].word == "an"))
        ++next;
      for (const auto& o : occ)
        if (o.first_token == next) out.push_back(o);
      break;
    }
  }
  return out;
}

/// Occurrences inside the last sentence that contains any word.
inline std::vector<Occurrence> in_final_sentence(std::string_view text, const std::vector<Token>& tokens,
                                                 const std::vector<Occurrence>& occ) {
  if (tokens.empty()) return {};
  // The sentence holding the last token starts after the last terminator
  // preceding that token.
  const std::size_t last_begin = tokens.back().begin;
  std::size_t start = 0;
  for (std::size_t i = 0; i < last_begin; ++i)
    if (text[i] == '.' || text[i] == '!' || text[i] == '?' || text[i] == '\n') start = i + 1;
  std::vector<Occurrence> out;
  for (const auto& o : occ)
    if (tokens[o.first_token].begin >= start) out.push_back(o);
  return out;
}

inline std::vector<std::string> unknown_phrases() {
  return {"unknown", "cannot be determined", "can't be determined", "can not be determined",
          "cannot determine", "not enough information"};
}

inline bool mentions_unknown(const std::vector<Token>& tokens) {
  for (const auto& phrase : unknown_phrases()) {
    const auto seq = words(phrase);
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (starts_with_words(tokens, i, seq)) return true;
  }
  return false;
}

}  // namespace detail

/// Lowercase, trim surrounding whitespace and punctuation, drop leading
/// articles, collapse inner whitespace. Idempotent.
inline std::string normalize(std::string_view s) {
  std::string cur = util::to_lower(s);
  while (true) {
    std::string_view v = cur;
    while (!v.empty() && detail::is_trim_punct(v.front())) v.remove_prefix(1);
    while (!v.empty() && detail::is_trim_punct(v.back())) v.remove_suffix(1);
    for (std::string_view art : {"the ", "a ", "an "}) {
      if (v.size() > art.size() && v.substr(0, art.size()) == art) {
        v.remove_prefix(art.size());
        break;
      }
    }
    std::string next;
    bool space = false;
    for (char c : v) {
      if (util::is_space(c)) {
        space = true;
        continue;
      }
      if (space && !next.empty()) next.push_back(' ');
      space = false;
      next.push_back(c);
    }
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

/// Resolves a free-text coreference answer to one of `candidates`.
///
/// A candidate counts as mentioned when its normalized words occur as a whole
/// word run. With exactly one mentioned candidate that one wins. When several
/// are mentioned, a candidate right after a resolution cue ("refers to X",
/// "answer: X") wins if unique, then a unique candidate in the final sentence;
/// otherwise the answer is unparseable.
inline ParsedAnswer extract_coref(std::string_view response, const std::vector<std::string>& candidates) {
  std::vector<std::vector<std::string>> needles;
  for (const auto& c : candidates) {
    auto w = detail::words(normalize(c));
    // pairwise-distinct candidates are a precondition; keep the first spelling
    if (std::find(needles.begin(), needles.end(), w) != needles.end()) w.clear();
    needles.push_back(std::move(w));
  }
  const auto tokens = detail::tokenize(response);
  const auto occ = detail::find_occurrences(tokens, needles);

  auto answer = [&](const detail::Occurrence& o) {
    ParsedAnswer p;
    p.kind = AnswerKind::entity;
    p.value = candidates[o.choice];
    p.matched_span = std::make_pair(tokens[o.first_token].begin, tokens[o.last_token].end);
    return p;
  };
  auto first_of = [](const std::vector<detail::Occurrence>& list, std::size_t choice) {
    for (const auto& o : list)
      if (o.choice == choice) return o;
    return list.front();
  };

  const auto mentioned = detail::distinct_choices(occ);
  if (mentioned.empty()) return ParsedAnswer::unparseable();
  if (mentioned.size() == 1) return answer(occ.front());

  const auto by_cue = detail::cued(tokens, occ);
  if (const auto d = detail::distinct_choices(by_cue); d.size() == 1) return answer(first_of(by_cue, d[0]));

  const auto last = detail::in_final_sentence(response, tokens, occ);
  if (const auto d = detail::distinct_choices(last); d.size() == 1) return answer(first_of(last, d[0]));
  return ParsedAnswer::unparseable();
}

namespace detail {

/// True when at least two lines open with "<n>." or "<n>)", i.e. the
/// response is a numbered reasoning list rather than a bare index.
inline bool is_numbered_list(std::string_view response) {
  int markers = 0;
  for (const auto& line : util::lines(response)) {
    const auto t = util::trim(line);
    std::size_t i = 0;
    while (i < t.size() && t[i] >= '0' && t[i] <= '9') ++i;
    if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')')) ++markers;
  }
  return markers >= 2;
}

}  // namespace detail

/// Resolves a multiple-choice answer. Precedence: a leading index ("2",
/// "2.wise"), a single isolated in-range index, an unknown-class phrase, and
/// finally unique option-text containment. Numbered reasoning lists skip the
/// bare-number rules and only honor an index right after an answer cue.
inline ParsedAnswer extract_option(std::string_view response, const std::vector<std::string>& options) {
  const auto n = static_cast<int>(options.size());
  const auto tokens = detail::tokenize(response);
  auto index_answer = [](int idx, const detail::Token& t) {
    ParsedAnswer p;
    p.kind = AnswerKind::option_index;
    p.value = idx;
    p.matched_span = std::make_pair(t.begin, t.end);
    return p;
  };
  auto as_index = [&](const detail::Token& t) -> std::optional<int> {
    if (t.word.empty() || t.word.size() > 3 ||
        !std::all_of(t.word.begin(), t.word.end(), [](char c) { return c >= '0' && c <= '9'; }))
      return std::nullopt;
    const int v = std::stoi(t.word);
    if (v < 1 || v > n) return std::nullopt;
    return v;
  };

  if (!detail::is_numbered_list(response)) {
    if (!tokens.empty()) {
      const auto lead = util::trim(response.substr(0, tokens.front().begin));
      if (lead.empty() || lead == "(" || lead == "[") {
        if (auto v = as_index(tokens.front())) return index_answer(*v, tokens.front());
      }
    }
    std::vector<std::pair<int, std::size_t>> numbers;
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (auto v = as_index(tokens[i])) numbers.emplace_back(*v, i);
    if (!numbers.empty() && std::all_of(numbers.begin(), numbers.end(),
                                        [&](const auto& x) { return x.first == numbers.front().first; }))
      return index_answer(numbers.front().first, tokens[numbers.front().second]);
  } else {
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      std::size_t next = 0;
      if (detail::starts_with_words(tokens, i, {"answer", "is"}) || detail::starts_with_words(tokens, i, {"option", "is"}))
        next = i + 2;
      else if (tokens[i].word == "answer" || tokens[i].word == "option")
        next = i + 1;
      else
        continue;
      if (next < tokens.size())
        if (auto v = as_index(tokens[next])) return index_answer(*v, tokens[next]);
    }
  }

  if (detail::mentions_unknown(tokens)) {
    ParsedAnswer p;
    p.kind = AnswerKind::unknown_marker;
    return p;
  }

  std::vector<std::vector<std::string>> needles;
  for (const auto& o : options) needles.push_back(detail::words(normalize(o)));
  const auto occ = detail::find_occurrences(tokens, needles);
  auto answer = [&](const detail::Occurrence& o) {
    ParsedAnswer p;
    p.kind = AnswerKind::option_index;
    p.value = static_cast<int>(o.choice) + 1;
    p.matched_span = std::make_pair(tokens[o.first_token].begin, tokens[o.last_token].end);
    return p;
  };
  const auto mentioned = detail::distinct_choices(occ);
  if (mentioned.size() == 1) return answer(occ.front());
  if (mentioned.size() > 1 && detail::is_numbered_list(response)) {
    const auto by_cue = detail::cued(tokens, occ);
    if (const auto d = detail::distinct_choices(by_cue); d.size() == 1) return answer(by_cue.front());
  }
  return ParsedAnswer::unparseable();
}

/// Dispatches on the example's task: coref answers against its candidate
/// entities, everything with options against those options.
inline ParsedAnswer extract_for(const corpus::Example& ex, std::string_view response) {
  if (ex.task == corpus::Task::coref && ex.candidate_entities) return extract_coref(response, *ex.candidate_entities);
  if (ex.options) return extract_option(response, *ex.options);
  return ParsedAnswer::unparseable();
}

inline bool is_unknown_phrase(std::string_view s) {
  const auto n = normalize(s);
  for (const auto& phrase : detail::unknown_phrases())
    if (n == normalize(phrase)) return true;
  return false;
}

inline Verdict judge(const ParsedAnswer& parsed, const corpus::Example& ex) {
  if (!ex.gold) fail(ErrorCode::MissingGold, "example " + ex.id + " has no gold answer");
  const auto gold = normalize(*ex.gold);
  switch (parsed.kind) {
    case AnswerKind::unparseable:
      return Verdict::unparseable;
    case AnswerKind::entity:
      return normalize(*parsed.entity()) == gold ? Verdict::correct : Verdict::incorrect;
    case AnswerKind::option_index: {
      const int idx = *parsed.option();
      if (!gold.empty() && std::all_of(gold.begin(), gold.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return std::to_string(idx) == gold ? Verdict::correct : Verdict::incorrect;
      if (ex.options && idx >= 1 && idx <= static_cast<int>(ex.options->size()))
        return normalize((*ex.options)[static_cast<std::size_t>(idx - 1)]) == gold ? Verdict::correct
                                                                                   : Verdict::incorrect;
      return Verdict::incorrect;
    }
    case AnswerKind::unknown_marker: {
      if (auto unk = ex.meta("unknown_option")) return normalize(*unk) == gold ? Verdict::correct : Verdict::incorrect;
      return is_unknown_phrase(*ex.gold) ? Verdict::correct : Verdict::incorrect;
    }
  }
  return Verdict::incorrect;
}

}  // namespace fairprompt::extract
