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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fairprompt/error.hpp"

namespace fairprompt::corpus {

enum class DatasetId { winobias, winogender, gap, bug, bbq, stereoset, unqover, mcq_utility };
enum class Task { coref, mcq, open_qa };
enum class Polarity { stereo, anti_stereo, neutral, not_applicable };
enum class PronounGender { masculine, feminine, neutral, unknown };
enum class ContextCondition { ambiguous, disambiguated, not_applicable };

namespace detail {

template <typename E, std::size_t N>
struct EnumNames {
  std::array<std::pair<E, std::string_view>, N> entries;

  constexpr std::string_view name(E value) const {
    for (const auto& [e, n] : entries)
      if (e == value) return n;
    return "?";
  }
  std::optional<E> parse(std::string_view text) const {
    for (const auto& [e, n] : entries)
      if (n == text) return e;
    return std::nullopt;
  }
};

inline constexpr EnumNames<DatasetId, 8> kDatasetNames{{{
    {DatasetId::winobias, "winobias"},
    {DatasetId::winogender, "winogender"},
    {DatasetId::gap, "gap"},
    {DatasetId::bug, "bug"},
    {DatasetId::bbq, "bbq"},
    {DatasetId::stereoset, "stereoset"},
    {DatasetId::unqover, "unqover"},
    {DatasetId::mcq_utility, "mcq_utility"},
}}};
inline constexpr EnumNames<Task, 3> kTaskNames{{{
    {Task::coref, "coref"}, {Task::mcq, "mcq"}, {Task::open_qa, "open_qa"}}}};
inline constexpr EnumNames<Polarity, 4> kPolarityNames{{{
    {Polarity::stereo, "stereo"},
    {Polarity::anti_stereo, "anti_stereo"},
    {Polarity::neutral, "neutral"},
    {Polarity::not_applicable, "not_applicable"}}}};
inline constexpr EnumNames<PronounGender, 4> kGenderNames{{{
    {PronounGender::masculine, "masculine"},
    {PronounGender::feminine, "feminine"},
    {PronounGender::neutral, "neutral"},
    {PronounGender::unknown, "unknown"}}}};
inline constexpr EnumNames<ContextCondition, 3> kConditionNames{{{
    {ContextCondition::ambiguous, "ambiguous"},
    {ContextCondition::disambiguated, "disambiguated"},
    {ContextCondition::not_applicable, "not_applicable"}}}};

}  // namespace detail

constexpr std::string_view to_string(DatasetId v) { return detail::kDatasetNames.name(v); }
constexpr std::string_view to_string(Task v) { return detail::kTaskNames.name(v); }
constexpr std::string_view to_string(Polarity v) { return detail::kPolarityNames.name(v); }
constexpr std::string_view to_string(PronounGender v) { return detail::kGenderNames.name(v); }
constexpr std::string_view to_string(ContextCondition v) { return detail::kConditionNames.name(v); }

inline DatasetId parse_dataset_id(std::string_view text) {
  if (auto v = detail::kDatasetNames.parse(text)) return *v;
  fail(ErrorCode::UnknownDataset, std::string(text));
}

inline const std::vector<DatasetId>& all_datasets() {
  static const std::vector<DatasetId> ids{DatasetId::winobias, DatasetId::winogender, DatasetId::gap,
                                          DatasetId::bug,      DatasetId::bbq,        DatasetId::stereoset,
                                          DatasetId::unqover,  DatasetId::mcq_utility};
  return ids;
}

inline bool is_paired_dataset(DatasetId id) {
  return id == DatasetId::winobias || id == DatasetId::winogender;
}

/// One benchmark item in the canonical schema.
///
/// `metadata` carries dataset-specific option roles that the fixed fields
/// cannot express (which BBQ option is the biased one, which StereoSet option
/// is stereotypical, UnQover subject ordering). Keys are documented next to
/// each adapter. Option indices stored there are 1-based decimal strings,
/// and so is `gold` for multiple-choice tasks.
struct Example {
  std::string id;
  DatasetId dataset_id = DatasetId::winobias;
  Task task = Task::coref;
  std::string text;
  std::string question;
  std::optional<std::vector<std::string>> options;
  std::optional<std::string> gold;
  Polarity polarity = Polarity::not_applicable;
  PronounGender pronoun_gender = PronounGender::unknown;
  ContextCondition context_condition = ContextCondition::not_applicable;
  std::optional<std::string> pair_group;
  std::optional<std::int64_t> pronoun_char_offset;
  std::optional<std::int64_t> pronoun_token_index;
  std::optional<std::vector<std::string>> candidate_entities;
  std::map<std::string, std::string> metadata;

  std::optional<std::string> meta(const std::string& key) const {
    auto it = metadata.find(key);
    if (it == metadata.end()) return std::nullopt;
    return it->second;
  }

  /// 1-based option index stored under `key`, if present and in range.
  std::optional<int> meta_option(const std::string& key) const {
    auto v = meta(key);
    if (!v || !options) return std::nullopt;
    try {
      const int idx = std::stoi(*v);
      if (idx >= 1 && idx <= static_cast<int>(options->size())) return idx;
    } catch (const std::exception&) {
    }
    return std::nullopt;
  }

  bool operator==(const Example&) const = default;
};

/// Returns an empty string when `ex` satisfies every per-record invariant,
/// otherwise the first violated rule.
inline std::string invariant_violation(const Example& ex) {
  if (ex.id.empty()) return "empty id";
  if (ex.task == Task::coref) {
    if (!ex.gold) return "coref example without gold";
    if (!ex.candidate_entities || ex.candidate_entities->empty()) return "coref example without candidate_entities";
    bool found = false;
    for (const auto& c : *ex.candidate_entities) found = found || c == *ex.gold;
    if (!found) return "gold '" + *ex.gold + "' not among candidate_entities";
  }
  if (ex.task == Task::mcq && (!ex.options || ex.options->empty())) return "mcq example without options";
  if (is_paired_dataset(ex.dataset_id)) {
    if (ex.polarity != Polarity::stereo && ex.polarity != Polarity::anti_stereo)
      return "paired dataset requires stereo/anti_stereo polarity";
    if (!ex.pair_group) return "paired dataset requires pair_group";
  }
  if (ex.dataset_id == DatasetId::gap || ex.dataset_id == DatasetId::bug) {
    if (ex.pronoun_gender != PronounGender::masculine && ex.pronoun_gender != PronounGender::feminine)
      return "gap/bug require masculine or feminine pronoun_gender";
    if (ex.dataset_id == DatasetId::gap && !ex.pronoun_char_offset) return "gap requires pronoun_char_offset";
    if (ex.dataset_id == DatasetId::bug && !ex.pronoun_token_index) return "bug requires pronoun_token_index";
  }
  if (ex.pronoun_char_offset && *ex.pronoun_char_offset < 0) return "negative pronoun_char_offset";
  if (ex.pronoun_token_index && *ex.pronoun_token_index < 0) return "negative pronoun_token_index";
  if (ex.dataset_id == DatasetId::bbq && ex.context_condition == ContextCondition::not_applicable)
    return "bbq requires a context_condition";
  if (ex.dataset_id == DatasetId::unqover && ex.gold) return "unqover examples carry no gold";
  return {};
}

/// Corpus-level checks: unique ids and complete stereo/anti pairs.
inline std::string corpus_violation(const std::vector<Example>& corpus) {
  std::unordered_set<std::string> ids;
  std::unordered_map<std::string, std::pair<int, int>> pairs;  // group -> (stereo, anti)
  for (const auto& ex : corpus) {
    if (!ids.insert(ex.id).second) return "duplicate id " + ex.id;
    if (auto why = invariant_violation(ex); !why.empty()) return ex.id + ": " + why;
    if (is_paired_dataset(ex.dataset_id)) {
      auto& counts = pairs[*ex.pair_group];
      (ex.polarity == Polarity::stereo ? counts.first : counts.second)++;
    }
  }
  for (const auto& [group, counts] : pairs)
    if (counts.first != 1 || counts.second != 1)
      return "pair_group " + group + " does not hold exactly one stereo and one anti_stereo example";
  return {};
}

}  // namespace fairprompt::corpus
