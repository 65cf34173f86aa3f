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

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairprompt/corpus/example.hpp"
#include "fairprompt/util/fs.hpp"
#include "fairprompt/util/text.hpp"

namespace fairprompt::corpus {

inline constexpr int kSchemaVersion = 1;

inline nlohmann::json to_json(const Example& ex) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["id"] = ex.id;
  j["dataset_id"] = to_string(ex.dataset_id);
  j["task"] = to_string(ex.task);
  j["text"] = ex.text;
  j["question"] = ex.question;
  if (ex.options) j["options"] = *ex.options;
  if (ex.gold) j["gold"] = *ex.gold;
  j["polarity"] = to_string(ex.polarity);
  j["pronoun_gender"] = to_string(ex.pronoun_gender);
  j["context_condition"] = to_string(ex.context_condition);
  if (ex.pair_group) j["pair_group"] = *ex.pair_group;
  if (ex.pronoun_char_offset) j["pronoun_char_offset"] = *ex.pronoun_char_offset;
  if (ex.pronoun_token_index) j["pronoun_token_index"] = *ex.pronoun_token_index;
  if (ex.candidate_entities) j["candidate_entities"] = *ex.candidate_entities;
  if (!ex.metadata.empty()) j["metadata"] = ex.metadata;
  return j;
}

namespace detail {

template <typename E, std::size_t N>
E parse_enum(const nlohmann::json& j, const char* key, const EnumNames<E, N>& names, std::size_t line) {
  if (!j.contains(key)) fail(ErrorCode::MissingField, "line " + std::to_string(line) + ": " + key);
  const auto text = j.at(key).get<std::string>();
  if (auto v = names.parse(text)) return *v;
  fail(ErrorCode::MalformedRecord, "line " + std::to_string(line) + ": bad " + key + " '" + text + "'");
}

}  // namespace detail

/// `line` is only used to make error messages point at the source record.
inline Example example_from_json(const nlohmann::json& j, std::size_t line = 0) {
  const auto where = "line " + std::to_string(line) + ": ";
  if (!j.is_object()) fail(ErrorCode::MalformedRecord, where + "record is not an object");
  if (!j.contains("schema_version")) fail(ErrorCode::MissingField, where + "schema_version");
  if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != kSchemaVersion)
    fail(ErrorCode::SchemaVersionMismatch, where + "expected " + std::to_string(kSchemaVersion) + ", got " +
                                               j.at("schema_version").dump());
  for (const char* key : {"id", "text", "question"})
    if (!j.contains(key)) fail(ErrorCode::MissingField, where + key);

  try {
    Example ex;
    ex.id = j.at("id").get<std::string>();
    auto dataset = j.contains("dataset_id") ? j.at("dataset_id").get<std::string>() : std::string{};
    if (dataset.empty()) fail(ErrorCode::MissingField, where + "dataset_id");
    ex.dataset_id = parse_dataset_id(dataset);
    ex.task = detail::parse_enum(j, "task", detail::kTaskNames, line);
    ex.text = j.at("text").get<std::string>();
    ex.question = j.at("question").get<std::string>();
    if (j.contains("options")) ex.options = j.at("options").get<std::vector<std::string>>();
    if (j.contains("gold")) ex.gold = j.at("gold").get<std::string>();
    ex.polarity = detail::parse_enum(j, "polarity", detail::kPolarityNames, line);
    ex.pronoun_gender = detail::parse_enum(j, "pronoun_gender", detail::kGenderNames, line);
    ex.context_condition = detail::parse_enum(j, "context_condition", detail::kConditionNames, line);
    if (j.contains("pair_group")) ex.pair_group = j.at("pair_group").get<std::string>();
    if (j.contains("pronoun_char_offset")) ex.pronoun_char_offset = j.at("pronoun_char_offset").get<std::int64_t>();
    if (j.contains("pronoun_token_index")) ex.pronoun_token_index = j.at("pronoun_token_index").get<std::int64_t>();
    if (j.contains("candidate_entities"))
      ex.candidate_entities = j.at("candidate_entities").get<std::vector<std::string>>();
    if (j.contains("metadata")) ex.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    if (auto why = invariant_violation(ex); !why.empty()) fail(ErrorCode::MalformedRecord, where + why);
    return ex;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedRecord, where + e.what());
  }
}

/// One JSON object per line, keys sorted, absent optionals omitted.
inline std::string serialize_canonical(const std::vector<Example>& corpus) {
  std::string out;
  for (const auto& ex : corpus) {
    out += to_json(ex).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<Example> parse_canonical(std::string_view data) {
  std::vector<Example> out;
  const auto rows = util::lines(data);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (util::trim(rows[i]).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(rows[i]);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::MalformedRecord, "line " + std::to_string(i + 1) + ": " + e.what());
    }
    out.push_back(example_from_json(j, i + 1));
  }
  if (auto why = corpus_violation(out); !why.empty()) fail(ErrorCode::MalformedRecord, why);
  return out;
}

inline void canonical_write(const std::filesystem::path& path, const std::vector<Example>& corpus) {
  util::write_file_atomic(path, serialize_canonical(corpus));
}

inline std::vector<Example> canonical_read(const std::filesystem::path& path) {
  return parse_canonical(util::read_file(path));
}

}  // namespace fairprompt::corpus
