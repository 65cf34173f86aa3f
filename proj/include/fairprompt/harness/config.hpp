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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairprompt/corpus/example.hpp"
#include "fairprompt/gateway/types.hpp"
#include "fairprompt/pipeline/stages.hpp"
#include "fairprompt/util/fs.hpp"

namespace fairprompt::harness {

using nlohmann::json;

enum class PromptMode { none, drgap, drgap_agg, manual, cfd, external };

inline std::string_view to_string(PromptMode m) {
  switch (m) {
    case PromptMode::none: return "none";
    case PromptMode::drgap: return "drgap";
    case PromptMode::drgap_agg: return "drgap_agg";
    case PromptMode::manual: return "manual";
    case PromptMode::cfd: return "cfd";
    case PromptMode::external: return "external";
  }
  return "none";
}

inline PromptMode parse_prompt_mode(std::string_view s) {
  for (auto m : {PromptMode::none, PromptMode::drgap, PromptMode::drgap_agg, PromptMode::manual, PromptMode::cfd,
                 PromptMode::external})
    if (to_string(m) == s) return m;
  fail(ErrorCode::ConfigError, "unknown prompt_mode: '" + std::string(s) + "'");
}

struct DatasetSpec {
  corpus::DatasetId id = corpus::DatasetId::winobias;
  std::string path;
  bool canonical = false;  // path holds canonical JSONL rather than the native release
};

struct RunConfig {
  std::string label;
  gateway::Endpoint target;
  std::optional<gateway::Endpoint> reference;
  std::vector<DatasetSpec> datasets;
  PromptMode prompt_mode = PromptMode::none;
  std::optional<std::string> prompt_path;  // external mode
  std::optional<std::string> cfd_family;   // cfd mode
  int repetitions = 3;
  int refinement_rounds = 3;
  int demonstrations = 1;
  double dev_fraction = 0.2;
  bool stratify = false;
  std::uint64_t seed = 0;
  double temperature = 0.0;
  int max_tokens = 512;
  int reasoning_max_tokens = 1024;
  std::optional<std::string> cache_dir;
  std::string output_dir = "runs/latest";
  pipeline::Ablation ablation;
  std::optional<std::string> baseline_manifest;
  std::optional<std::size_t> limit;  // cap on examples per dataset
};

inline void validate(const RunConfig& c) {
  if (c.repetitions < 1) fail(ErrorCode::ConfigError, "repetitions must be >= 1");
  if (c.refinement_rounds < 1) fail(ErrorCode::ConfigError, "refinement_rounds must be >= 1");
  if (c.demonstrations < 1) fail(ErrorCode::ConfigError, "demonstrations must be >= 1");
  if (!(c.dev_fraction > 0.0 && c.dev_fraction < 1.0)) fail(ErrorCode::ConfigError, "dev_fraction must be in (0, 1)");
  if (c.datasets.empty()) fail(ErrorCode::ConfigError, "no datasets configured");
  if (c.max_tokens <= 0 || c.reasoning_max_tokens <= 0 || c.temperature < 0.0) fail(ErrorCode::ConfigError, "bad generation parameters");
  const bool pipeline_mode = c.prompt_mode == PromptMode::drgap || c.prompt_mode == PromptMode::drgap_agg;
  if (pipeline_mode && !c.reference) fail(ErrorCode::ConfigError, "drgap modes need a reference endpoint");
  if (!pipeline_mode && (c.ablation.no_verification || c.ablation.no_filtering || c.ablation.no_refinement))
    fail(ErrorCode::ConfigError, "ablation flags only apply to drgap modes");
  if (c.prompt_mode == PromptMode::external && !c.prompt_path) fail(ErrorCode::ConfigError, "external mode needs prompt_path");
  if (c.prompt_mode == PromptMode::cfd && !c.cfd_family) fail(ErrorCode::ConfigError, "cfd mode needs cfd_family");
}

namespace detail {

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (base / p).lexically_normal().string();
}

}  // namespace detail

/// Parses a run config. Relative paths resolve against `base_dir`.
inline RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  RunConfig c;
  try {
    c.label = j.value("label", std::string());
    // model_id is part of the cache key, so stubs default to role-specific ids
    c.target = gateway::endpoint_from_json(j.at("target"));
    if (!j.at("target").contains("model_id")) c.target.model_id += "/target";
    if (j.contains("reference") && !j.at("reference").is_null()) {
      c.reference = gateway::endpoint_from_json(j.at("reference"));
      if (!j.at("reference").contains("model_id")) c.reference->model_id += "/reference";
    }
    for (const auto& d : j.at("datasets")) {
      DatasetSpec s;
      try {
        s.id = corpus::parse_dataset_id(d.at("id").get<std::string>());
      } catch (const Error& e) {
        fail(ErrorCode::ConfigError, e.what());
      }
      s.path = detail::resolve(base_dir, d.at("path").get<std::string>());
      const auto format = d.value("format", std::string("native"));
      if (format != "native" && format != "canonical") fail(ErrorCode::ConfigError, "dataset format must be native or canonical");
      s.canonical = format == "canonical";
      c.datasets.push_back(s);
    }
    c.prompt_mode = parse_prompt_mode(j.value("prompt_mode", std::string("none")));
    if (j.contains("prompt_path")) c.prompt_path = detail::resolve(base_dir, j.at("prompt_path").get<std::string>());
    if (j.contains("cfd_family")) c.cfd_family = j.at("cfd_family").get<std::string>();
    c.repetitions = j.value("repetitions", c.repetitions);
    c.refinement_rounds = j.value("refinement_rounds", c.refinement_rounds);
    c.demonstrations = j.value("demonstrations", c.demonstrations);
    c.dev_fraction = j.value("dev_fraction", c.dev_fraction);
    c.stratify = j.value("stratify", c.stratify);
    c.seed = j.value("seed", c.seed);
    c.temperature = j.value("temperature", c.temperature);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
    c.reasoning_max_tokens = j.value("reasoning_max_tokens", c.reasoning_max_tokens);
    if (j.contains("cache_dir") && !j.at("cache_dir").is_null())
      c.cache_dir = detail::resolve(base_dir, j.at("cache_dir").get<std::string>());
    c.output_dir = detail::resolve(base_dir, j.value("output_dir", c.output_dir));
    if (j.contains("ablation")) {
      const auto& a = j.at("ablation");
      c.ablation.no_verification = a.value("no_verification", false);
      c.ablation.no_filtering = a.value("no_filtering", false);
      c.ablation.no_refinement = a.value("no_refinement", false);
    }
    if (j.contains("baseline_manifest")) c.baseline_manifest = detail::resolve(base_dir, j.at("baseline_manifest").get<std::string>());
    if (j.contains("limit") && !j.at("limit").is_null()) c.limit = j.at("limit").get<std::size_t>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("bad run config: ") + e.what());
  }
  validate(c);
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(util::read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, "cannot parse " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

inline json to_json(const RunConfig& c) {
  json j;
  j["label"] = c.label;
  j["target"] = gateway::to_json(c.target);
  j["reference"] = c.reference ? gateway::to_json(*c.reference) : json(nullptr);
  j["datasets"] = json::array();
  for (const auto& d : c.datasets)
    j["datasets"].push_back({{"id", corpus::to_string(d.id)}, {"path", d.path}, {"format", d.canonical ? "canonical" : "native"}});
  j["prompt_mode"] = to_string(c.prompt_mode);
  if (c.prompt_path) j["prompt_path"] = *c.prompt_path;
  if (c.cfd_family) j["cfd_family"] = *c.cfd_family;
  j["repetitions"] = c.repetitions;
  j["refinement_rounds"] = c.refinement_rounds;
  j["demonstrations"] = c.demonstrations;
  j["dev_fraction"] = c.dev_fraction;
  j["stratify"] = c.stratify;
  j["seed"] = c.seed;
  j["temperature"] = c.temperature;
  j["max_tokens"] = c.max_tokens;
  j["reasoning_max_tokens"] = c.reasoning_max_tokens;
  j["cache_dir"] = c.cache_dir ? json(*c.cache_dir) : json(nullptr);
  j["output_dir"] = c.output_dir;
  j["ablation"] = {{"no_verification", c.ablation.no_verification},
                   {"no_filtering", c.ablation.no_filtering},
                   {"no_refinement", c.ablation.no_refinement}};
  if (c.baseline_manifest) j["baseline_manifest"] = *c.baseline_manifest;
  j["limit"] = c.limit ? json(*c.limit) : json(nullptr);
  return j;
}

/// Row label used in comparison tables.
inline std::string display_label(const RunConfig& c) {
  if (!c.label.empty()) return c.label;
  std::string s(to_string(c.prompt_mode));
  if (c.prompt_mode == PromptMode::drgap || c.prompt_mode == PromptMode::drgap_agg) {
    const auto a = pipeline::to_string(c.ablation);
    if (a != "full") s += "[" + a + "]";
  }
  return s;
}

}  // namespace fairprompt::harness
