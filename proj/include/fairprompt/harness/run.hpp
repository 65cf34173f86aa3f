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

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fairprompt/baselines/banks.hpp"
#include "fairprompt/corpus/adapters.hpp"
#include "fairprompt/corpus/canonical_io.hpp"
#include "fairprompt/corpus/split.hpp"
#include "fairprompt/harness/config.hpp"
#include "fairprompt/harness/evaluate.hpp"
#include "fairprompt/pipeline/selection.hpp"
#include "fairprompt/pipeline/stages.hpp"

namespace fairprompt::harness {

namespace fs = std::filesystem;

struct RunManifest {
  json config;
  std::string label;
  std::string mode;
  std::string started_at;
  std::string finished_at;
  std::string status = "complete";
  std::vector<std::string> datasets;
  std::map<std::string, metrics::MetricReport> metrics;           // test split, configured prompt
  std::map<std::string, metrics::MetricReport> baseline_metrics;  // test split, no prompt (pipeline runs)
  std::optional<std::string> selected_prompt;                     // path relative to the run dir
  std::map<std::string, std::string> artifacts;                   // name -> relative path
  json gateway = json::object();
  fs::path run_dir;
};

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json to_json(const RunManifest& m) {
  json j;
  j["config"] = m.config;
  j["label"] = m.label;
  j["mode"] = m.mode;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["status"] = m.status;
  j["datasets"] = m.datasets;
  j["metrics"] = json::object();
  for (const auto& [k, r] : m.metrics) j["metrics"][k] = metrics::to_json(r);
  j["baseline_metrics"] = json::object();
  for (const auto& [k, r] : m.baseline_metrics) j["baseline_metrics"][k] = metrics::to_json(r);
  j["selected_prompt"] = m.selected_prompt ? json(*m.selected_prompt) : json(nullptr);
  j["artifacts"] = m.artifacts;
  j["gateway"] = m.gateway;
  return j;
}

inline RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  try {
    m.config = j.at("config");
    m.label = j.value("label", std::string());
    m.mode = j.at("mode").get<std::string>();
    m.started_at = j.value("started_at", std::string());
    m.finished_at = j.value("finished_at", std::string());
    m.status = j.value("status", std::string("complete"));
    m.datasets = j.at("datasets").get<std::vector<std::string>>();
    for (const auto& [k, v] : j.at("metrics").items()) m.metrics[k] = metrics::report_from_json(v);
    if (j.contains("baseline_metrics"))
      for (const auto& [k, v] : j.at("baseline_metrics").items()) m.baseline_metrics[k] = metrics::report_from_json(v);
    if (j.contains("selected_prompt") && !j.at("selected_prompt").is_null())
      m.selected_prompt = j.at("selected_prompt").get<std::string>();
    if (j.contains("artifacts")) m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
    if (j.contains("gateway")) m.gateway = j.at("gateway");
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedRecord, std::string("bad manifest: ") + e.what());
  }
  return m;
}

/// Accepts a run directory or a manifest.json path.
inline RunManifest load_manifest(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / "manifest.json" : path;
  json j;
  try {
    j = json::parse(util::read_file(file));
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedRecord, "cannot parse " + file.string() + ": " + e.what());
  }
  auto m = manifest_from_json(j);
  m.run_dir = file.parent_path();
  return m;
}

/// The manifest minus fields that legitimately differ between identical
/// runs: wall-clock timestamps and gateway traffic counters (a warm cache
/// changes how many provider calls happen, not what they return).
inline json reproducible_view(const RunManifest& m) {
  auto j = to_json(m);
  j.erase("started_at");
  j.erase("finished_at");
  j.erase("gateway");
  return j;
}

/// Loaded corpora plus the gateways for one run.
struct Session {
  RunConfig config;
  std::vector<std::pair<corpus::DatasetId, std::vector<corpus::Example>>> corpora;
  std::shared_ptr<gateway::AnswerKey> key;
  std::unique_ptr<gateway::Gateway> target;
  std::unique_ptr<gateway::Gateway> reference;

  const std::vector<corpus::Example>& corpus_of(corpus::DatasetId id) const {
    for (const auto& [d, c] : corpora)
      if (d == id) return c;
    fail(ErrorCode::UnknownDataset, "dataset not loaded: " + std::string(corpus::to_string(id)));
  }

  EvalOptions eval_options() const {
    return {config.repetitions, config.seed, config.temperature, config.max_tokens};
  }
};

inline std::vector<corpus::Example> load_spec(const DatasetSpec& spec, std::optional<std::size_t> limit = {}) {
  auto examples = spec.canonical ? corpus::canonical_read(spec.path) : corpus::load_dataset(spec.id, spec.path);
  if (spec.canonical)
    for (const auto& ex : examples)
      if (ex.dataset_id != spec.id)
        fail(ErrorCode::MalformedRecord, "record " + ex.id + " belongs to " + std::string(corpus::to_string(ex.dataset_id)));
  if (examples.empty()) fail(ErrorCode::EmptyCorpus, "no examples in " + spec.path);
  if (limit && examples.size() > *limit) examples.resize(*limit);
  return examples;
}

inline Session open_session(const RunConfig& config) {
  Session s;
  s.config = config;
  s.key = std::make_shared<gateway::AnswerKey>();
  for (const auto& spec : config.datasets) {
    auto examples = load_spec(spec, config.limit);
    for (const auto& ex : examples) s.key->add(ex);
    s.corpora.emplace_back(spec.id, std::move(examples));
  }
  std::optional<fs::path> cache;
  if (config.cache_dir) cache = fs::path(*config.cache_dir);
  s.target = std::make_unique<gateway::Gateway>(config.target, gateway::make_provider(config.target, s.key), cache);
  if (config.reference)
    s.reference =
        std::make_unique<gateway::Gateway>(*config.reference, gateway::make_provider(*config.reference, s.key), cache);
  return s;
}

inline corpus::Split split_for(const Session& s, corpus::DatasetId id) {
  return corpus::make_split(s.corpus_of(id), corpus::SplitOptions{s.config.dev_fraction, s.config.seed, s.config.stratify});
}

namespace detail {

inline std::string ds_name(corpus::DatasetId id) { return std::string(corpus::to_string(id)); }

/// Evaluates and writes the verdict ledger, also when a call fails midway.
inline std::vector<metrics::ExampleOutcome> eval_persist(gateway::Gateway& gw, const std::vector<corpus::Example>& examples,
                                                         const std::optional<std::string>& prompt, const EvalOptions& opt,
                                                         const fs::path& ledger) {
  auto result = evaluate(gw, examples, prompt, opt);
  util::write_file_atomic(ledger, to_jsonl(result.outcomes));
  if (result.error) {
    try {
      std::rethrow_exception(result.error);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " [example " + result.failed_example + "; " +
                                std::to_string(result.outcomes.size()) + " finished outcomes kept in " +
                                ledger.string() + "]");
    }
  }
  return std::move(result.outcomes);
}

inline std::optional<double> dev_score(const metrics::MetricReport& r) {
  if (auto b = r.bias()) return *b;
  if (auto a = r.accuracy()) return -*a;  // utility-only sets: higher accuracy is better
  return std::nullopt;
}

inline void write_json(const fs::path& path, const json& j) { util::write_file_atomic(path, j.dump(2) + "\n"); }

inline void finish(RunManifest& m, const Session& s) {
  m.finished_at = utc_now();
  m.gateway["target"] = gateway::to_json(s.target->stats());
  if (s.reference) m.gateway["reference"] = gateway::to_json(s.reference->stats());
  write_json(m.run_dir / "manifest.json", to_json(m));
}

inline RunManifest begin(const Session& s) {
  RunManifest m;
  m.config = to_json(s.config);
  m.label = display_label(s.config);
  m.mode = std::string(to_string(s.config.prompt_mode));
  m.started_at = utc_now();
  m.run_dir = s.config.output_dir;
  for (const auto& [id, c] : s.corpora) m.datasets.push_back(ds_name(id));
  fs::create_directories(m.run_dir);
  write_json(m.run_dir / "config.json", m.config);
  m.artifacts["config"] = "config.json";
  return m;
}

inline std::optional<std::string> fixed_prompt(const RunConfig& c, corpus::DatasetId id) {
  switch (c.prompt_mode) {
    case PromptMode::none: return std::nullopt;
    case PromptMode::manual: return baselines::manual_prompt(id).rendered;
    case PromptMode::cfd: return baselines::cfd_prompt(*c.cfd_family);
    case PromptMode::external: return util::read_file(*c.prompt_path);
    default: fail(ErrorCode::ConfigError, "prompt mode needs the pipeline");
  }
}

}  // namespace detail

/// Test-split evaluation of each dataset under a fixed prompt mode.
inline RunManifest run_eval(const RunConfig& config) {
  if (config.prompt_mode == PromptMode::drgap || config.prompt_mode == PromptMode::drgap_agg)
    fail(ErrorCode::ConfigError, "use run_drgap for pipeline modes");
  Session s = open_session(config);
  RunManifest m = detail::begin(s);
  std::optional<RunManifest> baseline;
  if (config.baseline_manifest) baseline = load_manifest(*config.baseline_manifest);
  try {
    for (const auto& [id, examples] : s.corpora) {
      const auto name = detail::ds_name(id);
      const auto split = split_for(s, id);
      detail::write_json(m.run_dir / "splits" / (name + ".json"), corpus::to_json(split));
      const auto test = corpus::select_ids(examples, split.test_ids);
      const auto prompt = detail::fixed_prompt(config, id);
      if (prompt) util::write_file_atomic(m.run_dir / "prompts" / (name + ".txt"), *prompt);
      const auto outcomes =
          detail::eval_persist(*s.target, test, prompt, s.eval_options(), m.run_dir / "verdicts" / (name + ".jsonl"));
      auto report = metrics::compute_report(id, test, outcomes);
      if (baseline) {
        auto it = baseline->metrics.find(name);
        if (it != baseline->metrics.end()) metrics::apply_baseline(report, it->second, *config.baseline_manifest);
      }
      detail::write_json(m.run_dir / "metrics" / (name + ".json"), metrics::to_json(report));
      m.artifacts["verdicts/" + name] = "verdicts/" + name + ".jsonl";
      m.artifacts["metrics/" + name] = "metrics/" + name + ".json";
      m.metrics[name] = report;
    }
  } catch (...) {
    m.status = "aborted";
    detail::finish(m, s);
    throw;
  }
  detail::finish(m, s);
  return m;
}

/// Pipeline run: dev evaluation, demonstration selection, reasoning stages,
/// candidate scoring on dev, then test evaluation with and without the
/// selected prompt.
inline RunManifest run_drgap(const RunConfig& config) {
  if (config.prompt_mode != PromptMode::drgap && config.prompt_mode != PromptMode::drgap_agg)
    fail(ErrorCode::ConfigError, "run_drgap needs prompt_mode drgap or drgap_agg");
  Session s = open_session(config);
  RunManifest m = detail::begin(s);
  const auto opt = s.eval_options();
  const pipeline::GenerationOptions gen{config.temperature, config.reasoning_max_tokens,
                                        static_cast<std::int64_t>(config.seed)};
  std::string candidates_jsonl, demonstrations_jsonl;
  std::vector<std::pair<corpus::DatasetId, pipeline::SystemPromptCandidate>> selected;
  std::map<std::string, corpus::Split> splits;

  try {
    for (const auto& [id, examples] : s.corpora) {
      const auto name = detail::ds_name(id);
      const auto split = split_for(s, id);
      splits[name] = split;
      detail::write_json(m.run_dir / "splits" / (name + ".json"), corpus::to_json(split));
      const auto dev = corpus::select_ids(examples, split.dev_ids);
      if (dev.empty()) fail(ErrorCode::EmptyDevSet, "dev split of " + name + " is empty");

      const auto dev_target =
          detail::eval_persist(*s.target, dev, std::nullopt, opt, m.run_dir / "verdicts" / "dev" / (name + ".target.jsonl"));
      const bool gold_less = std::none_of(dev.begin(), dev.end(), [](const auto& ex) { return ex.gold.has_value(); });
      std::vector<metrics::ExampleOutcome> dev_reference;
      if (!gold_less)
        dev_reference = detail::eval_persist(*s.reference, dev, std::nullopt, opt,
                                             m.run_dir / "verdicts" / "dev" / (name + ".reference.jsonl"));

      std::vector<std::string> dev_order;
      for (const auto& ex : dev) dev_order.push_back(ex.id);
      const auto selection =
          pipeline::select_demonstrations(dev_order, majority_verdicts(dev_target), majority_verdicts(dev_reference),
                                          static_cast<std::size_t>(config.demonstrations), config.seed, gold_less);

      std::vector<pipeline::Demonstration> demos;
      std::vector<std::vector<pipeline::ReasoningCandidate>> chains;
      for (const auto& demo_id : selection.ids) {
        const auto& ex = *std::find_if(dev.begin(), dev.end(), [&](const auto& e) { return e.id == demo_id; });
        demos.push_back(pipeline::make_demonstration(ex));
        chains.push_back(pipeline::run_chain(*s.reference, demos.back(), config.refinement_rounds, config.ablation, gen));
        json row{{"dataset", name},
                 {"selection_rule", pipeline::to_string(selection.rule)},
                 {"demonstration", pipeline::to_json(demos.back())},
                 {"chain", json::array()}};
        for (const auto& r : chains.back()) row["chain"].push_back(pipeline::to_json(r));
        demonstrations_jsonl += row.dump() + "\n";
      }

      auto candidates = pipeline::assemble_candidates(demos, chains, config.ablation);
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        auto& c = candidates[i];
        const auto outcomes = detail::eval_persist(*s.target, dev, c.rendered, opt,
                                                   m.run_dir / "verdicts" / "dev" / (name + ".candidate" + std::to_string(i) + ".jsonl"));
        const auto report = metrics::compute_report(id, dev, outcomes);
        c.dev_metric = report.bias_metric ? *report.bias_metric : report.accuracy_metric ? "-" + *report.accuracy_metric : "";
        c.dev_score = detail::dev_score(report);
      }
      const std::size_t best = pipeline::best_scored(candidates);
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        json row = pipeline::to_json(candidates[i]);
        row["dataset"] = name;
        row["stage"] = candidates[i].label;
        row["selected"] = i == best;
        row.erase("members");
        candidates_jsonl += row.dump() + "\n";
      }
      util::write_file_atomic(m.run_dir / "selected_prompts" / (name + ".txt"), candidates[best].rendered);
      m.artifacts["selected_prompts/" + name] = "selected_prompts/" + name + ".txt";
      selected.emplace_back(id, candidates[best]);
    }
    util::write_file_atomic(m.run_dir / "candidates.jsonl", candidates_jsonl);
    util::write_file_atomic(m.run_dir / "demonstrations.jsonl", demonstrations_jsonl);
    m.artifacts["candidates"] = "candidates.jsonl";
    m.artifacts["demonstrations"] = "demonstrations.jsonl";

    std::optional<pipeline::SystemPromptCandidate> aggregated;
    if (config.prompt_mode == PromptMode::drgap_agg) {
      std::vector<pipeline::SystemPromptCandidate> parts;
      for (const auto& [id, c] : selected) parts.push_back(c);
      aggregated = pipeline::aggregate_prompt(parts);
    }
    const std::string& headline = aggregated ? aggregated->rendered : selected.front().second.rendered;
    util::write_file_atomic(m.run_dir / "selected_prompt.txt", headline);
    m.selected_prompt = "selected_prompt.txt";

    for (const auto& [id, chosen] : selected) {
      const auto name = detail::ds_name(id);
      const auto test = corpus::select_ids(s.corpus_of(id), splits[name].test_ids);
      const auto base_out =
          detail::eval_persist(*s.target, test, std::nullopt, opt, m.run_dir / "verdicts" / "baseline" / (name + ".jsonl"));
      const auto base_report = metrics::compute_report(id, test, base_out);
      detail::write_json(m.run_dir / "metrics" / "baseline" / (name + ".json"), metrics::to_json(base_report));
      const std::string& prompt = aggregated ? aggregated->rendered : chosen.rendered;
      const auto outcomes =
          detail::eval_persist(*s.target, test, prompt, opt, m.run_dir / "verdicts" / (name + ".jsonl"));
      auto report = metrics::compute_report(id, test, outcomes);
      metrics::apply_baseline(report, base_report, "metrics/baseline/" + name + ".json");
      detail::write_json(m.run_dir / "metrics" / (name + ".json"), metrics::to_json(report));
      m.artifacts["verdicts/" + name] = "verdicts/" + name + ".jsonl";
      m.artifacts["metrics/" + name] = "metrics/" + name + ".json";
      m.artifacts["metrics/baseline/" + name] = "metrics/baseline/" + name + ".json";
      m.metrics[name] = report;
      m.baseline_metrics[name] = base_report;
    }
  } catch (...) {
    if (!candidates_jsonl.empty()) util::write_file_atomic(m.run_dir / "candidates.jsonl", candidates_jsonl);
    if (!demonstrations_jsonl.empty()) util::write_file_atomic(m.run_dir / "demonstrations.jsonl", demonstrations_jsonl);
    m.status = "aborted";
    detail::finish(m, s);
    throw;
  }
  detail::finish(m, s);
  return m;
}

/// Dispatches on the prompt mode.
inline RunManifest run(const RunConfig& config) {
  if (config.prompt_mode == PromptMode::drgap || config.prompt_mode == PromptMode::drgap_agg) return run_drgap(config);
  return run_eval(config);
}

}  // namespace fairprompt::harness
