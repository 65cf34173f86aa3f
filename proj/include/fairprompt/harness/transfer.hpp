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
#include <vector>

#include "fairprompt/harness/run.hpp"

namespace fairprompt::harness {

/// cells[t][s] = relative bias reduction on target t under source s's prompt;
/// null when the target's no-prompt bias is zero.
struct TransferMatrix {
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  std::vector<std::vector<std::optional<double>>> cells;
  std::map<std::string, double> baseline_bias;

  std::optional<double> at(const std::string& target, const std::string& source) const {
    for (std::size_t t = 0; t < targets.size(); ++t)
      for (std::size_t s = 0; s < sources.size(); ++s)
        if (targets[t] == target && sources[s] == source) return cells[t][s];
    fail(ErrorCode::InvalidArgument, "no cell " + target + " x " + source);
  }
};

inline json to_json(const TransferMatrix& m) {
  json cells = json::array();
  for (const auto& row : m.cells) {
    json r = json::array();
    for (const auto& c : row) r.push_back(c ? json(*c) : json(nullptr));
    cells.push_back(r);
  }
  return {{"metric", "delta_bias"},
          {"rows", "target"},
          {"columns", "source"},
          {"sources", m.sources},
          {"targets", m.targets},
          {"cells", cells},
          {"baseline_bias", m.baseline_bias}};
}

/// Targets down, sources across; empty field for undefined cells.
inline std::string to_csv(const TransferMatrix& m) {
  std::string out = "target";
  for (const auto& s : m.sources) out += "," + s;
  out += "\n";
  for (std::size_t t = 0; t < m.targets.size(); ++t) {
    out += m.targets[t];
    for (const auto& c : m.cells[t]) {
      out += ",";
      if (c) out += json(*c).dump();
    }
    out += "\n";
  }
  return out;
}

/// Reads selected_prompts/<dataset>.txt from a pipeline run directory.
inline std::map<std::string, std::string> prompts_from_run(const fs::path& run_dir) {
  std::map<std::string, std::string> out;
  const auto dir = run_dir / "selected_prompts";
  if (!fs::is_directory(dir)) fail(ErrorCode::IoFailure, "no selected_prompts/ in " + run_dir.string());
  for (const auto& f : fs::directory_iterator(dir))
    if (f.path().extension() == ".txt") out[f.path().stem().string()] = util::read_file(f.path());
  return out;
}

/// Evaluates every source prompt on every target's test split and reports
/// the bias reduction against that target's no-prompt run.
inline TransferMatrix run_transfer_matrix(const RunConfig& config, const std::map<std::string, std::string>& source_prompts,
                                          const std::vector<std::string>& targets) {
  if (source_prompts.empty()) fail(ErrorCode::InvalidArgument, "no source prompts");
  Session s = open_session(config);
  const fs::path out_dir = config.output_dir;
  fs::create_directories(out_dir);
  const auto opt = s.eval_options();

  TransferMatrix m;
  for (const auto& [src, prompt] : source_prompts) m.sources.push_back(src);
  m.targets = targets;
  for (const auto& tname : targets) {
    const auto id = corpus::parse_dataset_id(tname);
    const auto& examples = s.corpus_of(id);
    const auto test = corpus::select_ids(examples, split_for(s, id).test_ids);
    const auto base_out =
        detail::eval_persist(*s.target, test, std::nullopt, opt, out_dir / "verdicts" / tname / "baseline.jsonl");
    const auto base = metrics::compute_report(id, test, base_out);
    detail::write_json(out_dir / "metrics" / tname / "baseline.json", metrics::to_json(base));
    const auto b0 = base.bias();
    if (!b0) fail(ErrorCode::MissingBaseline, "no baseline bias for target " + tname);
    m.baseline_bias[tname] = *b0;

    std::vector<std::optional<double>> row;
    for (const auto& [src, prompt] : source_prompts) {
      const auto outcomes =
          detail::eval_persist(*s.target, test, prompt, opt, out_dir / "verdicts" / tname / (src + ".jsonl"));
      auto report = metrics::compute_report(id, test, outcomes);
      metrics::apply_baseline(report, base, "metrics/" + tname + "/baseline.json");
      detail::write_json(out_dir / "metrics" / tname / (src + ".json"), metrics::to_json(report));
      row.push_back(report.delta_bias);
    }
    m.cells.push_back(std::move(row));
  }
  detail::write_json(out_dir / "transfer.json", to_json(m));
  util::write_file_atomic(out_dir / "transfer.csv", to_csv(m));
  return m;
}

}  // namespace fairprompt::harness
