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
#include <map>
#include <string>
#include <vector>

#include "fairprompt/corpus/example.hpp"
#include "fairprompt/extract/answer.hpp"
#include "fairprompt/pipeline/prompts.hpp"
#include "fairprompt/util/rng.hpp"

namespace fairprompt::pipeline {

using extract::Verdict;
using VerdictMap = std::map<std::string, Verdict>;

/// Collapses m repetitions into one verdict: correct iff more than half of
/// the trials are correct.
inline Verdict majority_verdict(const std::vector<Verdict>& trials) {
  std::size_t correct = 0;
  for (auto v : trials) correct += v == Verdict::correct;
  return 2 * correct > trials.size() ? Verdict::correct : Verdict::incorrect;
}

enum class SelectionRule { differential, target_incorrect, random };

inline std::string_view to_string(SelectionRule r) {
  switch (r) {
    case SelectionRule::differential: return "differential";
    case SelectionRule::target_incorrect: return "target_incorrect";
    case SelectionRule::random: return "random";
  }
  return "?";
}

struct Selection {
  std::vector<std::string> ids;
  SelectionRule rule = SelectionRule::differential;
};

/// Up to k dev ids where the target fails and the reference succeeds, in
/// dev order. If none qualify, ids where the target fails; if still none, or
/// when the dataset has no gold, k ids drawn uniformly under `seed`.
inline Selection select_demonstrations(const std::vector<std::string>& dev_ids, const VerdictMap& target,
                                       const VerdictMap& reference, std::size_t k, std::uint64_t seed,
                                       bool gold_less = false) {
  if (dev_ids.empty()) fail(ErrorCode::EmptyDevSet, "no dev examples to select demonstrations from");
  if (k == 0) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  const auto verdict = [](const VerdictMap& m, const std::string& id) {
    auto it = m.find(id);
    return it == m.end() ? Verdict::unparseable : it->second;
  };
  Selection out;
  if (!gold_less) {
    for (const auto& id : dev_ids) {
      if (out.ids.size() == k) break;
      if (verdict(target, id) != Verdict::correct && verdict(reference, id) == Verdict::correct) out.ids.push_back(id);
    }
    if (!out.ids.empty()) return out;
    out.rule = SelectionRule::target_incorrect;
    for (const auto& id : dev_ids) {
      if (out.ids.size() == k) break;
      if (verdict(target, id) != Verdict::correct) out.ids.push_back(id);
    }
    if (!out.ids.empty()) return out;
  }
  out.rule = SelectionRule::random;
  util::SeededRng rng(seed);
  for (auto i : rng.sample_indices(dev_ids.size(), k)) out.ids.push_back(dev_ids[i]);
  return out;
}

/// The answer shown next to a demonstration: gold, with option indices
/// spelled out. Gold-less items get the fair answer for their format.
inline Demonstration make_demonstration(const corpus::Example& ex) {
  Demonstration d{ex.id, ex.question, ex.text, std::string(extract::kCannotBeDetermined)};
  using corpus::DatasetId;
  if (ex.dataset_id == DatasetId::stereoset) {
    if (auto anti = ex.meta_option("anti_stereotype_option"))
      d.answer = std::to_string(*anti) + "." + (*ex.options)[static_cast<std::size_t>(*anti - 1)];
    return d;
  }
  if (!ex.gold) return d;
  d.answer = *ex.gold;
  if (ex.task == corpus::Task::mcq && ex.options) {
    try {
      const int idx = std::stoi(*ex.gold);
      if (idx >= 1 && idx <= static_cast<int>(ex.options->size())) d.answer = (*ex.options)[static_cast<std::size_t>(idx - 1)];
    } catch (const std::exception&) {
    }
  }
  return d;
}

}  // namespace fairprompt::pipeline
