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
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairprompt/corpus/example.hpp"
#include "fairprompt/util/rng.hpp"

namespace fairprompt::corpus {

struct Split {
  std::set<std::string> dev_ids;
  std::set<std::string> test_ids;
  std::uint64_t seed = 0;

  bool operator==(const Split&) const = default;
};

struct SplitOptions {
  double dev_fraction = 0.2;
  std::uint64_t seed = 0;
  /// Split each (dataset, polarity, pronoun gender, context) stratum separately.
  bool stratify = false;
};

/// Partitions a corpus into dev and test. Members of a pair_group always land
/// on the same side. The result depends only on the example ids, their
/// grouping, the fraction and the seed (never on input order).
inline Split make_split(const std::vector<Example>& corpus, const SplitOptions& opts) {
  if (corpus.empty()) fail(ErrorCode::EmptyCorpus, "cannot split an empty corpus");
  if (!(opts.dev_fraction > 0.0 && opts.dev_fraction < 1.0))
    fail(ErrorCode::InvalidArgument, "dev_fraction must lie in (0, 1)");

  struct Unit {
    std::vector<std::string> ids;
    std::string stratum;
  };
  std::map<std::string, Unit> by_key;
  for (const auto& ex : corpus) {
    const std::string key = ex.pair_group ? "g:" + *ex.pair_group : "i:" + ex.id;
    auto& unit = by_key[key];
    unit.ids.push_back(ex.id);
    if (opts.stratify) {
      unit.stratum = ex.pair_group ? std::string(to_string(ex.dataset_id)) + "/pair"
                                   : std::string(to_string(ex.dataset_id)) + "/" + std::string(to_string(ex.polarity)) +
                                         "/" + std::string(to_string(ex.pronoun_gender)) + "/" +
                                         std::string(to_string(ex.context_condition));
    }
  }
  std::vector<Unit> units;
  for (auto& [key, unit] : by_key) {
    std::sort(unit.ids.begin(), unit.ids.end());
    units.push_back(std::move(unit));
  }
  std::sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) { return a.ids.front() < b.ids.front(); });
  util::SeededRng rng(opts.seed);
  rng.shuffle(units);

  std::map<std::string, std::vector<const Unit*>> strata;
  for (const auto& u : units) strata[u.stratum].push_back(&u);

  Split split;
  split.seed = opts.seed;
  std::vector<const Unit*> dev_units, test_units;
  for (const auto& [name, members] : strata) {
    std::size_t size = 0;
    for (const auto* u : members) size += u->ids.size();
    const auto target = static_cast<std::size_t>(std::llround(opts.dev_fraction * static_cast<double>(size)));
    std::size_t taken = 0;
    for (const auto* u : members) {
      if (taken + u->ids.size() <= target) {
        taken += u->ids.size();
        dev_units.push_back(u);
      } else {
        test_units.push_back(u);
      }
    }
  }
  // both sides stay non-empty whenever there are at least two units
  if (units.size() >= 2) {
    if (dev_units.empty()) {
      dev_units.push_back(test_units.front());
      test_units.erase(test_units.begin());
    } else if (test_units.empty()) {
      test_units.push_back(dev_units.back());
      dev_units.pop_back();
    }
  }
  for (const auto* u : dev_units) split.dev_ids.insert(u->ids.begin(), u->ids.end());
  for (const auto* u : test_units) split.test_ids.insert(u->ids.begin(), u->ids.end());
  return split;
}

inline Split make_split(const std::vector<Example>& corpus, double dev_fraction, std::uint64_t seed) {
  return make_split(corpus, SplitOptions{dev_fraction, seed, false});
}

/// Examples of `corpus` whose id is in `ids`, in corpus order.
inline std::vector<Example> select_ids(const std::vector<Example>& corpus, const std::set<std::string>& ids) {
  std::vector<Example> out;
  for (const auto& ex : corpus)
    if (ids.count(ex.id)) out.push_back(ex);
  return out;
}

inline nlohmann::json to_json(const Split& s) {
  return nlohmann::json{{"dev_ids", s.dev_ids}, {"test_ids", s.test_ids}, {"seed", s.seed}};
}

inline Split split_from_json(const nlohmann::json& j) {
  Split s;
  s.dev_ids = j.at("dev_ids").get<std::set<std::string>>();
  s.test_ids = j.at("test_ids").get<std::set<std::string>>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

}  // namespace fairprompt::corpus
