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
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fairprompt/harness/run.hpp"

namespace fairprompt::harness {

struct Column {
  std::string dataset;
  std::string key;    // metric key, or "delta_acc" / "delta_bias"
  std::string label;  // header text
  bool higher_is_better = true;
  bool by_magnitude = false;  // signed bias scores rank by |value|
};

struct Row {
  std::string label;
  bool original = false;
  std::vector<std::optional<double>> values;
  std::vector<int> rank;  // 1 best, 2 second best, 0 otherwise
};

struct ComparisonTable {
  std::vector<Column> columns;
  std::vector<Row> rows;
  bool has_deltas = false;
};

namespace detail {

inline std::optional<double> metric_value(const RunManifest& m, const std::string& dataset, const std::string& key) {
  auto it = m.metrics.find(dataset);
  if (it == m.metrics.end()) return std::nullopt;
  return it->second.value(key);
}

inline void rank_column(std::vector<Row>& rows, std::size_t col, const Column& c) {
  std::vector<double> keyed;
  const auto key = [&](double v) {
    const double x = c.by_magnitude ? std::abs(v) : v;
    return c.higher_is_better ? -x : x;
  };
  for (const auto& r : rows)
    if (!r.original && r.values[col]) keyed.push_back(key(*r.values[col]));
  std::sort(keyed.begin(), keyed.end());
  keyed.erase(std::unique(keyed.begin(), keyed.end()), keyed.end());
  for (auto& r : rows) {
    if (r.original || !r.values[col]) continue;
    const double k = key(*r.values[col]);
    if (!keyed.empty() && k == keyed[0]) r.rank[col] = 1;
    else if (keyed.size() > 1 && k == keyed[1]) r.rank[col] = 2;
  }
}

}  // namespace detail

/// Rows follow `manifests`. The original row is `original` if given, else
/// the first run without a system prompt. Delta columns appear when there
/// is an original and at least one other run; best and second-best are
/// ranked among the non-original rows.
inline ComparisonTable build_report(const std::vector<RunManifest>& manifests, std::optional<std::size_t> original = {}) {
  if (manifests.empty()) fail(ErrorCode::InvalidArgument, "no manifests to report");
  std::set<std::string> coverage(manifests.front().datasets.begin(), manifests.front().datasets.end());
  for (const auto& m : manifests)
    if (std::set<std::string>(m.datasets.begin(), m.datasets.end()) != coverage)
      fail(ErrorCode::IncomparableRuns, "runs '" + manifests.front().label + "' and '" + m.label + "' cover different datasets");
  if (original && *original >= manifests.size()) fail(ErrorCode::InvalidArgument, "original index out of range");
  if (!original)
    for (std::size_t i = 0; i < manifests.size(); ++i)
      if (manifests[i].mode == "none") {
        original = i;
        break;
      }

  ComparisonTable t;
  t.has_deltas = original.has_value() && manifests.size() >= 2;
  for (const auto& ds : manifests.front().datasets) {
    const auto id = corpus::parse_dataset_id(ds);
    const auto display = metrics::display_metric(id);
    bool any_acc = false;
    for (const auto& m : manifests) any_acc = any_acc || detail::metric_value(m, ds, "acc").has_value();
    if (any_acc && display.key != "acc") t.columns.push_back({ds, "acc", "Acc", true, false});
    t.columns.push_back({ds, display.key, display.label, display.higher_is_better,
                         !display.higher_is_better && (display.key == "delta_g" || display.key == "s_amb_x100")});
    if (t.has_deltas) {
      t.columns.push_back({ds, "delta_acc", "dAcc", true, false});
      t.columns.push_back({ds, "delta_bias", "dBias", true, false});
    }
  }

  for (std::size_t i = 0; i < manifests.size(); ++i) {
    const auto& m = manifests[i];
    Row r;
    r.label = m.label.empty() ? m.mode : m.label;
    r.original = original && *original == i;
    for (const auto& c : t.columns) {
      std::optional<double> v;
      if (c.key == "delta_acc" || c.key == "delta_bias") {
        if (!r.original) {
          const auto& cur = m.metrics.at(c.dataset);
          const auto& base = manifests[*original].metrics.at(c.dataset);
          const auto a = c.key == "delta_acc" ? cur.accuracy() : cur.bias();
          const auto b = c.key == "delta_acc" ? base.accuracy() : base.bias();
          if (a && b && *b > 0.0) v = c.key == "delta_acc" ? metrics::delta_acc(*a, *b) : metrics::delta_bias(*b, *a);
        }
      } else {
        v = detail::metric_value(m, c.dataset, c.key);
      }
      r.values.push_back(v);
    }
    r.rank.assign(t.columns.size(), 0);
    t.rows.push_back(std::move(r));
  }
  for (std::size_t c = 0; c < t.columns.size(); ++c) detail::rank_column(t.rows, c, t.columns[c]);
  return t;
}

inline std::string format_value(double v, bool percent) {
  char buf[64];
  std::snprintf(buf, sizeof buf, percent ? "%.1f%%" : "%.3f", percent ? 100.0 * v : v);
  return buf;
}

/// Markdown table; best values in bold, second best underlined.
inline std::string render_text(const ComparisonTable& t) {
  std::string header = "| Method |", rule = "|---|";
  for (const auto& c : t.columns) {
    header += " " + c.dataset + " " + c.label + (c.higher_is_better ? " ↑" : " ↓") + " |";
    rule += "---|";
  }
  std::string out = header + "\n" + rule + "\n";
  for (const auto& r : t.rows) {
    out += "| " + r.label + (r.original ? " (original)" : "") + " |";
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      std::string cell = "-";
      if (r.values[c]) {
        const bool pct = t.columns[c].key == "delta_acc" || t.columns[c].key == "delta_bias";
        cell = format_value(*r.values[c], pct);
        if (r.rank[c] == 1) cell = "**" + cell + "**";
        if (r.rank[c] == 2) cell = "<u>" + cell + "</u>";
      }
      out += " " + cell + " |";
    }
    out += "\n";
  }
  return out;
}

inline std::string render_csv(const ComparisonTable& t) {
  std::string out = "method,original";
  for (const auto& c : t.columns) out += "," + c.dataset + ":" + c.key;
  for (const auto& c : t.columns) out += "," + c.dataset + ":" + c.key + ":rank";
  out += "\n";
  for (const auto& r : t.rows) {
    out += r.label + "," + (r.original ? "1" : "0");
    for (const auto& v : r.values) out += "," + (v ? json(*v).dump() : std::string());
    for (int k : r.rank) out += "," + std::to_string(k);
    out += "\n";
  }
  return out;
}

inline json to_json(const ComparisonTable& t) {
  json cols = json::array();
  for (const auto& c : t.columns)
    cols.push_back({{"dataset", c.dataset},
                    {"key", c.key},
                    {"label", c.label},
                    {"orientation", c.higher_is_better ? "higher_is_better" : "lower_is_better"}});
  json rows = json::array();
  for (const auto& r : t.rows) {
    json vals = json::array();
    for (const auto& v : r.values) vals.push_back(v ? json(*v) : json(nullptr));
    json flags = json::array();
    for (int k : r.rank) flags.push_back(k == 1 ? "best" : k == 2 ? "second" : "");
    rows.push_back({{"label", r.label}, {"original", r.original}, {"values", vals}, {"flags", flags}});
  }
  return {{"columns", cols}, {"rows", rows}, {"has_deltas", t.has_deltas}};
}

}  // namespace fairprompt::harness
