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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Everything runs offline against stubs.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <type_traits>

#include "fairprompt/baselines/banks.hpp"
#include "fairprompt/harness/run.hpp"
#include "fairprompt/harness/transfer.hpp"
#include "fairprompt/pipeline/selection.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace fp = fairprompt;
namespace hs = fairprompt::harness;
namespace pl = fairprompt::pipeline;
namespace fs = std::filesystem;
using fp::extract::Verdict;
using fp::testing::TempDir;
using nlohmann::json;

namespace {

template <typename T>
struct is_optional : std::false_type {};
template <typename T>
struct is_optional<std::optional<T>> : std::true_type {};

template <typename T>
std::string describe(const T& v) {
  if constexpr (is_optional<T>::value) return v ? describe(*v) : std::string("null");
  else if constexpr (std::is_enum_v<T>) return std::to_string(static_cast<int>(v));
  else return json(v).dump();
}

/// Collects failed expectations for one criterion.
struct Check {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  template <typename A, typename B>
  void equal(const A& a, const B& b, const std::string& what) {
    if (!(a == b)) {
      failures.push_back(what + ": got " + describe(a) + ", want " + describe(b));
    }
  }
};

struct Criterion {
  int number;
  std::string name;
  double budget_s;  // 0: no bound
  std::function<void(Check&)> body;
  bool note_only = false;
};

std::string golden(const std::string& name) { return fp::util::read_file(fp::testing::source_dir() / "tests" / "golden" / name); }
std::string asset(const std::string& rel) { return fp::util::read_file(fp::testing::source_dir() / "assets" / rel); }

std::vector<json> read_jsonl(const fs::path& p) {
  std::vector<json> rows;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) rows.push_back(json::parse(line));
  return rows;
}

std::vector<std::string> stages_of(const fs::path& run_dir) {
  std::vector<std::string> out;
  for (const auto& r : read_jsonl(run_dir / "candidates.jsonl")) out.push_back(r.at("stage").get<std::string>());
  return out;
}

void metric_oracles(Check& c) {
  const auto tally = fp::testing::run_metric_oracles(200, 20260401);
  c.expect(tally.checks >= 200 * 10, "fewer oracle checks than expected: " + std::to_string(tally.checks));
  for (const auto& f : tally.failures) c.failures.push_back(f);
}

void prompt_fidelity(Check& c) {
  const auto gap = fp::baselines::manual_entry(fp::corpus::DatasetId::gap);
  const auto& d = gap.demonstration;
  c.equal(pl::render_initial(d), golden("initial_reasoning_gap.txt"), "initial reasoning prompt");
  c.equal(pl::render_verification(d, gap.reasoning), golden("verification_gap.txt"), "verification prompt");
  c.equal(pl::render_filtering(d, gap.reasoning), golden("gender_filtering_gap.txt"), "gender filtering prompt");
  c.equal(pl::render_refinement(d, gap.reasoning), golden("iterative_refinement_gap.txt"), "iterative refinement prompt");
  c.expect(pl::render_verification(d, gap.reasoning).find("dose the reasonning:\"") != std::string::npos,
           "verification prompt lost its original spelling");

  const auto wb = fp::baselines::manual_entry(fp::corpus::DatasetId::winobias);
  const auto bug = fp::baselines::manual_entry(fp::corpus::DatasetId::bug);
  const auto sys = pl::render_system_prompt(
      {{wb.demonstration, {"a", {}, wb.reasoning, "m"}}, {bug.demonstration, {"b", {}, bug.reasoning, "m"}}});
  c.equal(sys.rendered, golden("system_prompt_two_members.txt"), "system prompt template");
  c.expect(sys.rendered.rfind("You are a fair and impartial assistant", 0) == 0, "system prompt preface");
  c.equal(asset("prompts/v1/system_template.txt"), std::string(pl::kSystemPreface) + "\n" + std::string(pl::kMemberBlock),
          "shipped system template");
  c.equal(asset("prompts/v1/verification.txt"), std::string(pl::kVerificationBox), "shipped verification box");

  const auto a = fp::baselines::cfd_prompt("gpt35_llama3");
  const auto b = fp::baselines::cfd_prompt("llama2_alpaca");
  c.equal(a, golden("cfd_gpt35_llama3.txt"), "CFD gpt35_llama3 block");
  c.equal(b, golden("cfd_llama2_alpaca.txt"), "CFD llama2_alpaca block");
  c.equal(asset("banks/v1/cfd_gpt35_llama3.txt"), a, "shipped CFD gpt35_llama3 block");
  c.equal(asset("banks/v1/cfd_llama2_alpaca.txt"), b, "shipped CFD llama2_alpaca block");
  c.expect(a.rfind("Despite being a female, Julia", 0) == 0, "CFD block opens with Julia");
  c.expect(b.find("Melissa") != std::string::npos, "CFD block names Melissa");
}

void synthetic_mitigation(Check& c) {
  TempDir tmp;
  const auto wb = fp::testing::write_winobias(tmp / "wb", 40);
  const auto m = hs::run(hs::config_from_json(fp::testing::drgap_config(wb, tmp / "run")));
  c.equal(m.baseline_metrics.at("winobias").value("acc_gap"), std::optional<double>(100.0), "pre-prompt AccGap");
  c.equal(m.metrics.at("winobias").value("acc_gap"), std::optional<double>(0.0), "post-prompt AccGap");
  c.equal(m.metrics.at("winobias").delta_bias, std::optional<double>(1.0), "reported delta bias");
  const auto rows = read_jsonl(tmp / "run" / "candidates.jsonl");
  std::vector<std::string> picked;
  for (const auto& r : rows)
    if (r.at("selected").get<bool>()) picked.push_back(r.at("stage").get<std::string>());
  c.equal(picked, std::vector<std::string>{"refined(2)"}, "selected candidate");
  const auto prompt = fp::util::read_file(tmp / "run" / "selected_prompt.txt");
  c.expect(prompt.find("[FAIR]") != std::string::npos, "selected prompt carries the marker");
}

/// Independent oracle: walk every dev id once, bucket it, and read the
/// answer off the first non-empty bucket.
std::vector<std::string> enumerate_selection(const std::vector<std::string>& dev, const pl::VerdictMap& t,
                                             const pl::VerdictMap& r, std::size_t k) {
  std::vector<std::string> buckets[2];
  for (const auto& id : dev) {
    const bool target_ok = t.count(id) && t.at(id) == Verdict::correct;
    const bool reference_ok = r.count(id) && r.at(id) == Verdict::correct;
    if (target_ok) continue;
    if (reference_ok) buckets[0].push_back(id);
    buckets[1].push_back(id);
  }
  for (auto& b : buckets)
    if (!b.empty()) {
      if (b.size() > k) b.resize(k);
      return b;
    }
  return {};
}

void selection_equivalence(Check& c) {
  std::mt19937_64 rng(4242);
  const Verdict kinds[] = {Verdict::correct, Verdict::incorrect, Verdict::unparseable};
  int random_tables = 0;
  for (int trial = 0; trial < 1000 && c.failures.size() < 5; ++trial) {
    const std::size_t n = 1 + rng() % 100;
    const double p_correct = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::vector<std::string> dev;
    pl::VerdictMap t, r;
    for (std::size_t i = 0; i < n; ++i) {
      dev.push_back("ex" + std::to_string(i * 7919 % 1000003));
      const auto draw = [&] {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p_correct ? Verdict::correct : kinds[1 + rng() % 2];
      };
      t[dev.back()] = draw();
      if (rng() % 10) r[dev.back()] = draw();  // some ids have no reference verdict
    }
    std::shuffle(dev.begin(), dev.end(), rng);
    const std::size_t k = 1 + rng() % 8;
    const auto got = pl::select_demonstrations(dev, t, r, k, static_cast<std::uint64_t>(trial));
    const auto want = enumerate_selection(dev, t, r, k);
    const auto tag = "table " + std::to_string(trial);
    if (!want.empty()) {
      c.equal(got.ids, want, tag);
      continue;
    }
    ++random_tables;
    c.equal(got.rule, pl::SelectionRule::random, tag + " rule");
    c.equal(got.ids.size(), std::min(k, n), tag + " size");
    c.equal(std::set<std::string>(got.ids.begin(), got.ids.end()).size(), got.ids.size(), tag + " distinct");
    for (const auto& id : got.ids) c.expect(std::find(dev.begin(), dev.end(), id) != dev.end(), tag + " outside dev");
    c.equal(pl::select_demonstrations(dev, t, r, k, static_cast<std::uint64_t>(trial)).ids, got.ids, tag + " determinism");
  }
  c.expect(random_tables > 0, "no table exercised the random fallback");
}

void candidate_ablation(Check& c) {
  TempDir tmp;
  const auto wb = fp::testing::write_winobias(tmp / "wb", 10);
  const auto run_with = [&](const std::string& name, json ablation) {
    auto cfg = fp::testing::drgap_config(wb, tmp / name);
    cfg["repetitions"] = 1;
    if (!ablation.is_null()) cfg["ablation"] = ablation;
    hs::run(hs::config_from_json(cfg));
    return stages_of(tmp / name);
  };
  using V = std::vector<std::string>;
  c.equal(run_with("full", nullptr), V{"initial", "verified", "filtered", "refined(1)", "refined(2)", "refined(3)"}, "full");
  c.equal(run_with("no_ver", {{"no_verification", true}}), V{"initial", "filtered", "refined(1)", "refined(2)", "refined(3)"},
          "without verification");
  c.equal(run_with("no_fil", {{"no_filtering", true}}), V{"initial", "verified", "refined(1)", "refined(2)", "refined(3)"},
          "without filtering");
  c.equal(run_with("no_ref", {{"no_refinement", true}}), V{"initial", "verified", "filtered"}, "without refinement");
  c.equal(hs::load_manifest(tmp / "no_ref").label, std::string("drgap"), "manifest label");
  auto unlabeled = fp::testing::drgap_config(wb, tmp / "x");
  unlabeled.erase("label");
  unlabeled["ablation"] = {{"no_filtering", true}};
  c.equal(hs::display_label(hs::config_from_json(unlabeled)), std::string("drgap[no_filtering]"), "ablation run label");
}

void determinism_and_cache(Check& c) {
  TempDir tmp;
  const auto wb = fp::testing::write_winobias(tmp / "wb", 20);
  const auto run_into = [&](const std::string& name, std::optional<fs::path> cache) {
    auto cfg = fp::testing::drgap_config(wb, tmp / name);
    if (cache) cfg["cache_dir"] = cache->string();
    return hs::run(hs::config_from_json(cfg));
  };
  run_into("a", std::nullopt);
  run_into("b", std::nullopt);
  for (const auto* f : {"metrics/winobias.json", "metrics/baseline/winobias.json", "candidates.jsonl", "verdicts/winobias.jsonl"})
    c.expect(fp::util::read_file(tmp / "a" / f) == fp::util::read_file(tmp / "b" / f), std::string(f) + " differs between runs");

  const auto cold = run_into("cold", tmp / "cache");
  const auto warm = run_into("warm", tmp / "cache");
  c.expect(cold.gateway.at("target").at("provider_invocations").get<int>() > 0, "cold run made no target calls");
  c.equal(warm.gateway.at("target").at("provider_invocations").get<int>(), 0, "warm target invocations");
  c.equal(warm.gateway.at("reference").at("provider_invocations").get<int>(), 0, "warm reference invocations");
  for (const auto* f : {"metrics/winobias.json", "candidates.jsonl"})
    c.expect(fp::util::read_file(tmp / "cold" / f) == fp::util::read_file(tmp / "warm" / f), std::string(f) + " differs on warm rerun");
  c.expect(fp::util::read_file(tmp / "a" / "metrics/winobias.json") == fp::util::read_file(tmp / "warm" / "metrics/winobias.json"),
           "cached run disagrees with uncached run");
}

void transfer_matrix(Check& c) {
  TempDir tmp;
  const auto cfg = hs::config_from_json(
      {{"target", fp::testing::marker_target()},
       {"datasets", json::array({{{"id", "winobias"}, {"path", fp::testing::write_winobias(tmp / "wb").string()}},
                                 {{"id", "winogender"}, {"path", fp::testing::write_winogender(tmp / "wg").string()}},
                                 {{"id", "gap"}, {"path", fp::testing::write_gap(tmp / "gap.tsv").string()}}})},
       {"repetitions", 1},
       {"output_dir", (tmp / "transfer").string()}});
  // only the winobias source prompt carries the marker the target reacts to
  const std::map<std::string, std::string> sources = {{"winobias", "Resolve by role. [FAIR]"},
                                                      {"winogender", "Resolve by role."},
                                                      {"gap", "Read the passage."}};
  const auto m = hs::run_transfer_matrix(cfg, sources, {"winobias", "winogender", "gap"});
  for (const auto& t : m.targets)
    for (const auto& s : m.sources) {
      const auto v = m.at(t, s);
      c.expect(v.has_value(), "undefined cell " + t + " x " + s);
      if (!v) continue;
      if (s == "winobias") c.equal(*v, 1.0, t + " x " + s);
      else c.equal(*v, 0.0, t + " x " + s);
    }
  c.expect(fs::exists(tmp / "transfer" / "transfer.csv"), "transfer.csv missing");
}

void live_note(Check&) {
  std::cout << "NOTE [7] live reproduction is not asserted offline. With credentials set, run\n"
               "         fairprompt eval -c <config with http_chat target> --live\n"
               "         to rerun one dataset against a live endpoint; values are reported without tolerance.\n";
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "metric oracles and hand cases", 5.0, metric_oracles},
      {2, "prompt fidelity against golden files", 1.0, prompt_fidelity},
      {3, "synthetic end-to-end mitigation", 60.0, synthetic_mitigation},
      {4, "differential selection equivalence", 10.0, selection_equivalence},
      {5, "candidate bookkeeping and ablations", 10.0, candidate_ablation},
      {6, "determinism and warm cache", 0.0, determinism_and_cache},
      {7, "live smoke mode (documented, not asserted)", 0.0, live_note, true},
      {8, "transfer matrix cells", 30.0, transfer_matrix},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cr.budget_s > 0 && secs >= cr.budget_s)
      check.failures.push_back("took " + std::to_string(secs) + " s, budget " + std::to_string(cr.budget_s) + " s");
    const bool ok = check.failures.empty();
    failed += !ok;
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.3fs", secs);
    std::cout << (ok ? "PASS" : "FAIL") << " [" << cr.number << "] " << cr.name << (cr.note_only ? " (note)" : "") << " ("
              << timing << ")\n";
    for (std::size_t i = 0; i < check.failures.size() && i < 10; ++i) std::cout << "     - " << check.failures[i] << "\n";
  }
  std::cout << (failed ? "FAILED " + std::to_string(failed) + " criteria" : std::string("all criteria passed")) << "\n";
  return failed ? 1 : 0;
}
