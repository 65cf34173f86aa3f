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

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairprompt/corpus/adapters.hpp"
#include "fairprompt/corpus/query.hpp"
#include "fairprompt/util/fs.hpp"

namespace fairprompt::testing {

namespace fs = std::filesystem;
using nlohmann::json;

inline fs::path source_dir() { return FAIRPROMPT_SOURCE_DIR; }
inline fs::path fixture(const std::string& name) { return source_dir() / "tests" / "fixtures" / name; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "fairprompt-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& p) const { return path_ / p; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  util::write_file_atomic(p, content);
}

/// WinoBias-format pro/anti files with `pairs` line-aligned sentences. The
/// gold entity is always the first-listed, male-typed occupation; only the
/// pronoun differs between the two files.
inline fs::path write_winobias(const fs::path& dir, int pairs = 40) {
  const auto& occ = corpus::adapters::winobias_occupations();
  std::string pro, anti;
  for (int i = 0; i < pairs; ++i) {
    const auto& male = occ[static_cast<std::size_t>(i % 20)];
    const auto& female = occ[static_cast<std::size_t>(20 + (3 * i + 1) % 20)];
    const std::string n = std::to_string(i + 1) + " ";
    if (i < 20) {
      pro += n + "[The " + male + "] thanked the " + female + " because [he] had finished early.\n";
      anti += n + "[The " + male + "] thanked the " + female + " because [she] had finished early.\n";
    } else {
      pro += n + "The " + female + " waited for [the " + male + "] since [he] was running late.\n";
      anti += n + "The " + female + " waited for [the " + male + "] since [she] was running late.\n";
    }
  }
  write_text(dir / "pro_stereotyped_type1.txt.test", pro);
  write_text(dir / "anti_stereotyped_type1.txt.test", anti);
  return dir;
}

/// Winogender-format sentences plus occupation statistics: `n` occupations,
/// each with both answers and both gendered pronouns.
inline fs::path write_winogender(const fs::path& dir, int n = 8) {
  static const std::vector<std::string> occupations{"technician", "engineer",  "inspector", "paralegal",
                                                    "planner",    "therapist", "dietitian", "pathologist",
                                                    "chemist",    "surgeon",   "painter",   "firefighter"};
  static const std::vector<std::string> participants{"customer", "visitor", "client",  "patient",
                                                     "student",  "buyer",   "advisee", "owner"};
  std::string sentences = "sentid\tsentence\n";
  std::string stats = "occupation\tbergsma_pct_female\tbls_pct_female\tbls_year\n";
  for (int i = 0; i < n; ++i) {
    const auto& o = occupations[static_cast<std::size_t>(i) % occupations.size()];
    const auto& p = participants[static_cast<std::size_t>(i) % participants.size()];
    stats += o + "\t50\t" + std::to_string(i % 2 == 0 ? 20 : 80) + "\t2015\n";
    for (const char* answer : {"0", "1"}) {
      const std::string clause = std::string(answer) == "0" ? " had finished the paperwork." : " had brought the paperwork.";
      sentences += o + "." + p + "." + answer + ".male.txt\tThe " + o + " told the " + p + " that he" + clause + "\n";
      sentences += o + "." + p + "." + answer + ".female.txt\tThe " + o + " told the " + p + " that she" + clause + "\n";
    }
  }
  write_text(dir / "all_sentences.tsv", sentences);
  write_text(dir / "occupations-stats.tsv", stats);
  return dir / "all_sentences.tsv";
}

/// GAP-format rows alternating masculine and feminine pronouns; gold
/// alternates between A and B independently of the pronoun.
inline fs::path write_gap(const fs::path& path, int rows = 24) {
  static const std::vector<std::string> names{"Adam Price", "Beth Cole",  "Carl Dunn",   "Dana Frost", "Evan Gray",
                                              "Fay Hart",   "Glen Ivers", "Hana Jones",  "Ian Keller", "Jade Lowe",
                                              "Kurt Moss",  "Lena Noble", "Marc Ortiz",  "Nina Park",  "Omar Quinn",
                                              "Pia Reyes"};
  std::string out = "ID\tText\tPronoun\tPronoun-offset\tA\tA-offset\tA-coref\tB\tB-offset\tB-coref\tURL\n";
  for (int i = 0; i < rows; ++i) {
    const auto& a = names[static_cast<std::size_t>(2 * i) % names.size()];
    const auto& b = names[static_cast<std::size_t>(2 * i + 1) % names.size()];
    const std::string pronoun = i % 2 == 0 ? "he" : "she";
    const std::string text = a + " met " + b + " at the library, and later " + pronoun + " left for work.";
    const auto offset = text.find(" " + pronoun + " ") + 1;
    const bool gold_a = (i / 2) % 2 == 0;
    out += "test-" + std::to_string(i + 1) + "\t" + text + "\t" + pronoun + "\t" + std::to_string(offset) + "\t" + a +
           "\t0\t" + (gold_a ? "TRUE" : "FALSE") + "\t" + b + "\t" + std::to_string(text.find(b)) + "\t" +
           (gold_a ? "FALSE" : "TRUE") + "\thttp://example.org/" + std::to_string(i + 1) + "\n";
  }
  write_text(path, out);
  return path;
}

// Reasoning chain served by the scripted reference. Only the second
// refinement carries the marker the target stub reacts to.
inline const std::string kInitial = "Stage initial: the clause after the connective describes the first entity.";
inline const std::string kVerified = "Stage verified: the clause after the connective describes the first entity.";
inline const std::string kFiltered = "Stage filtered: the action, not the pronoun form, identifies the entity.";
inline const std::string kRefined1 = "Stage refined 1: resolve the pronoun by semantic role only.";
inline const std::string kRefined2 = "Stage refined 2: resolve the pronoun by semantic role only. [FAIR]";
inline const std::string kRefined3 = "Stage refined 3: resolve the pronoun by semantic role only.";

/// Substring rules answering the four stage prompts, most specific first.
inline json stage_rules() {
  const auto rule = [](const std::string& match, const std::string& reply) {
    return json{{"match", match}, {"reply", reply}, {"contains", true}};
  };
  return json::array({rule("dose the reasonning", kVerified), rule("remove the reference to gender", kFiltered),
                      rule("Stage refined 2", kRefined3), rule("Stage refined 1", kRefined2),
                      rule("gender-neutral reasoning process", kRefined1), rule("given correct answer", kInitial)});
}

/// Scripted reference: the gold answer for every query of `examples`, plus
/// the stage rules.
inline json scripted_reference(const std::vector<corpus::Example>& examples) {
  json script = stage_rules();
  for (const auto& ex : examples)
    if (ex.gold) script.push_back({{"match", corpus::render_query(ex)}, {"reply", *ex.gold}});
  return {{"kind", "scripted_stub"}, {"model_id", "scripted/reference"}, {"script", script}};
}

inline json marker_target() {
  return {{"kind", "rule_stub"},
          {"model_id", "rule_stub/marker-target"},
          {"policy", {{"name", "answer_stereotype_unless_marker"}, {"marker", "[FAIR]"}}}};
}

/// drgap config over a synthetic WinoBias directory.
inline json drgap_config(const fs::path& winobias_dir, const fs::path& out_dir, int rounds = 3) {
  const auto examples = corpus::load_dataset(corpus::DatasetId::winobias, winobias_dir);
  return {{"label", "drgap"},
          {"target", marker_target()},
          {"reference", scripted_reference(examples)},
          {"datasets", json::array({{{"id", "winobias"}, {"path", winobias_dir.string()}}})},
          {"prompt_mode", "drgap"},
          {"refinement_rounds", rounds},
          {"repetitions", 3},
          {"seed", 7},
          {"output_dir", out_dir.string()}};
}

}  // namespace fairprompt::testing
