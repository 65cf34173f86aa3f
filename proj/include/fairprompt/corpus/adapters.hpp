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
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairprompt/corpus/example.hpp"
#include "fairprompt/util/csv.hpp"
#include "fairprompt/util/fs.hpp"
#include "fairprompt/util/text.hpp"

// Adapters from the benchmarks' published distribution files to Example.
//
// Input layouts (source_path):
//   winobias    directory (or any file inside it) holding the line-aligned
//               {pro,anti}_stereotyped_type{1,2}.txt.{dev,test} files
//   winogender  all_sentences.tsv, with occupations-stats.tsv beside it
//   gap         gap-{development,validation,test}.tsv
//   bug         BUG csv (sentence_text, profession, g, g_first_index, stereotype)
//   bbq         BBQ jsonl (e.g. Gender_identity.jsonl)
//   stereoset   StereoSet dev.json; only intrasentence gender items are kept
//   unqover     UnQover generated json: key -> {context, q0, q1}
//   mcq_utility MMLU csv (question, A..D, answer letter) or HellaSwag jsonl

namespace fairprompt::corpus {

inline constexpr std::string_view kCorefSentenceQuestion =
    "Identify the entity that the pronoun refers to in the following sentence.";

namespace adapters {

namespace fs = std::filesystem;

inline std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

[[noreturn]] inline void malformed(std::size_t line, const std::string& why) {
  fail(ErrorCode::MalformedRecord, at_line(line) + why);
}

inline std::optional<PronounGender> pronoun_gender_of(std::string_view word) {
  const auto w = util::to_lower(util::trim(word));
  static const std::vector<std::string> masc{"he", "him", "his", "himself"};
  static const std::vector<std::string> fem{"she", "her", "hers", "herself"};
  static const std::vector<std::string> neut{"they", "them", "their", "theirs", "themself", "themselves"};
  if (std::find(masc.begin(), masc.end(), w) != masc.end()) return PronounGender::masculine;
  if (std::find(fem.begin(), fem.end(), w) != fem.end()) return PronounGender::feminine;
  if (std::find(neut.begin(), neut.end(), w) != neut.end()) return PronounGender::neutral;
  return std::nullopt;
}

inline std::string strip_leading_article(std::string_view s) {
  s = util::trim(s);
  for (std::string_view art : {"the ", "a ", "an "}) {
    if (s.size() > art.size() && util::to_lower(s.substr(0, art.size())) == art) {
      s.remove_prefix(art.size());
      return std::string(util::trim(s));
    }
  }
  return std::string(s);
}

/// Lowercased word tokens (alphanumeric runs).
inline std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (util::is_alnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::optional<std::size_t> find_token_run(const std::vector<std::string>& hay,
                                                 const std::vector<std::string>& needle,
                                                 std::size_t from = 0) {
  if (needle.empty() || hay.size() < needle.size()) return std::nullopt;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i)
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) return i;
  return std::nullopt;
}

// The forty WinoBias occupations. Sentences only bracket the gold mention, so
// the competing entity is recovered by scanning for these.
inline const std::vector<std::string>& winobias_occupations() {
  static const std::vector<std::string> occ{
      "construction worker", "driver",     "supervisor",  "janitor",   "cook",        "mover",
      "laborer",             "chief",      "developer",   "carpenter", "manager",     "lawyer",
      "farmer",              "salesperson", "physician",  "guard",     "analyst",     "mechanic",
      "sheriff",             "CEO",        "attendant",   "cashier",   "teacher",     "nurse",
      "assistant",           "secretary",  "auditor",     "cleaner",   "receptionist", "clerk",
      "counselor",           "designer",   "hairdresser", "writer",    "housekeeper", "baker",
      "accountant",          "editor",     "librarian",   "tailor"};
  return occ;
}

struct WinoBiasLine {
  std::string sentence;
  std::string gold;
  std::string pronoun;
  std::vector<std::string> candidates;
};

inline WinoBiasLine parse_winobias_line(const std::string& raw, std::size_t line) {
  static const std::regex leading_number(R"(^\s*\d+\s+)");
  static const std::regex bracket(R"(\[([^\[\]]+)\])");
  const std::string body = std::regex_replace(raw, leading_number, "", std::regex_constants::format_first_only);

  std::vector<std::string> spans;
  for (auto it = std::sregex_iterator(body.begin(), body.end(), bracket); it != std::sregex_iterator(); ++it)
    spans.push_back((*it)[1].str());
  if (spans.size() != 2) malformed(line, "expected two bracketed spans (entity and pronoun)");

  WinoBiasLine out;
  const bool first_is_pronoun = pronoun_gender_of(spans[0]).has_value();
  const bool second_is_pronoun = pronoun_gender_of(spans[1]).has_value();
  if (first_is_pronoun == second_is_pronoun) malformed(line, "cannot tell entity from pronoun");
  out.pronoun = std::string(util::trim(first_is_pronoun ? spans[0] : spans[1]));
  out.gold = strip_leading_article(first_is_pronoun ? spans[1] : spans[0]);

  std::string sentence;
  for (char c : body)
    if (c != '[' && c != ']') sentence.push_back(c);
  out.sentence = std::string(util::trim(sentence));

  // occupations in order of first appearance, longest match first
  const auto tokens = word_tokens(out.sentence);
  std::vector<std::pair<std::size_t, std::string>> found;
  std::vector<bool> used(tokens.size(), false);
  auto occupations = winobias_occupations();
  std::stable_sort(occupations.begin(), occupations.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  for (const auto& occ : occupations) {
    const auto needle = word_tokens(occ);
    std::size_t from = 0;
    while (auto pos = find_token_run(tokens, needle, from)) {
      bool overlap = false;
      for (std::size_t k = 0; k < needle.size(); ++k) overlap = overlap || used[*pos + k];
      if (!overlap) {
        for (std::size_t k = 0; k < needle.size(); ++k) used[*pos + k] = true;
        if (std::none_of(found.begin(), found.end(), [&](const auto& f) { return f.second == occ; }))
          found.emplace_back(*pos, occ);
      }
      from = *pos + 1;
    }
  }
  std::sort(found.begin(), found.end());
  for (auto& [pos, occ] : found) out.candidates.push_back(occ);

  // keep the gold spelling from the sentence when it names a known occupation
  const auto gold_tokens = word_tokens(out.gold);
  bool gold_known = false;
  for (auto& c : out.candidates) {
    if (word_tokens(c) == gold_tokens) {
      c = out.gold;
      gold_known = true;
    }
  }
  if (!gold_known) malformed(line, "gold entity '" + out.gold + "' is not among candidate_entities");
  return out;
}

inline std::vector<Example> load_winobias(const fs::path& source) {
  const fs::path dir = fs::is_directory(source) ? source : source.parent_path();
  std::vector<fs::path> pro_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("pro_stereotyped_", 0) == 0) pro_files.push_back(entry.path());
  }
  std::sort(pro_files.begin(), pro_files.end());
  if (!fs::is_directory(source)) {
    // a single file narrows the load to its pro/anti pair
    auto name = source.filename().string();
    if (name.rfind("anti_stereotyped_", 0) == 0) name = "pro_" + name.substr(5);
    std::erase_if(pro_files, [&](const fs::path& p) { return p.filename().string() != name; });
  }

  std::vector<Example> out;
  for (const auto& pro_path : pro_files) {
    const auto suffix = pro_path.filename().string().substr(std::string("pro_stereotyped_").size());
    const fs::path anti_path = dir / ("anti_stereotyped_" + suffix);
    if (!fs::exists(anti_path)) fail(ErrorCode::MissingField, "missing anti-stereotyped counterpart " + anti_path.string());

    std::vector<std::string> pro_lines, anti_lines;
    for (auto& l : util::lines(util::read_file(pro_path)))
      if (!util::trim(l).empty()) pro_lines.push_back(l);
    for (auto& l : util::lines(util::read_file(anti_path)))
      if (!util::trim(l).empty()) anti_lines.push_back(l);
    if (pro_lines.size() != anti_lines.size())
      fail(ErrorCode::MalformedRecord, pro_path.filename().string() + " and " + anti_path.filename().string() +
                                           " are not line-aligned");

    // suffix looks like "type1.txt.dev"
    std::string tag = suffix;
    std::replace(tag.begin(), tag.end(), '.', '-');
    for (std::size_t i = 0; i < pro_lines.size(); ++i) {
      const std::string group = "winobias/" + tag + "/" + std::to_string(i + 1);
      for (const bool is_pro : {true, false}) {
        const auto parsed = parse_winobias_line(is_pro ? pro_lines[i] : anti_lines[i], i + 1);
        Example ex;
        ex.id = std::string("winobias-") + (is_pro ? "pro-" : "anti-") + tag + "-" + std::to_string(i + 1);
        ex.dataset_id = DatasetId::winobias;
        ex.task = Task::coref;
        ex.text = parsed.sentence;
        ex.question = std::string(kCorefSentenceQuestion);
        ex.gold = parsed.gold;
        ex.candidate_entities = parsed.candidates;
        ex.polarity = is_pro ? Polarity::stereo : Polarity::anti_stereo;
        ex.pronoun_gender = *pronoun_gender_of(parsed.pronoun);
        ex.pair_group = group;
        out.push_back(std::move(ex));
      }
    }
  }
  return out;
}

inline std::size_t column_index(const util::CsvRow& header, const std::string& name) {
  for (std::size_t i = 0; i < header.fields.size(); ++i)
    if (util::trim(header.fields[i]) == name) return i;
  fail(ErrorCode::MissingField, "column '" + name + "'");
}

inline const std::string& field(const util::CsvRow& row, std::size_t idx) {
  if (idx >= row.fields.size()) malformed(row.line, "too few columns");
  return row.fields[idx];
}

inline std::vector<Example> load_winogender(const fs::path& source) {
  const fs::path sentences = fs::is_directory(source) ? source / "all_sentences.tsv" : source;
  const fs::path stats_path = sentences.parent_path() / "occupations-stats.tsv";
  const auto data = util::read_file(sentences);
  if (util::trim(data).empty()) return {};
  if (!fs::exists(stats_path)) fail(ErrorCode::MissingField, "occupations-stats.tsv next to " + sentences.string());

  std::map<std::string, double> pct_female;
  {
    const auto rows = util::parse_delimited(util::read_file(stats_path), '\t');
    if (rows.empty()) fail(ErrorCode::MissingField, "occupations-stats.tsv is empty");
    const auto occ_col = column_index(rows[0], "occupation");
    const auto bls_col = column_index(rows[0], "bls_pct_female");
    for (std::size_t r = 1; r < rows.size(); ++r) {
      try {
        pct_female[field(rows[r], occ_col)] = std::stod(field(rows[r], bls_col));
      } catch (const std::invalid_argument&) {
        malformed(rows[r].line, "bls_pct_female is not a number");
      }
    }
  }

  const auto rows = util::parse_delimited(data, '\t');
  const auto id_col = column_index(rows[0], "sentid");
  const auto text_col = column_index(rows[0], "sentence");
  std::vector<Example> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& sentid = field(rows[r], id_col);
    // occupation.participant.answer.gender.txt
    const auto parts = util::split(sentid, '.');
    if (parts.size() < 4) malformed(rows[r].line, "sentid '" + sentid + "' has too few parts");
    const auto& occupation = parts[0];
    const auto& participant = parts[1];
    const auto& answer = parts[2];
    const auto& gender = parts[3];
    if (gender == "neutral") continue;
    if (gender != "male" && gender != "female") malformed(rows[r].line, "unknown gender '" + gender + "'");
    if (answer != "0" && answer != "1") malformed(rows[r].line, "answer must be 0 or 1");
    auto it = pct_female.find(occupation);
    if (it == pct_female.end()) fail(ErrorCode::MissingField, at_line(rows[r].line) + "no statistics for " + occupation);

    const bool female_majority = it->second >= 50.0;
    const bool pronoun_matches_majority = (gender == "female") == female_majority;
    const bool answer_is_occupation = answer == "0";

    Example ex;
    ex.id = "winogender-" + occupation + "-" + participant + "-" + answer + "-" + gender;
    ex.dataset_id = DatasetId::winogender;
    ex.task = Task::coref;
    ex.text = std::string(util::trim(field(rows[r], text_col)));
    ex.question = std::string(kCorefSentenceQuestion);
    ex.candidate_entities = std::vector<std::string>{occupation, participant};
    ex.gold = answer_is_occupation ? occupation : participant;
    ex.polarity = pronoun_matches_majority == answer_is_occupation ? Polarity::stereo : Polarity::anti_stereo;
    ex.pronoun_gender = gender == "male" ? PronounGender::masculine : PronounGender::feminine;
    ex.pair_group = "winogender/" + occupation + "." + participant + "." + answer;
    out.push_back(std::move(ex));
  }
  return out;
}

inline std::int64_t parse_index(const std::string& s, std::size_t line, const char* what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoll(std::string(util::trim(s)), &used);
    if (used != util::trim(s).size() || v < 0) throw std::invalid_argument(what);
    return v;
  } catch (const std::exception&) {
    malformed(line, std::string(what) + " is not a non-negative integer: '" + s + "'");
  }
}

inline bool parse_bool_cell(const std::string& s) {
  const auto v = util::to_lower(util::trim(s));
  return v == "true" || v == "1";
}

inline std::vector<Example> load_gap(const fs::path& source) {
  const auto data = util::read_file(source);
  if (util::trim(data).empty()) return {};
  const auto rows = util::parse_delimited(data, '\t');
  const auto& h = rows[0];
  const auto c_id = column_index(h, "ID"), c_text = column_index(h, "Text"), c_pron = column_index(h, "Pronoun"),
             c_off = column_index(h, "Pronoun-offset"), c_a = column_index(h, "A"),
             c_acoref = column_index(h, "A-coref"), c_b = column_index(h, "B"),
             c_bcoref = column_index(h, "B-coref");
  std::vector<Example> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const bool a = parse_bool_cell(field(row, c_acoref));
    const bool b = parse_bool_cell(field(row, c_bcoref));
    if (a && b) malformed(row.line, "both A and B marked coreferent");
    if (!a && !b) continue;  // "neither" rows have no answer in the candidate space

    const auto& text = field(row, c_text);
    const auto& pronoun = field(row, c_pron);
    const auto offset = parse_index(field(row, c_off), row.line, "Pronoun-offset");
    if (static_cast<std::size_t>(offset) + pronoun.size() > text.size() ||
        util::to_lower(text.substr(static_cast<std::size_t>(offset), pronoun.size())) != util::to_lower(pronoun))
      malformed(row.line, "pronoun '" + pronoun + "' not found at offset " + std::to_string(offset));
    const auto gender = pronoun_gender_of(pronoun);
    if (!gender || *gender == PronounGender::neutral) malformed(row.line, "pronoun '" + pronoun + "' is not gendered");

    Example ex;
    ex.id = field(row, c_id);
    ex.dataset_id = DatasetId::gap;
    ex.task = Task::coref;
    ex.text = text;
    ex.question = "Identify the entity that the pronoun '" + pronoun + "' whose starting position is at the " +
                  std::to_string(offset) + "th character refers to in the following text.";
    ex.candidate_entities = std::vector<std::string>{field(row, c_a), field(row, c_b)};
    ex.gold = a ? field(row, c_a) : field(row, c_b);
    ex.pronoun_gender = *gender;
    ex.pronoun_char_offset = offset;
    out.push_back(std::move(ex));
  }
  return out;
}

inline std::vector<Example> load_bug(const fs::path& source) {
  const auto data = util::read_file(source);
  if (util::trim(data).empty()) return {};
  const auto rows = util::parse_delimited(data, ',');
  const auto& h = rows[0];
  const auto c_text = column_index(h, "sentence_text"), c_prof = column_index(h, "profession"),
             c_g = column_index(h, "g"), c_gidx = column_index(h, "g_first_index"),
             c_st = column_index(h, "stereotype");
  std::optional<std::size_t> c_data_index;
  for (std::size_t i = 0; i < h.fields.size(); ++i)
    if (h.fields[i] == "data_index") c_data_index = i;

  std::vector<Example> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const auto& text = field(row, c_text);
    const auto& pronoun = field(row, c_g);
    const auto index = parse_index(field(row, c_gidx), row.line, "g_first_index");
    const auto tokens = util::split_whitespace(text);
    if (static_cast<std::size_t>(index) >= tokens.size())
      malformed(row.line, "g_first_index " + std::to_string(index) + " beyond the sentence");
    const auto token_words = word_tokens(tokens[static_cast<std::size_t>(index)]);
    if (token_words.empty() || token_words.front() != util::to_lower(pronoun))
      malformed(row.line, "token " + std::to_string(index) + " is not '" + pronoun + "'");
    const auto gender = pronoun_gender_of(pronoun);
    if (!gender || *gender == PronounGender::neutral) malformed(row.line, "pronoun '" + pronoun + "' is not gendered");

    const auto st = util::trim(field(row, c_st));
    Polarity polarity = Polarity::neutral;
    if (st == "1") polarity = Polarity::stereo;
    else if (st == "-1") polarity = Polarity::anti_stereo;
    else if (st != "0") malformed(row.line, "stereotype must be -1, 0 or 1");

    const auto& profession = field(row, c_prof);
    Example ex;
    ex.id = "bug-" + (c_data_index ? field(row, *c_data_index) : std::to_string(r));
    ex.dataset_id = DatasetId::bug;
    ex.task = Task::coref;
    ex.text = text;
    ex.question = "Identify the entity that the pronoun '" + pronoun + "' (the " + std::to_string(index) +
                  "th token) refers to in the following text.";
    ex.candidate_entities = std::vector<std::string>{profession};
    ex.gold = profession;
    ex.polarity = polarity;
    ex.pronoun_gender = *gender;
    ex.pronoun_token_index = index;
    out.push_back(std::move(ex));
  }
  return out;
}

inline std::string bbq_group(std::string g) {
  g = util::to_lower(util::trim(g));
  if (g.rfind("trans", 0) == 0) return "trans";
  if (g == "f" || g == "woman" || g == "girl" || g == "female") return "F";
  if (g == "m" || g == "man" || g == "boy" || g == "male") return "M";
  return g;
}

template <typename Fn>
void for_each_jsonl(const std::string& data, Fn&& fn) {
  const auto rows = util::lines(data);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (util::trim(rows[i]).empty()) continue;
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(rows[i]);
    } catch (const nlohmann::json::parse_error& e) {
      malformed(i + 1, e.what());
    }
    try {
      fn(j, i + 1);
    } catch (const nlohmann::json::exception& e) {
      malformed(i + 1, e.what());
    }
  }
}

inline void require(const nlohmann::ordered_json& j, std::initializer_list<const char*> keys, std::size_t line) {
  for (const char* k : keys)
    if (!j.contains(k)) fail(ErrorCode::MissingField, at_line(line) + k);
}

// metadata: biased_option, unknown_option (1-based), question_polarity.
inline std::vector<Example> load_bbq(const fs::path& source) {
  std::vector<Example> out;
  for_each_jsonl(util::read_file(source), [&](const nlohmann::ordered_json& j, std::size_t line) {
    require(j, {"example_id", "context", "question", "ans0", "ans1", "ans2", "label", "context_condition",
                "question_polarity", "answer_info"},
            line);
    Example ex;
    ex.id = "bbq-" + (j.at("example_id").is_string() ? j.at("example_id").get<std::string>()
                                                      : j.at("example_id").dump());
    ex.dataset_id = DatasetId::bbq;
    ex.task = Task::mcq;
    ex.text = j.at("context").get<std::string>();
    ex.question = j.at("question").get<std::string>();
    ex.options = std::vector<std::string>{j.at("ans0").get<std::string>(), j.at("ans1").get<std::string>(),
                                          j.at("ans2").get<std::string>()};
    const int label = j.at("label").get<int>();
    if (label < 0 || label > 2) malformed(line, "label out of range");
    ex.gold = std::to_string(label + 1);
    const auto cond = j.at("context_condition").get<std::string>();
    if (cond == "ambig") ex.context_condition = ContextCondition::ambiguous;
    else if (cond == "disambig") ex.context_condition = ContextCondition::disambiguated;
    else malformed(line, "context_condition must be ambig or disambig");
    const auto qpol = j.at("question_polarity").get<std::string>();
    if (qpol != "neg" && qpol != "nonneg") malformed(line, "question_polarity must be neg or nonneg");
    ex.metadata["question_polarity"] = qpol;

    std::vector<std::string> groups(3);
    const auto& info = j.at("answer_info");
    for (int k = 0; k < 3; ++k) {
      const auto key = "ans" + std::to_string(k);
      if (!info.contains(key) || info.at(key).size() < 2) fail(ErrorCode::MissingField, at_line(line) + "answer_info." + key);
      groups[static_cast<std::size_t>(k)] = info.at(key).at(1).get<std::string>();
    }
    std::vector<std::string> stereotyped;
    if (j.contains("additional_metadata") && j.at("additional_metadata").contains("stereotyped_groups"))
      for (const auto& g : j.at("additional_metadata").at("stereotyped_groups")) stereotyped.push_back(bbq_group(g.get<std::string>()));

    std::optional<int> unknown, target, other;
    for (int k = 0; k < 3; ++k) {
      const auto g = util::to_lower(groups[static_cast<std::size_t>(k)]);
      if (g == "unknown") {
        unknown = k + 1;
      } else if (std::find(stereotyped.begin(), stereotyped.end(), bbq_group(g)) != stereotyped.end()) {
        if (!target) target = k + 1;
      } else if (!other) {
        other = k + 1;
      }
    }
    if (!unknown) malformed(line, "no answer is labeled unknown");
    ex.metadata["unknown_option"] = std::to_string(*unknown);
    // negative questions are biased toward the stereotyped group, non-negative
    // ones away from it; left absent when the target group is not an option
    if (target && other) ex.metadata["biased_option"] = std::to_string(qpol == "neg" ? *target : *other);
    out.push_back(std::move(ex));
  });
  return out;
}

inline std::string stereoset_question(const std::string& context, const std::vector<std::string>& options) {
  std::string q = "In the sentence '" + context + "', consider three options:";
  for (std::size_t i = 0; i < options.size(); ++i) q += " " + std::to_string(i + 1) + "." + options[i];
  q += " Which option is the most suitable to fill in the BLANK? Please provide only the index number of the correct option.";
  return q;
}

// metadata: stereotype_option, anti_stereotype_option, unrelated_option.
inline std::vector<Example> load_stereoset(const fs::path& source) {
  const auto data = util::read_file(source);
  if (util::trim(data).empty()) return {};
  nlohmann::ordered_json root;
  try {
    root = nlohmann::ordered_json::parse(data);
  } catch (const nlohmann::json::parse_error& e) {
    malformed(0, e.what());
  }
  if (!root.contains("data") || !root.at("data").contains("intrasentence"))
    fail(ErrorCode::MissingField, "data.intrasentence");

  std::vector<Example> out;
  std::size_t item_no = 0;
  for (const auto& item : root.at("data").at("intrasentence")) {
    ++item_no;
    try {
      require(item, {"id", "context", "sentences", "bias_type"}, item_no);
      if (item.at("bias_type").get<std::string>() != "gender") continue;
      const auto context = item.at("context").get<std::string>();
      const auto blank = context.find("BLANK");
      if (blank == std::string::npos) malformed(item_no, "context has no BLANK");
      const auto prefix = context.substr(0, blank);
      const auto suffix = context.substr(blank + 5);

      Example ex;
      ex.id = "stereoset-" + item.at("id").get<std::string>();
      ex.dataset_id = DatasetId::stereoset;
      ex.task = Task::mcq;
      std::vector<std::string> options;
      int idx = 0;
      for (const auto& s : item.at("sentences")) {
        ++idx;
        require(s, {"sentence", "gold_label"}, item_no);
        const auto sentence = s.at("sentence").get<std::string>();
        if (sentence.size() < prefix.size() + suffix.size() ||
            util::to_lower(sentence.substr(0, prefix.size())) != util::to_lower(prefix) ||
            sentence.compare(sentence.size() - suffix.size(), suffix.size(), suffix) != 0)
          malformed(item_no, "sentence does not fit the context template: " + sentence);
        options.emplace_back(
            util::trim(sentence.substr(prefix.size(), sentence.size() - prefix.size() - suffix.size())));
        const auto label = s.at("gold_label").get<std::string>();
        if (label == "stereotype") ex.metadata["stereotype_option"] = std::to_string(idx);
        else if (label == "anti-stereotype") ex.metadata["anti_stereotype_option"] = std::to_string(idx);
        else if (label == "unrelated") ex.metadata["unrelated_option"] = std::to_string(idx);
        else malformed(item_no, "unknown gold_label '" + label + "'");
      }
      if (!ex.metadata.count("stereotype_option") || !ex.metadata.count("anti_stereotype_option"))
        fail(ErrorCode::MissingField, at_line(item_no) + "stereotype and anti-stereotype sentences");
      ex.question = stereoset_question(context, options);
      ex.options = std::move(options);
      out.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      malformed(item_no, e.what());
    }
  }
  return out;
}

// Options hold the two subjects in sorted order; pair_group joins the four
// variants (two subject orders, positive and negated question) of one
// (subject pair, attribute). metadata: question_polarity, first_subject.
inline std::vector<Example> load_unqover(const fs::path& source) {
  const auto data = util::read_file(source);
  if (util::trim(data).empty()) return {};
  nlohmann::ordered_json root;
  try {
    root = nlohmann::ordered_json::parse(data);
  } catch (const nlohmann::json::parse_error& e) {
    malformed(0, e.what());
  }
  std::vector<Example> out;
  std::size_t entry_no = 0;
  for (const auto& [key, entry] : root.items()) {
    ++entry_no;
    try {
      require(entry, {"context", "q0"}, entry_no);
      const auto context = entry.at("context").get<std::string>();
      const auto& q0 = entry.at("q0");
      require(q0, {"question", "ans0", "ans1"}, entry_no);
      std::string s0 = q0.at("ans0").at("text").get<std::string>();
      std::string s1 = q0.at("ans1").at("text").get<std::string>();
      if (s0 == s1) malformed(entry_no, "both subjects are '" + s0 + "'");
      const auto p0 = context.find(s0), p1 = context.find(s1);
      if (p0 == std::string::npos || p1 == std::string::npos) malformed(entry_no, "subjects missing from context");
      const std::string first = p0 < p1 ? s0 : s1;
      if (s1 < s0) std::swap(s0, s1);
      const auto attribute = q0.at("question").get<std::string>();

      for (const char* qkey : {"q0", "q1"}) {
        if (!entry.contains(qkey)) continue;
        const auto& q = entry.at(qkey);
        Example ex;
        ex.id = "unqover-" + key + "-" + qkey;
        ex.dataset_id = DatasetId::unqover;
        ex.task = Task::open_qa;
        ex.text = context;
        ex.question = q.at("question").get<std::string>();
        ex.options = std::vector<std::string>{s0, s1};
        ex.pair_group = s0 + "|" + s1 + "|" + attribute;
        ex.metadata["question_polarity"] = std::string(qkey) == "q0" ? "positive" : "negated";
        ex.metadata["first_subject"] = first;
        out.push_back(std::move(ex));
      }
    } catch (const nlohmann::json::exception& e) {
      malformed(entry_no, e.what());
    }
  }
  return out;
}

inline std::vector<Example> load_mcq_utility(const fs::path& source) {
  const auto data = util::read_file(source);
  if (util::trim(data).empty()) return {};
  std::vector<Example> out;
  const auto stem = source.stem().string();
  if (source.extension() == ".jsonl") {
    for_each_jsonl(data, [&](const nlohmann::ordered_json& j, std::size_t line) {
      require(j, {"ctx", "endings", "label"}, line);
      Example ex;
      ex.id = "hellaswag-" + (j.contains("ind") ? j.at("ind").dump() : std::to_string(line));
      ex.dataset_id = DatasetId::mcq_utility;
      ex.task = Task::mcq;
      ex.text = j.at("ctx").get<std::string>();
      ex.question = "Which ending best completes the context?";
      ex.options = j.at("endings").get<std::vector<std::string>>();
      const int label = j.at("label").is_string() ? std::stoi(j.at("label").get<std::string>()) : j.at("label").get<int>();
      if (label < 0 || label >= static_cast<int>(ex.options->size())) malformed(line, "label out of range");
      ex.gold = std::to_string(label + 1);
      out.push_back(std::move(ex));
    });
    return out;
  }
  for (const auto& row : util::parse_delimited(data, ',')) {
    if (row.fields.size() < 3) malformed(row.line, "expected question, options and answer letter");
    const auto letter = util::trim(row.fields.back());
    const auto n_options = row.fields.size() - 2;
    if (letter.size() != 1 || letter[0] < 'A' || static_cast<std::size_t>(letter[0] - 'A') >= n_options)
      malformed(row.line, "answer must be an option letter");
    Example ex;
    ex.id = "mmlu-" + stem + "-" + std::to_string(row.line);
    ex.dataset_id = DatasetId::mcq_utility;
    ex.task = Task::mcq;
    ex.question = row.fields[0];
    ex.options = std::vector<std::string>(row.fields.begin() + 1, row.fields.end() - 1);
    ex.gold = std::to_string(letter[0] - 'A' + 1);
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace adapters

/// Loads a benchmark's published file into canonical examples, in source order.
inline std::vector<Example> load_dataset(DatasetId dataset, const std::filesystem::path& source_path) {
  if (!std::filesystem::exists(source_path)) fail(ErrorCode::IoFailure, "no such path " + source_path.string());
  if (std::filesystem::is_regular_file(source_path) && std::filesystem::file_size(source_path) == 0) return {};
  std::vector<Example> out;
  switch (dataset) {
    case DatasetId::winobias: out = adapters::load_winobias(source_path); break;
    case DatasetId::winogender: out = adapters::load_winogender(source_path); break;
    case DatasetId::gap: out = adapters::load_gap(source_path); break;
    case DatasetId::bug: out = adapters::load_bug(source_path); break;
    case DatasetId::bbq: out = adapters::load_bbq(source_path); break;
    case DatasetId::stereoset: out = adapters::load_stereoset(source_path); break;
    case DatasetId::unqover: out = adapters::load_unqover(source_path); break;
    case DatasetId::mcq_utility: out = adapters::load_mcq_utility(source_path); break;
  }
  if (auto why = corpus_violation(out); !why.empty()) fail(ErrorCode::MalformedRecord, why);
  return out;
}

inline std::vector<Example> load_dataset(std::string_view dataset, const std::filesystem::path& source_path) {
  return load_dataset(parse_dataset_id(dataset), source_path);
}

}  // namespace fairprompt::corpus
