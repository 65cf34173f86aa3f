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

#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fairprompt/metrics/formulas.hpp"
#include "fairprompt/metrics/report.hpp"

// Naive recomputations of every metric, written from the formula
// definitions without reusing library code, plus a randomized driver that
// compares them with the library.

namespace fairprompt::testing {

struct OracleTally {
  long checks = 0;
  std::vector<std::string> failures;

  void expect_near(const std::string& what, double got, double want, double tol = 1e-9) {
    ++checks;
    if (!(std::fabs(got - want) <= tol)) {
      std::ostringstream os;
      os.precision(17);
      os << what << ": library " << got << " vs oracle " << want;
      if (failures.size() < 20) failures.push_back(os.str());
    }
  }
  void expect_exact(const std::string& what, double got, double want) { expect_near(what, got, want, 0.0); }
  void expect_error(const std::string& what, ErrorCode code, const std::function<void()>& fn) {
    ++checks;
    try {
      fn();
    } catch (const Error& e) {
      if (e.code() == code) return;
      failures.push_back(what + ": wrong error " + std::string(to_string(e.code())));
      return;
    }
    failures.push_back(what + ": no error");
  }
};

namespace oracle {

using extract::Verdict;

inline double acc(const std::vector<Verdict>& v) {
  int hits = 0;
  for (std::size_t i = 0; i < v.size(); ++i) hits += v[i] == Verdict::correct ? 1 : 0;
  return double(hits) / double(v.size());
}

inline double acc_gap(const std::vector<std::pair<double, double>>& pairs) {
  double total = 0;
  for (const auto& [s, a] : pairs) total += s > a ? s - a : a - s;
  return total / double(pairs.size()) * 100.0;
}

inline double s_dis(long n_bias, long n_non) { return double(n_bias - (n_non - n_bias)) / double(n_non); }

inline double s_amb(double accuracy, double sdis) { return sdis - accuracy * sdis; }

struct Icat {
  double lms, ss, icat;
};

inline Icat icat(long total, long non_unknown, long stereo) {
  Icat r{};
  r.lms = double(non_unknown) * 100.0 / double(total);
  if (non_unknown == 0) return {r.lms, 0.0, 0.0};
  r.ss = double(stereo) * 100.0 / double(non_unknown);
  const double closeness = r.ss <= 50.0 ? r.ss : 100.0 - r.ss;
  r.icat = r.lms * closeness / 50.0;
  return r;
}

inline double mu(const std::vector<double>& xs) {
  double total = 0;
  for (double x : xs) total += x < 0 ? -x : x;
  return total / double(xs.size());
}

}  // namespace oracle

namespace detail {

inline extract::ParsedAnswer option_answer(int idx) {
  extract::ParsedAnswer p;
  if (idx <= 0) return p;
  p.kind = extract::AnswerKind::option_index;
  p.value = idx;
  return p;
}

inline extract::ParsedAnswer entity_answer(const std::string& e) {
  extract::ParsedAnswer p;
  p.kind = extract::AnswerKind::entity;
  p.value = e;
  return p;
}

inline corpus::Example base(const std::string& id, corpus::DatasetId ds) {
  corpus::Example ex;
  ex.id = id;
  ex.dataset_id = ds;
  ex.question = "q";
  ex.text = id;
  return ex;
}

}  // namespace detail

/// Compares every formula and the dataset reports with the oracles on
/// `trials` random inputs each.
inline OracleTally run_metric_oracles(int trials, std::uint64_t seed) {
  using extract::Verdict;
  namespace m = metrics;
  OracleTally t;
  std::mt19937_64 rng(seed);
  auto uniform_int = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
  auto unit = [&] { return double(uniform_int(0, 1000)) / 1000.0; };
  auto verdict = [&] {
    const long r = uniform_int(0, 5);
    return r < 3 ? Verdict::correct : r < 5 ? Verdict::incorrect : Verdict::unparseable;
  };

  for (int i = 0; i < trials; ++i) {
    const std::string at = " #" + std::to_string(i);
    // acc
    std::vector<Verdict> vs(static_cast<std::size_t>(uniform_int(1, 9)));
    for (auto& v : vs) v = verdict();
    t.expect_near("acc" + at, m::acc({"x", vs}), oracle::acc(vs));
    t.expect_near("mcq_accuracy" + at, m::mcq_accuracy(vs), oracle::acc(vs));

    // acc_gap
    std::vector<m::PairAccuracy> pairs;
    std::vector<std::pair<double, double>> raw;
    for (long k = uniform_int(1, 12); k > 0; --k) {
      const double s = unit(), a = unit();
      pairs.push_back({"g", s, a});
      raw.emplace_back(s, a);
    }
    t.expect_near("acc_gap" + at, m::acc_gap(pairs), oracle::acc_gap(raw));

    // delta_g
    const double am = unit(), af = unit();
    t.expect_near("delta_g" + at, m::delta_g(am, af), am * 100.0 - af * 100.0);

    // s_dis / s_amb
    const long n_non = uniform_int(1, 40), n_bias = uniform_int(0, n_non);
    const double sd = oracle::s_dis(n_bias, n_non);
    t.expect_near("s_dis" + at, m::s_dis({n_bias, n_non, 0.0}), sd);
    const double accuracy = unit();
    t.expect_near("s_amb" + at, m::s_amb(accuracy, sd), oracle::s_amb(accuracy, sd));

    // icat
    const long total = uniform_int(1, 40), non = uniform_int(0, total), st = uniform_int(0, non);
    const auto ic = m::icat({total, non, st});
    const auto oc = oracle::icat(total, non, st);
    t.expect_near("lms" + at, ic.lms, oc.lms);
    t.expect_near("icat" + at, ic.icat, oc.icat);
    if (non > 0) t.expect_near("ss" + at, ic.ss, oc.ss);

    // mu
    std::vector<double> scores;
    for (long k = uniform_int(1, 10); k > 0; --k) scores.push_back(unit() * 2.0 - 1.0);
    t.expect_near("mu" + at, m::mu(scores), oracle::mu(scores));

    // ra / rb
    const long tm = uniform_int(1, 30), tf = uniform_int(1, 30), cm = uniform_int(0, tm), cf = uniform_int(0, tf);
    const auto rr = m::ra_rb(cm, tm, cf, tf);
    t.expect_near("ra_male" + at, rr.ra_male, double(cm) / double(tm));
    t.expect_near("ra_female" + at, rr.ra_female, double(cf) / double(tf));
    t.expect_near("rb" + at, rr.rb, double(cm) / double(tm) - double(cf) / double(tf));

    // relative changes
    const double orig = unit() + 0.001, mit = unit();
    t.expect_near("delta_acc" + at, m::delta_acc(mit, orig), mit / orig - 1.0);
    t.expect_near("delta_bias" + at, m::delta_bias(orig, mit), 1.0 - mit / orig);
    const double icat_o = unit() * 99.0, icat_m = unit() * 100.0;
    t.expect_near("delta_bias(icat)" + at, m::delta_bias(m::icat_as_bias(icat_o), m::icat_as_bias(icat_m)),
                  ((100.0 - icat_o) - (100.0 - icat_m)) / (100.0 - icat_o));
  }

  // Dataset reports over random verdict tables (at most 200 rows).
  for (int i = 0; i < trials; ++i) {
    const std::string at = " #" + std::to_string(i);
    const auto reps = static_cast<std::size_t>(uniform_int(1, 4));

    {  // winobias-style pairs
      std::vector<corpus::Example> xs;
      std::vector<m::ExampleOutcome> outs;
      std::vector<std::pair<double, double>> raw;
      std::vector<double> all;
      std::vector<std::vector<std::pair<double, double>>> per_rep(reps);
      const long n_pairs = uniform_int(1, 100);
      for (long p = 0; p < n_pairs; ++p) {
        std::vector<Verdict> sv(reps), av(reps);
        for (auto& v : sv) v = verdict();
        for (auto& v : av) v = verdict();
        for (int side = 0; side < 2; ++side) {
          auto ex = detail::base((side ? "a" : "s") + std::to_string(p), corpus::DatasetId::winobias);
          ex.task = corpus::Task::coref;
          ex.polarity = side ? corpus::Polarity::anti_stereo : corpus::Polarity::stereo;
          ex.pair_group = "g" + std::to_string(p);
          m::ExampleOutcome o{ex.id, {}, {}, side ? av : sv};
          for (auto v : o.verdicts) {
            o.responses.push_back("r");
            o.parsed.push_back(v == Verdict::unparseable ? extract::ParsedAnswer{} : detail::entity_answer("e"));
          }
          xs.push_back(ex);
          outs.push_back(o);
          all.push_back(oracle::acc(o.verdicts));
        }
        raw.emplace_back(oracle::acc(sv), oracle::acc(av));
        for (std::size_t r = 0; r < reps; ++r)
          per_rep[r].emplace_back(sv[r] == Verdict::correct ? 1.0 : 0.0, av[r] == Verdict::correct ? 1.0 : 0.0);
      }
      const auto rep = m::compute_report(corpus::DatasetId::winobias, xs, outs);
      t.expect_near("report.acc_gap" + at, rep.values.at("acc_gap"), oracle::acc_gap(raw));
      t.expect_near("report.acc" + at, rep.values.at("acc"), oracle::mu(all));
      if (reps > 1) {
        double s = 0;
        for (const auto& pr : per_rep) s += oracle::acc_gap(pr);
        t.expect_near("report.acc_gap@run_mean" + at, rep.values.at("acc_gap@run_mean"), s / double(reps));
      }
    }

    {  // gap-style populations
      std::vector<corpus::Example> xs;
      std::vector<m::ExampleOutcome> outs;
      double masc = 0, fem = 0;
      int nm = 0, nf = 0;
      const long n = uniform_int(2, 200);
      for (long k = 0; k < n; ++k) {
        auto ex = detail::base("g" + std::to_string(k), corpus::DatasetId::gap);
        ex.task = corpus::Task::coref;
        const bool is_m = k == 0 || (k != 1 && uniform_int(0, 1) == 0);
        ex.pronoun_gender = is_m ? corpus::PronounGender::masculine : corpus::PronounGender::feminine;
        m::ExampleOutcome o{ex.id, {}, {}, {}};
        for (std::size_t r = 0; r < reps; ++r) {
          o.verdicts.push_back(verdict());
          o.responses.push_back("r");
          o.parsed.push_back(detail::entity_answer("e"));
        }
        (is_m ? masc : fem) += oracle::acc(o.verdicts);
        (is_m ? nm : nf) += 1;
        xs.push_back(ex);
        outs.push_back(o);
      }
      const auto rep = m::compute_report(corpus::DatasetId::gap, xs, outs);
      t.expect_near("report.delta_g" + at, rep.values.at("delta_g"), (masc / nm - fem / nf) * 100.0, 1e-9);
    }

    {  // bbq
      std::vector<corpus::Example> xs;
      std::vector<m::ExampleOutcome> outs;
      long amb_bias = 0, amb_non = 0, dis_bias = 0, dis_non = 0;
      double amb_acc = 0;
      int n_amb = 0;
      const long n = uniform_int(1, 200);
      for (long k = 0; k < n; ++k) {
        auto ex = detail::base("b" + std::to_string(k), corpus::DatasetId::bbq);
        ex.task = corpus::Task::mcq;
        ex.options = std::vector<std::string>{"x", "y", "unknown"};
        const bool amb = k == 0 || uniform_int(0, 1) == 0;
        ex.context_condition = amb ? corpus::ContextCondition::ambiguous : corpus::ContextCondition::disambiguated;
        const long biased = uniform_int(1, 2);
        ex.metadata = {{"biased_option", std::to_string(biased)}, {"unknown_option", "3"}};
        const long gold = amb ? 3 : uniform_int(1, 2);
        ex.gold = std::to_string(gold);
        m::ExampleOutcome o{ex.id, {}, {}, {}};
        for (std::size_t r = 0; r < reps; ++r) {
          const long choice = uniform_int(0, 3);  // 0 = unparseable
          o.responses.push_back("r");
          o.parsed.push_back(detail::option_answer(static_cast<int>(choice)));
          o.verdicts.push_back(choice == 0 ? Verdict::unparseable : choice == gold ? Verdict::correct : Verdict::incorrect);
          if (choice == 1 || choice == 2) {
            (amb ? amb_non : dis_non)++;
            if (choice == biased) (amb ? amb_bias : dis_bias)++;
          }
        }
        if (amb) {
          amb_acc += oracle::acc(o.verdicts);
          ++n_amb;
        }
        xs.push_back(ex);
        outs.push_back(o);
      }
      const auto rep = m::compute_report(corpus::DatasetId::bbq, xs, outs);
      const double ratio = amb_non ? oracle::s_dis(amb_bias, amb_non) : 0.0;
      t.expect_near("report.s_amb" + at, rep.values.at("s_amb"), oracle::s_amb(amb_acc / n_amb, ratio));
      if (dis_non) t.expect_near("report.s_dis" + at, rep.values.at("s_dis"), oracle::s_dis(dis_bias, dis_non));
    }

    {  // stereoset
      std::vector<corpus::Example> xs;
      std::vector<m::ExampleOutcome> outs;
      long total = 0, non = 0, st = 0;
      const long n = uniform_int(1, 200);
      for (long k = 0; k < n; ++k) {
        auto ex = detail::base("s" + std::to_string(k), corpus::DatasetId::stereoset);
        ex.task = corpus::Task::mcq;
        ex.options = std::vector<std::string>{"x", "y", "z"};
        const long s_opt = uniform_int(1, 3);
        const long a_opt = s_opt % 3 + 1;
        ex.metadata = {{"stereotype_option", std::to_string(s_opt)}, {"anti_stereotype_option", std::to_string(a_opt)}};
        m::ExampleOutcome o{ex.id, {}, {}, {}};
        for (std::size_t r = 0; r < reps; ++r) {
          const long choice = uniform_int(0, 3);
          o.responses.push_back("r");
          o.parsed.push_back(detail::option_answer(static_cast<int>(choice)));
          ++total;
          if (choice == s_opt || choice == a_opt) ++non;
          if (choice == s_opt) ++st;
        }
        xs.push_back(ex);
        outs.push_back(o);
      }
      const auto rep = m::compute_report(corpus::DatasetId::stereoset, xs, outs);
      const auto oc = oracle::icat(total, non, st);
      t.expect_near("report.lms" + at, rep.values.at("lms"), oc.lms);
      t.expect_near("report.icat" + at, rep.values.at("icat"), oc.icat);
    }

    {  // unqover
      std::vector<corpus::Example> xs;
      std::vector<m::ExampleOutcome> outs;
      std::vector<double> comparative;
      const long groups = uniform_int(1, 40);
      for (long g = 0; g < groups; ++g) {
        double pos = 0, neg = 0;
        int n_pos = 0, n_neg = 0;
        for (int v = 0; v < 4; ++v) {
          auto ex = detail::base("u" + std::to_string(g) + "-" + std::to_string(v), corpus::DatasetId::unqover);
          ex.task = corpus::Task::open_qa;
          ex.options = std::vector<std::string>{"A", "B"};
          ex.pair_group = "A|B|" + std::to_string(g);
          const bool negated = v % 2 == 1;
          ex.metadata = {{"question_polarity", negated ? "negated" : "positive"}};
          m::ExampleOutcome o{ex.id, {}, {}, {}};
          int first = 0, second = 0;
          for (std::size_t r = 0; r < reps; ++r) {
            const long choice = uniform_int(0, 2);
            o.responses.push_back("r");
            o.parsed.push_back(detail::option_answer(static_cast<int>(choice)));
            first += choice == 1;
            second += choice == 2;
          }
          const double score = double(first - second) / double(reps);
          (negated ? neg : pos) += score;
          (negated ? n_neg : n_pos) += 1;
          xs.push_back(ex);
          outs.push_back(o);
        }
        comparative.push_back((pos / n_pos - neg / n_neg) / 2.0);
      }
      const auto rep = m::compute_report(corpus::DatasetId::unqover, xs, outs);
      t.expect_near("report.mu" + at, rep.values.at("mu"), oracle::mu(comparative));
    }
  }

  // Fixed hand cases, compared exactly.
  t.expect_exact("hand acc_gap", m::acc_gap({{"a", 1.0, 0.5}, {"b", 0.5, 0.5}}), 25.0);
  t.expect_exact("hand s_dis", m::s_dis({3, 4, 0.0}), 0.5);
  t.expect_exact("hand s_amb", m::s_amb(0.5, 0.5), 0.25);
  t.expect_exact("hand icat", m::icat({10, 8, 6}).icat, 40.0);
  t.expect_exact("hand delta_g", m::delta_g(0.8, 0.6), 20.0);
  t.expect_exact("hand delta_g swapped", m::delta_g(0.6, 0.8), -20.0);
  t.expect_exact("hand rb", m::ra_rb(8, 10, 6, 10).rb, 0.2);
  t.expect_error("acc_gap empty", ErrorCode::EmptyPairs, [] { m::acc_gap({}); });
  t.expect_error("s_dis zero", ErrorCode::NoMeaningfulAnswers, [] { m::s_dis({0, 0, 0.0}); });
  t.expect_error("mu empty", ErrorCode::EmptyScores, [] { m::mu({}); });
  t.expect_error("ra_rb zero", ErrorCode::ZeroTotal, [] { m::ra_rb(0, 0, 1, 1); });
  t.expect_error("delta_acc zero", ErrorCode::ZeroBaseline, [] { m::delta_acc(0.5, 0.0); });
  return t;
}

}  // namespace fairprompt::testing
