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

// fairprompt: bias evaluation and debiasing-prompt synthesis from the shell.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairprompt/corpus/adapters.hpp"
#include "fairprompt/corpus/canonical_io.hpp"
#include "fairprompt/corpus/split.hpp"
#include "fairprompt/harness/report.hpp"
#include "fairprompt/harness/run.hpp"
#include "fairprompt/harness/transfer.hpp"

namespace fp = fairprompt;
namespace fs = std::filesystem;

namespace {

struct RunOverrides {
  std::string config_path;
  std::string output_dir;
  std::string cache_dir;
  std::string prompt_mode;
  std::string prompt_path;
  std::string cfd_family;
  std::string label;
  int repetitions = 0;
  int rounds = 0;
  int demonstrations = 0;
  long long seed = -1;
  std::size_t limit = 0;
};

void add_run_options(CLI::App* cmd, RunOverrides& o) {
  cmd->add_option("-c,--config", o.config_path, "run config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--output-dir", o.output_dir, "run directory");
  cmd->add_option("--cache-dir", o.cache_dir, "response cache directory");
  cmd->add_option("--label", o.label, "row label in reports");
  cmd->add_option("-m,--repetitions", o.repetitions, "trials per example");
  cmd->add_option("--seed", o.seed, "split / sampling seed");
  cmd->add_option("--limit", o.limit, "max examples per dataset");
}

fp::harness::RunConfig load(const RunOverrides& o) {
  auto c = fp::harness::load_config(o.config_path);
  if (!o.output_dir.empty()) c.output_dir = o.output_dir;
  if (!o.cache_dir.empty()) c.cache_dir = o.cache_dir;
  if (!o.label.empty()) c.label = o.label;
  if (!o.prompt_mode.empty()) c.prompt_mode = fp::harness::parse_prompt_mode(o.prompt_mode);
  if (!o.prompt_path.empty()) c.prompt_path = o.prompt_path;
  if (!o.cfd_family.empty()) c.cfd_family = o.cfd_family;
  if (o.repetitions > 0) c.repetitions = o.repetitions;
  if (o.rounds > 0) c.refinement_rounds = o.rounds;
  if (o.demonstrations > 0) c.demonstrations = o.demonstrations;
  if (o.seed >= 0) c.seed = static_cast<std::uint64_t>(o.seed);
  if (o.limit > 0) c.limit = o.limit;
  return c;
}

void print_metrics(const fp::harness::RunManifest& m) {
  for (const auto& [ds, r] : m.metrics) {
    std::cout << ds << ":";
    for (const auto& [k, v] : r.values)
      if (k.find('@') == std::string::npos) std::cout << " " << k << "=" << v;
    if (r.delta_acc) std::cout << " delta_acc=" << *r.delta_acc;
    if (r.delta_bias) std::cout << " delta_bias=" << *r.delta_bias;
    std::cout << "\n";
  }
  std::cout << "run directory: " << m.run_dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gender-bias evaluation and debiasing system-prompt synthesis for chat LLMs"};
  app.require_subcommand(1);

  // ingest
  std::string ingest_dataset, ingest_input, ingest_output;
  auto* ingest = app.add_subcommand("ingest", "convert a native benchmark release into canonical JSONL");
  ingest->add_option("-d,--dataset", ingest_dataset, "dataset id")->required();
  ingest->add_option("-i,--input", ingest_input, "native file or directory")->required();
  ingest->add_option("-o,--output", ingest_output, "canonical JSONL output")->required();

  // split
  std::string split_input, split_output;
  double split_fraction = 0.2;
  std::uint64_t split_seed = 0;
  bool split_stratify = false;
  auto* split = app.add_subcommand("split", "seeded dev/test split of a canonical corpus");
  split->add_option("-i,--input", split_input, "canonical JSONL")->required()->check(CLI::ExistingFile);
  split->add_option("-o,--output", split_output, "split JSON (stdout if omitted)");
  split->add_option("--dev-fraction", split_fraction, "share of units in dev");
  split->add_option("--seed", split_seed, "shuffle seed");
  split->add_flag("--stratify", split_stratify, "split each stratum separately");

  // eval
  RunOverrides eval_o;
  bool live = false;
  auto* eval = app.add_subcommand("eval", "evaluate the target under a fixed prompt mode");
  add_run_options(eval, eval_o);
  eval->add_option("--prompt-mode", eval_o.prompt_mode, "none | manual | cfd | external");
  eval->add_option("--prompt-path", eval_o.prompt_path, "system prompt file for external mode");
  eval->add_option("--cfd-family", eval_o.cfd_family, "gpt35_llama3 | llama2_alpaca");
  eval->add_flag("--live", live, "smoke run: first dataset only, 20 examples unless --limit, no tolerances");

  // drgap
  RunOverrides drgap_o;
  bool agg = false, no_ver = false, no_filt = false, no_ref = false;
  auto* drgap = app.add_subcommand("drgap", "synthesize a debiasing system prompt and evaluate it");
  add_run_options(drgap, drgap_o);
  drgap->add_option("-R,--rounds", drgap_o.rounds, "refinement rounds");
  drgap->add_option("-k,--demonstrations", drgap_o.demonstrations, "demonstrations per prompt");
  drgap->add_flag("--agg", agg, "aggregate selected reasoning across datasets into one prompt");
  drgap->add_flag("--no-verification", no_ver, "ablate reasoning verification");
  drgap->add_flag("--no-filtering", no_filt, "ablate gender-independent filtering");
  drgap->add_flag("--no-refinement", no_ref, "ablate iterative refinement");

  // transfer
  RunOverrides transfer_o;
  std::string prompts_from;
  std::vector<std::string> targets;
  auto* transfer = app.add_subcommand("transfer", "cross-dataset bias-reduction matrix");
  add_run_options(transfer, transfer_o);
  transfer->add_option("--prompts-from", prompts_from, "pipeline run directory with selected_prompts/")
      ->required()
      ->check(CLI::ExistingDirectory);
  transfer->add_option("--targets", targets, "target datasets (default: every configured dataset)")->delimiter(',');

  // report
  std::vector<std::string> manifests;
  std::string original, report_out;
  auto* report = app.add_subcommand("report", "comparison table over run manifests");
  report->add_option("-r,--run", manifests, "run directory or manifest.json (repeatable)")->required();
  report->add_option("--original", original, "run treated as the no-mitigation original");
  report->add_option("-o,--output", report_out, "write <prefix>.md, <prefix>.csv and <prefix>.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*ingest) {
      const auto corpus = fp::corpus::load_dataset(ingest_dataset, ingest_input);
      fp::corpus::canonical_write(ingest_output, corpus);
      std::cout << "wrote " << corpus.size() << " examples to " << ingest_output << "\n";
    } else if (*split) {
      const auto corpus = fp::corpus::canonical_read(split_input);
      const auto s = fp::corpus::make_split(corpus, fp::corpus::SplitOptions{split_fraction, split_seed, split_stratify});
      const auto text = fp::corpus::to_json(s).dump(2) + "\n";
      if (split_output.empty()) std::cout << text;
      else fp::util::write_file_atomic(split_output, text);
      std::cerr << "dev " << s.dev_ids.size() << ", test " << s.test_ids.size() << "\n";
    } else if (*eval) {
      auto c = load(eval_o);
      if (live) {
        c.datasets.resize(1);
        if (!c.limit) c.limit = 20;
        std::cout << "live smoke run on " << fp::corpus::to_string(c.datasets.front().id)
                  << "; values are reported, not checked\n";
      }
      if (c.prompt_mode == fp::harness::PromptMode::drgap || c.prompt_mode == fp::harness::PromptMode::drgap_agg)
        throw fp::Error(fp::ErrorCode::ConfigError, "pipeline modes run through the drgap verb");
      print_metrics(fp::harness::run_eval(c));
    } else if (*drgap) {
      auto c = load(drgap_o);
      if (agg) c.prompt_mode = fp::harness::PromptMode::drgap_agg;
      else if (c.prompt_mode != fp::harness::PromptMode::drgap_agg) c.prompt_mode = fp::harness::PromptMode::drgap;
      c.ablation.no_verification = c.ablation.no_verification || no_ver;
      c.ablation.no_filtering = c.ablation.no_filtering || no_filt;
      c.ablation.no_refinement = c.ablation.no_refinement || no_ref;
      fp::harness::validate(c);
      const auto m = fp::harness::run_drgap(c);
      print_metrics(m);
      std::cout << "selected prompt: " << (m.run_dir / "selected_prompt.txt").string() << "\n";
    } else if (*transfer) {
      auto c = load(transfer_o);
      c.prompt_mode = fp::harness::PromptMode::none;
      c.ablation = {};
      if (targets.empty())
        for (const auto& d : c.datasets) targets.emplace_back(fp::corpus::to_string(d.id));
      const auto m = fp::harness::run_transfer_matrix(c, fp::harness::prompts_from_run(prompts_from), targets);
      std::cout << fp::harness::to_csv(m);
    } else if (*report) {
      std::vector<fp::harness::RunManifest> runs;
      std::optional<std::size_t> original_idx;
      if (!original.empty()) {
        runs.push_back(fp::harness::load_manifest(original));
        original_idx = 0;
      }
      for (const auto& path : manifests) runs.push_back(fp::harness::load_manifest(path));
      const auto table = fp::harness::build_report(runs, original_idx);
      std::cout << fp::harness::render_text(table);
      if (!report_out.empty()) {
        fp::util::write_file_atomic(report_out + ".md", fp::harness::render_text(table));
        fp::util::write_file_atomic(report_out + ".csv", fp::harness::render_csv(table));
        fp::util::write_file_atomic(report_out + ".json", fp::harness::to_json(table).dump(2) + "\n");
      }
    }
  } catch (const fp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fp::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
