/**
 * Copyright 2026 The HFL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: consensus, learn-drop, learn-byz, certify, verify.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hfl/error.hpp"
#include "hfl/harness.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> seeds;
  std::optional<std::size_t> rounds;
  std::optional<std::string> out;
  std::optional<std::string> format;
  bool dump_matrices = false;
};

void add_common(CLI::App* cmd, Flags& f, bool with_output) {
  cmd->add_option("--config", f.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Single master seed");
  cmd->add_option("--seeds", f.seeds, "Seed range A..B (inclusive)");
  cmd->add_option("--rounds", f.rounds, "Number of rounds")->check(CLI::PositiveNumber);
  if (with_output) {
    cmd->add_option("--out", f.out, "Output file (directory overridden by HFL_OUTPUT_DIR)");
    cmd->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "jsonl"}));
  }
  cmd->add_flag("--dump-matrices", f.dump_matrices, "Write the per-round augmented matrices");
}

std::vector<std::uint64_t> seeds_of(const Flags& f, const hfl::ExperimentConfig& cfg) {
  if (f.seeds) return hfl::parse_seed_range(*f.seeds);
  if (f.seed) return {*f.seed};
  return cfg.run.seeds;
}

int run_mode(hfl::Mode mode, const Flags& f) {
  hfl::ExperimentConfig cfg = hfl::load_config(f.config);
  cfg.run.seeds = seeds_of(f, cfg);
  hfl::RunOverrides ov;
  ov.rounds = f.rounds;
  ov.output = f.out;
  if (f.format) ov.format = *f.format == "jsonl" ? hfl::OutputFormat::kJsonl : hfl::OutputFormat::kCsv;
  ov.dump_matrices = f.dump_matrices;
  if (f.out) cfg.run.output = *f.out;

  const auto& seeds = cfg.run.seeds;
  std::vector<hfl::RunSummary> results(seeds.size());
  std::vector<std::string> errors(seeds.size());
  // Seeds are independent; the OpenMP backend already parallelizes inside a run.
  const bool across = seeds.size() > 1 && cfg.run.backend == hfl::Backend::kSerial;
#pragma omp parallel for schedule(dynamic) if (across)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(seeds.size()); ++i) {
    try {
      results[i] = hfl::run_experiment(cfg, mode, seeds[i], ov);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  int rc = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!errors[i].empty()) {
      std::cerr << "seed " << seeds[i] << ": error: " << errors[i] << '\n';
      rc = 1;
      continue;
    }
    for (const auto& line : results[i].lines) std::cout << line << '\n';
    for (const auto& p : results[i].files) std::cout << "  wrote " << p.string() << '\n';
  }
  return rc;
}

int run_verify(const Flags& f) {
  const hfl::ExperimentConfig cfg = hfl::load_config(f.config);
  int rc = 0;
  for (std::uint64_t seed : seeds_of(f, cfg)) {
    std::ofstream dump;
    if (f.dump_matrices) {
      hfl::RunSpec spec = cfg.run;
      spec.seeds = {seed};
      auto path = hfl::output_path(spec, seed, ".verify.matrices").replace_extension(".txt");
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
      dump.open(path);
      std::cout << "  matrices in " << path.string() << '\n';
    }
    const auto report = hfl::verify(cfg, seed, f.rounds, f.dump_matrices ? &dump : nullptr);
    hfl::print_report(std::cout, report);
    if (!report.pass()) rc = 1;
  }
  return rc;
}

int run_certify(const Flags& f) {
  const auto summary = hfl::certify(hfl::load_config(f.config));
  hfl::print_certify(std::cout, summary);
  return summary.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical fault-tolerant consensus and social learning simulator", "hfl"};
  app.require_subcommand(1);
  Flags flags;
  auto* consensus = app.add_subcommand("consensus", "Robust push-sum consensus with parameter-server fusion");
  auto* learn_drop = app.add_subcommand("learn-drop", "Social learning over lossy links");
  auto* learn_byz = app.add_subcommand("learn-byz", "Byzantine-resilient pairwise learning");
  auto* cert = app.add_subcommand("certify", "Check the certification conditions of each sub-network");
  auto* ver = app.add_subcommand("verify", "Compare simulation against the matrix-product oracle");
  for (auto* c : {consensus, learn_drop, learn_byz}) add_common(c, flags, true);
  cert->add_option("--config", flags.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  add_common(ver, flags, false);
  CLI11_PARSE(app, argc, argv);

  try {
    if (*consensus) return run_mode(hfl::Mode::kConsensus, flags);
    if (*learn_drop) return run_mode(hfl::Mode::kLearnDrop, flags);
    if (*learn_byz) return run_mode(hfl::Mode::kLearnByz, flags);
    if (*cert) return run_certify(flags);
    if (*ver) return run_verify(flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
