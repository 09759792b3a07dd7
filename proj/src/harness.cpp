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

#include "hfl/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "hfl/error.hpp"
#include "hfl/kernels.hpp"
#include "hfl/oracle.hpp"

namespace hfl {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kConsensus: return "consensus";
    case Mode::kLearnDrop: return "learn-drop";
    case Mode::kLearnByz: return "learn-byz";
  }
  return "?";
}

std::filesystem::path output_path(const RunSpec& run, std::uint64_t seed, const std::string& suffix) {
  std::filesystem::path p(run.output);
  if (const char* dir = std::getenv("HFL_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
    p = std::filesystem::path(dir) / p.filename();
  }
  std::string stem = p.stem().string();
  std::string ext = p.extension().string();
  if (run.seeds.size() > 1) stem += ".seed" + std::to_string(seed);
  if (!suffix.empty()) stem += suffix;
  return p.parent_path() / (stem + ext);
}

std::vector<std::vector<double>> consensus_inputs(const ExperimentConfig& config, std::uint64_t seed) {
  if (!config.random_inputs) return config.inputs;
  const auto& ri = *config.random_inputs;
  Rng rng = Rng::stream(seed, "inputs");
  std::vector<std::vector<double>> w(config.topology->agent_count(), std::vector<double>(ri.dimension));
  for (auto& v : w)
    for (double& x : v) x = rng.uniform(ri.low, ri.high);
  return w;
}

DropSchedule schedule_for(const ExperimentConfig& config, std::uint64_t seed, std::size_t rounds) {
  const SystemTopology& topo = *config.topology;
  if (config.fault_mode != FaultMode::kDrops) return DropSchedule::reliable(topo.link_count(), rounds, topo.window_b());
  Rng rng = Rng::stream(seed, "drops");
  return make_schedule(topo, config.drops.prob, rounds, rng, config.drops.placement);
}

// ------------------------------------------------------------------ output

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

RowSink::RowSink(std::ostream& os, OutputFormat format, std::vector<std::string> columns)
    : os_(os), format_(format), columns_(std::move(columns)) {
  if (format_ == OutputFormat::kCsv) {
    for (std::size_t i = 0; i < columns_.size(); ++i) os_ << (i ? "," : "") << columns_[i];
    os_ << '\n';
  }
}

void RowSink::row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_.size()) {
    throw InvalidArgument("row has " + std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(columns_.size()));
  }
  struct Csv {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(const std::string& v) const { return v; }
  };
  struct Json {
    std::string operator()(std::monostate) const { return "null"; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return std::isfinite(v) ? format_double(v) : "null"; }
    std::string operator()(const std::string& v) const { return nlohmann::json(v).dump(); }
  };
  if (format_ == OutputFormat::kCsv) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << std::visit(Csv{}, cells[i]);
  } else {
    os_ << '{';
    for (std::size_t i = 0; i < cells.size(); ++i) {
      os_ << (i ? "," : "") << nlohmann::json(columns_[i]).dump() << ':' << std::visit(Json{}, cells[i]);
    }
    os_ << '}';
  }
  os_ << '\n';
  ++rows_;
}

namespace {

struct OpenedSink {
  std::filesystem::path path;
  std::ofstream file;
  std::unique_ptr<RowSink> sink;
};

std::unique_ptr<OpenedSink> open_sink(const std::filesystem::path& path, OutputFormat format,
                                      std::vector<std::string> columns) {
  auto out = std::make_unique<OpenedSink>();
  out->path = path;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out->file.open(path, std::ios::binary | std::ios::trunc);
  if (!out->file) throw InvalidArgument("cannot write " + path.string());
  out->sink = std::make_unique<RowSink>(out->file, format, std::move(columns));
  return out;
}

bool recorded(std::size_t t, std::size_t every, std::size_t last) { return t == 0 || t == last || t % every == 0; }

Cell u(std::size_t v) { return static_cast<std::uint64_t>(v); }

std::string fmt_g(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void dump_round_matrices(const ExperimentConfig& config, const DropSchedule& schedule, std::size_t rounds,
                         std::filesystem::path path, RunSummary& summary) {
  path.replace_extension(".txt");
  try {
    AugmentedSystem::of(*config.topology).check_size();
  } catch (const InstanceTooLarge& e) {
    summary.lines.push_back(std::string("matrix dump skipped: ") + e.what());
    return;
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  for (std::size_t t = 1; t <= rounds; ++t) {
    dump_matrix(os, build_round_matrix(*config.topology, schedule, t), "M[" + std::to_string(t) + "]");
  }
  summary.files.push_back(path);
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config, Mode mode, std::uint64_t seed,
                          const RunOverrides& overrides) {
  RunSpec run = config.run;
  if (overrides.rounds) run.rounds = *overrides.rounds;
  if (overrides.output) run.output = *overrides.output;
  if (overrides.format) run.format = *overrides.format;
  const SystemTopology& topo = *config.topology;
  const std::size_t rounds = run.rounds;
  const std::size_t every = run.record_every;
  RunSummary summary;
  summary.seed = seed;
  const auto path = output_path(run, seed);
  const std::string matrices_suffix = ".matrices";

  switch (mode) {
    case Mode::kConsensus: {
      if (config.fault_mode == FaultMode::kByzantine) throw InvalidArgument("consensus runs take no Byzantine faults");
      const auto inputs = consensus_inputs(config, seed);
      const DropSchedule schedule = schedule_for(config, seed, rounds);
      HpsEngine engine(topo, inputs, schedule, run.backend);
      const std::size_t dim = engine.dim();
      std::vector<double> sum(dim, 0.0), avg(dim, 0.0);
      for (const auto& w : inputs)
        for (std::size_t k = 0; k < dim; ++k) sum[k] += w[k];
      for (std::size_t k = 0; k < dim; ++k) avg[k] = sum[k] / static_cast<double>(topo.agent_count());
      auto out = open_sink(path, run.format,
                           {"seed", "round", "agent", "component", "estimate", "average", "error", "mass_residual",
                            "value_residual"});
      double final_error = 0.0;
      auto record = [&](std::size_t t) {
        if (!recorded(t, every, rounds)) return;
        const double mres = engine.mass_residual();
        const double vres = engine.value_residual(sum);
        final_error = 0.0;
        for (AgentId a = 0; a < topo.agent_count(); ++a) {
          const auto est = engine.estimate(a);
          double err = 0.0;
          for (std::size_t k = 0; k < dim; ++k) err += (est[k] - avg[k]) * (est[k] - avg[k]);
          err = std::sqrt(err);
          final_error = std::max(final_error, err);
          for (std::size_t k = 0; k < dim; ++k) {
            out->sink->row({u(seed), u(t), u(a), u(k), est[k], avg[k], err, mres, vres});
          }
        }
      };
      record(0);
      for (std::size_t t = 1; t <= rounds; ++t) {
        engine.step();
        record(t);
      }
      summary.files.push_back(path);
      summary.lines.push_back("seed " + std::to_string(seed) + ": max consensus error " + fmt_g(final_error) +
                              " after " + std::to_string(rounds) + " rounds");
      if (overrides.dump_matrices) {
        dump_round_matrices(config, schedule, rounds, output_path(run, seed, matrices_suffix), summary);
      }
      break;
    }
    case Mode::kLearnDrop: {
      if (!config.model) throw InvalidArgument("learn-drop needs a \"signals\" section");
      if (config.fault_mode == FaultMode::kByzantine) throw InvalidArgument("learn-drop takes drops, not Byzantine faults");
      const SignalModel& model = *config.model;
      const DropSchedule schedule = schedule_for(config, seed, rounds);
      auto out = open_sink(path, run.format,
                           {"seed", "round", "agent", "theta", "mu", "log_ratio", "bound", "bound_exact",
                            "consensus_error"});
      LearningOptions opts;
      opts.delta = run.delta;
      opts.backend = run.backend;
      opts.keep_records = false;
      std::vector<double> final_truth_belief;
      const auto tr = run_learning(topo, model, schedule, rounds, seed, opts, [&](const LearningRecord& rec) {
        if (rec.round == rounds) {
          final_truth_belief.clear();
          for (const auto& mu : rec.mu) final_truth_belief.push_back(mu[model.truth()]);
        }
        if (!recorded(rec.round, every, rounds)) return;
        for (AgentId a = 0; a < rec.mu.size(); ++a) {
          for (HypothesisId th = 0; th < model.hypothesis_count(); ++th) {
            out->sink->row({u(seed), u(rec.round), u(a), u(th), rec.mu[a][th], rec.log_ratio[a][th], rec.bound[th],
                            rec.bound_exact[th], rec.consensus_error[a]});
          }
        }
      });
      summary.files.push_back(path);
      const double worst = final_truth_belief.empty()
                               ? 0.0
                               : *std::min_element(final_truth_belief.begin(), final_truth_belief.end());
      summary.lines.push_back("seed " + std::to_string(seed) + ": min belief in truth " + fmt_g(worst) +
                              ", all agents above 0.99 from round " +
                              (tr.confident_from ? std::to_string(tr.confident_from) : std::string("never")) +
                              ", bound " + (tr.bound_violated ? "violated" : "held"));
      if (overrides.dump_matrices) {
        dump_round_matrices(config, schedule, rounds, output_path(run, seed, matrices_suffix), summary);
      }
      break;
    }
    case Mode::kLearnByz: {
      if (!config.model) throw InvalidArgument("learn-byz needs a \"signals\" section");
      if (config.fault_mode != FaultMode::kByzantine) throw InvalidArgument("learn-byz needs faults.mode = byzantine");
      const SignalModel& model = *config.model;
      const PairIndex idx(model.hypothesis_count());
      ByzantineOptions opts;
      opts.c_set = config.byzantine.c_set;
      opts.innovation = config.byzantine.innovation;
      opts.backend = run.backend;
      const auto& plan = config.byzantine.plan;
      auto out = open_sink(path, run.format, {"seed", "round", "agent", "theta1", "theta2", "r", "decoded"});
      // -1 marks an undecided agent (no unique maximizer).
      auto decoded_cell = [](const std::optional<HypothesisId>& d) -> Cell {
        return d ? static_cast<std::int64_t>(*d) : std::int64_t{-1};
      };
      const auto tr = run_byzantine_learning(topo, model, plan, rounds, seed, opts, [&](const ByzantineRecord& rec) {
        if (!recorded(rec.round, every, rounds)) return;
        for (AgentId a = 0; a < topo.agent_count(); ++a) {
          if (plan.is_faulty(a)) continue;
          for (std::size_t p = 0; p < idx.size(); ++p) {
            const auto [x, y] = idx.pair(p);
            out->sink->row({u(seed), u(rec.round), u(a), u(x), u(y), rec.r[a].r[p], decoded_cell(rec.decoded[a])});
          }
        }
      });
      summary.files.push_back(path);
      const auto spath = output_path(run, seed, ".summary");
      auto sum_out = open_sink(spath, run.format, {"seed", "agent", "decoded", "first_round_correct_stable"});
      std::size_t correct = 0;
      for (const auto& s : tr.summary) {
        sum_out->sink->row({u(seed), u(s.agent), decoded_cell(s.decoded), u(s.first_round_correct_stable)});
        if (s.decoded == model.truth()) ++correct;
      }
      summary.files.push_back(spath);
      summary.lines.push_back("seed " + std::to_string(seed) + ": " + std::to_string(correct) + "/" +
                              std::to_string(tr.summary.size()) + " normal agents decode the true hypothesis");
      break;
    }
  }
  return summary;
}

// ------------------------------------------------------------------ verify

bool VerifyReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass || c.skipped; });
}

VerifyReport verify(const ExperimentConfig& config, std::uint64_t seed, std::optional<std::size_t> rounds,
                    std::ostream* matrix_dump) {
  const SystemTopology& topo = *config.topology;
  const auto aug = AugmentedSystem::of(topo);
  aug.check_size();
  const GraphMetrics metrics = compute_metrics(topo);
  const Backend backend = config.run.backend;
  const std::size_t T = std::min(rounds.value_or(config.run.rounds), kVerifyMaxRounds);
  const std::size_t gamma = topo.gamma();
  const bool canonical_gamma = gamma == metrics.window_b * metrics.d_star;

  VerifyReport report;
  report.seed = seed;
  report.rounds = T;
  const DropSchedule schedule = schedule_for(config, seed, T);
  const auto inputs = consensus_inputs(config, seed);
  const auto mats = round_matrices(topo, schedule, T);
  if (matrix_dump) {
    for (std::size_t t = 1; t <= T; ++t) dump_matrix(*matrix_dump, mats[t - 1], "M[" + std::to_string(t) + "]");
  }

  // Simulation against the oracle, round by round.
  HpsEngine engine(topo, inputs, schedule, backend);
  const std::size_t dim = engine.dim();
  std::vector<double> sum(dim, 0.0), avg(dim, 0.0);
  for (const auto& w : inputs)
    for (std::size_t k = 0; k < dim; ++k) sum[k] += w[k];
  for (std::size_t k = 0; k < dim; ++k) avg[k] = sum[k] / static_cast<double>(topo.agent_count());

  CheckResult mass{"mass_conservation", true, false, 0.0, 1e-9, ""};
  CheckResult value{"value_conservation", true, false, 0.0, 1e-9, ""};
  CheckResult equiv{"oracle_equivalence", true, false, 0.0, 1e-9, ""};
  CheckResult thm1{"consensus_rate_bound", true, false, 0.0, 1.0, "max error / bound over t >= 2 Gamma"};
  std::vector<std::vector<double>> prev(dim);
  for (std::size_t k = 0; k < dim; ++k) prev[k] = engine.augmented_values(k);
  std::vector<double> prev_mass = engine.augmented_masses();
  for (std::size_t t = 1; t <= T; ++t) {
    engine.step();
    for (std::size_t k = 0; k < dim; ++k) {
      const auto expect = mats[t - 1].apply(prev[k]);
      prev[k] = engine.augmented_values(k);
      for (std::size_t i = 0; i < expect.size(); ++i) equiv.observed = std::max(equiv.observed, std::abs(expect[i] - prev[k][i]));
    }
    const auto expect_mass = mats[t - 1].apply(prev_mass);
    prev_mass = engine.augmented_masses();
    for (std::size_t i = 0; i < expect_mass.size(); ++i)
      equiv.observed = std::max(equiv.observed, std::abs(expect_mass[i] - prev_mass[i]));
    mass.observed = std::max(mass.observed, engine.mass_residual());
    value.observed = std::max(value.observed, engine.value_residual(sum));
    if (canonical_gamma && t >= 2 * gamma) {
      const double bound = consensus_rate_bound(metrics, inputs, t);
      for (AgentId a = 0; a < topo.agent_count(); ++a) {
        const auto est = engine.estimate(a);
        double err = 0.0;
        for (std::size_t k = 0; k < dim; ++k) err += (est[k] - avg[k]) * (est[k] - avg[k]);
        thm1.observed = std::max(thm1.observed, std::sqrt(err) / bound);
      }
    }
  }
  mass.pass = mass.observed <= mass.threshold;
  value.pass = value.observed <= value.threshold;
  equiv.pass = equiv.observed <= equiv.threshold;
  if (!canonical_gamma) {
    thm1.skipped = true;
    thm1.detail = "fusion period differs from B * D*";
  } else if (T < 2 * gamma) {
    thm1.skipped = true;
    thm1.detail = "horizon shorter than 2 Gamma";
  } else {
    thm1.pass = thm1.observed <= thm1.threshold;
  }
  report.checks.insert(report.checks.end(), {mass, value, equiv, thm1});

  // Product entry bound and ergodic decay.
  CheckResult entries{"product_entry_bound", true, false, 1.0, product_entry_bound(metrics), ""};
  CheckResult decay{"ergodic_decay", true, false, 0.0, 1.0, "max delta(Psi(1,t)) / gamma^(floor(t/2Gamma)-1)"};
  if (!canonical_gamma || T < 2 * gamma) {
    entries.skipped = decay.skipped = true;
    entries.detail = decay.detail = canonical_gamma ? "horizon shorter than 2 Gamma" : "fusion period differs from B * D*";
  } else {
    std::vector<Matrix> transposed;
    for (const Matrix& m : mats) transposed.push_back(m.transpose());
    std::size_t violations = 0, windows = 0;
    const double gap = contraction_gap(metrics);
    for (std::size_t r = 1; r <= T; ++r) {
      Matrix acc = Matrix::identity(aug.n_total);
      for (std::size_t t = r; t <= T; ++t) {
        acc = kernels::matmul(backend, acc, transposed[t - 1]);
        if (t - r + 1 >= 2 * gamma) {
          ++windows;
          bool bad = false;
          for (double v : acc.data()) {
            entries.observed = std::min(entries.observed, v);
            bad = bad || v < entries.threshold;
          }
          violations += bad;
        }
        if (r == 1 && t >= 2 * gamma) {
          const double rhs = std::exp((static_cast<double>(t / (2 * gamma)) - 1.0) * std::log1p(-gap));
          decay.observed = std::max(decay.observed, ergodic_coefficients(acc).delta / rhs);
        }
      }
    }
    entries.pass = violations == 0;
    entries.detail = "min entry over windows of length >= 2 Gamma; " + std::to_string(violations) + " of " +
                     std::to_string(windows) + " windows below the bound";
    decay.pass = decay.observed <= decay.threshold;
  }
  report.checks.push_back(entries);
  report.checks.push_back(decay);

  // Learning reconstruction from the innovations.
  CheckResult recon{"learning_reconstruction", true, false, 0.0, 1e-7, ""};
  if (!config.model) {
    recon.skipped = true;
    recon.detail = "no signals section";
  } else {
    const std::size_t tl = std::min<std::size_t>(T, 40);
    LearningOptions opts;
    opts.keep_innovations = true;
    opts.keep_records = false;
    opts.backend = backend;
    const auto tr = run_learning(topo, *config.model, schedule, tl, seed, opts);
    const auto z = reconstruct_values(topo, mats, tr.innovations, tl);
    const auto m = reconstruct_masses(topo, mats, tl);
    for (AgentId a = 0; a < topo.agent_count(); ++a) {
      recon.observed = std::max(recon.observed, std::abs(m[a] - tr.mass[a]));
      for (std::size_t k = 0; k < z[a].size(); ++k) recon.observed = std::max(recon.observed, std::abs(z[a][k] - tr.z[a][k]));
    }
    recon.pass = recon.observed <= recon.threshold;
    recon.detail = "over " + std::to_string(tl) + " rounds";
  }
  report.checks.push_back(recon);
  return report;
}

void print_report(std::ostream& os, const VerifyReport& report) {
  os << "verify seed=" << report.seed << " rounds=" << report.rounds << '\n';
  for (const auto& c : report.checks) {
    os << (c.skipped ? "SKIP" : c.pass ? "PASS" : "FAIL") << ' ' << c.name << " observed=" << format_double(c.observed)
       << " threshold=" << format_double(c.threshold);
    if (!c.detail.empty()) os << "  (" << c.detail << ')';
    os << '\n';
  }
  os << (report.pass() ? "verify: all checks passed" : "verify: some checks FAILED") << '\n';
}

CertifySummary certify(const ExperimentConfig& config) {
  if (!config.model) throw InvalidArgument("certify needs a \"signals\" section");
  const SystemTopology& topo = *config.topology;
  const bool byz = config.fault_mode == FaultMode::kByzantine;
  const std::size_t f = byz ? config.byzantine.plan.f_bound : 0;
  std::vector<std::size_t> nets = byz ? config.byzantine.c_set : std::vector<std::size_t>{};
  if (nets.empty())
    for (std::size_t i = 0; i < topo.network_count(); ++i) nets.push_back(i);
  CertifySummary out;
  for (std::size_t i : nets) {
    auto rep = certify_byzantine_network(topo.network(i), f, *config.model, config.model->truth());
    out.pass = out.pass && rep.certified;
    out.networks.emplace_back(i, std::move(rep));
  }
  return out;
}

void print_certify(std::ostream& os, const CertifySummary& summary) {
  for (const auto& [i, rep] : summary.networks) {
    os << "network " << i << ": " << (rep.certified ? "certified" : "NOT certified") << " placements=" << rep.placements
       << " reduced_graphs=" << rep.graphs_checked << " chi=" << rep.chi
       << " min_source_kl=" << format_double(rep.min_source_kl) << '\n';
    for (const auto& f : rep.failures) {
      os << "  failure: faulty={";
      for (std::size_t k = 0; k < f.faulty.size(); ++k) os << (k ? "," : "") << f.faulty[k];
      os << "} " << f.reason << '\n';
    }
    if (rep.failure_count > rep.failures.size()) {
      os << "  ... " << rep.failure_count - rep.failures.size() << " more failures\n";
    }
  }
}

}  // namespace hfl
