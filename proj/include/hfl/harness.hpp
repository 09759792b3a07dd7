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


#ifndef HFL_HARNESS_HPP_
#define HFL_HARNESS_HPP_

// Experiment configuration, orchestration and metrics output.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hfl/byzantine.hpp"
#include "hfl/faults.hpp"
#include "hfl/learning.hpp"
#include "hfl/pushsum.hpp"
#include "hfl/signals.hpp"
#include "hfl/topology.hpp"

namespace hfl {

enum class FaultMode { kNone, kDrops, kByzantine };
enum class OutputFormat { kCsv, kJsonl };
enum class Mode { kConsensus, kLearnDrop, kLearnByz };

std::string to_string(Mode mode);

struct DropSpec {
  double prob = 0.0;
  ForcedPlacement placement = ForcedPlacement::kWindowEnd;
};

struct ByzantineSpec {
  ByzantinePlan plan;
  std::vector<std::size_t> c_set;
  InnovationMode innovation = InnovationMode::kCumulative;
};

struct RunSpec {
  std::size_t rounds = 100;
  std::vector<std::uint64_t> seeds{1};
  std::string output = "hfl_out/run.csv";
  OutputFormat format = OutputFormat::kCsv;
  /// Emit rows for rounds divisible by this (round 0 and the last round always).
  std::size_t record_every = 1;
  double delta = 0.1;
  Backend backend = Backend::kSerial;
};

struct ExperimentConfig {
  std::shared_ptr<const SystemTopology> topology;
  /// Present when the config has a "signals" section.
  std::shared_ptr<const SignalModel> model;
  /// Consensus inputs, one vector per agent.
  std::vector<std::vector<double>> inputs;
  /// When set, inputs are drawn per seed from U[low, high) with this dimension.
  struct RandomInputs {
    double low = 0.0;
    double high = 1.0;
    std::size_t dimension = 1;
  };
  std::optional<RandomInputs> random_inputs;
  FaultMode fault_mode = FaultMode::kNone;
  DropSpec drops;
  ByzantineSpec byzantine;
  RunSpec run;
};

/// Parses and cross-validates a JSON config. Throws ParseError with the
/// offending line, or ValidationError listing every problem found.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

/// "A..B" or "N"; throws InvalidArgument.
std::vector<std::uint64_t> parse_seed_range(const std::string& text);

/// Output file for one seed: HFL_OUTPUT_DIR replaces the directory when set,
/// and ".seed<N>" is inserted before the extension when several seeds run.
std::filesystem::path output_path(const RunSpec& run, std::uint64_t seed, const std::string& suffix = "");

/// Inputs used by a consensus run for this seed.
std::vector<std::vector<double>> consensus_inputs(const ExperimentConfig& config, std::uint64_t seed);

/// Drop schedule for this seed ("drops" stream); reliable when the fault mode is not drops.
DropSchedule schedule_for(const ExperimentConfig& config, std::uint64_t seed, std::size_t rounds);

// ------------------------------------------------------------------ output

using Cell = std::variant<std::monostate, std::int64_t, std::uint64_t, double, std::string>;

/// Row writer; every row must carry exactly the header's columns.
class RowSink {
 public:
  RowSink(std::ostream& os, OutputFormat format, std::vector<std::string> columns);
  void row(const std::vector<Cell>& cells);
  std::size_t rows_written() const noexcept { return rows_; }

 private:
  std::ostream& os_;
  OutputFormat format_;
  std::vector<std::string> columns_;
  std::size_t rows_ = 0;
};

/// Shortest representation that round-trips; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

struct RunSummary {
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> files;
  /// Human-readable closing lines (final error, beliefs, decoded hypotheses).
  std::vector<std::string> lines;
};

struct RunOverrides {
  std::optional<std::size_t> rounds;
  std::optional<std::string> output;
  std::optional<OutputFormat> format;
  bool dump_matrices = false;
};

/// Runs one seed of the given mode and writes its rows.
RunSummary run_experiment(const ExperimentConfig& config, Mode mode, std::uint64_t seed,
                          const RunOverrides& overrides = {});

// ------------------------------------------------------------------ verify

struct CheckResult {
  std::string name;
  bool pass = true;
  bool skipped = false;
  double observed = 0.0;   ///< worst residual or extreme value seen
  double threshold = 0.0;  ///< what it was compared against
  std::string detail;
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::size_t rounds = 0;
  std::vector<CheckResult> checks;
  bool pass() const;
};

/// Largest horizon verify evaluates; oracle work grows with its square.
inline constexpr std::size_t kVerifyMaxRounds = 60;

/// Checks mass conservation, oracle equivalence, the consensus-rate bound,
/// the product entry bound, ergodic decay and the learning reconstruction.
/// Throws InstanceTooLarge when the augmented system exceeds the oracle cap.
VerifyReport verify(const ExperimentConfig& config, std::uint64_t seed, std::optional<std::size_t> rounds = {},
                    std::ostream* matrix_dump = nullptr);

void print_report(std::ostream& os, const VerifyReport& report);

/// Certification of every certified-set network (or all networks when none is declared).
struct CertifySummary {
  std::vector<std::pair<std::size_t, CertReport>> networks;
  bool pass = true;
};
CertifySummary certify(const ExperimentConfig& config);
void print_certify(std::ostream& os, const CertifySummary& summary);

}  // namespace hfl

#endif  // HFL_HARNESS_HPP_
