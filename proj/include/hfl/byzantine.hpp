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


#ifndef HFL_BYZANTINE_HPP_
#define HFL_BYZANTINE_HPP_

// Byzantine-resilient learning: one scalar trimmed-mean dynamic per ordered
// hypothesis pair inside certified sub-networks, and parameter-server
// representative gossip that carries the result to every other agent.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hfl/faults.hpp"
#include "hfl/pushsum.hpp"
#include "hfl/rng.hpp"
#include "hfl/signals.hpp"
#include "hfl/topology.hpp"
#include "hfl/trimmed.hpp"

namespace hfl {

// Dense indexing of the m(m-1) ordered pairs (a, b), a != b.
class PairIndex {
 public:
  explicit PairIndex(std::size_t hypotheses) : m_(hypotheses) {}
  std::size_t hypotheses() const noexcept { return m_; }
  std::size_t size() const noexcept { return m_ * (m_ - 1); }
  std::size_t index(HypothesisId a, HypothesisId b) const { return a * (m_ - 1) + (b < a ? b : b - 1); }
  std::pair<HypothesisId, HypothesisId> pair(std::size_t k) const {
    const HypothesisId a = k / (m_ - 1);
    const std::size_t rest = k % (m_ - 1);
    return {a, rest < a ? rest : rest + 1};
  }

 private:
  std::size_t m_;
};

struct PairwiseState {
  std::vector<double> r;  ///< indexed by PairIndex, all zero initially

  static PairwiseState zero(std::size_t hypotheses) { return {std::vector<double>(PairIndex(hypotheses).size())}; }
  double at(const PairIndex& idx, HypothesisId a, HypothesisId b) const { return r[idx.index(a, b)]; }
};

/// log l_j(s | a) - log l_j(s | b)
double log_likelihood_ratio(const SignalModel& model, std::size_t agent, SignalId signal, HypothesisId a,
                            HypothesisId b);

/// One pair's update: trimmed mean of the incoming reports and the agent's own
/// previous value, plus `innovation`. Throws TooFewNeighbors.
double agent_pair_step(const PairwiseState& state, std::span<const Reported> incoming, const PairIndex& idx,
                       HypothesisId a, HypothesisId b, double innovation, std::size_t f_bound);

/// Unique argmax over theta of min_{theta' != theta} r(theta, theta'); empty on ties.
std::optional<HypothesisId> decode_hypothesis(const PairwiseState& state, const PairIndex& idx);

struct PsGossipState {
  std::vector<std::size_t> c_set;  ///< sorted sub-network indices
  std::vector<AgentId> representatives;
  /// Per pair: the trimmed mean and the surviving representatives.
  std::vector<double> trimmed_mean;
  std::vector<std::vector<AgentId>> surviving;
  /// Times each agent has been chosen as representative.
  std::vector<std::size_t> sample_counts;
  std::size_t fusion_rounds = 0;

  bool in_c(std::size_t network) const;
};

/// Representatives of one fusion round: one per network when M >= 2F + 1,
/// otherwise one per C network plus 2F + 1 - |C| agents drawn without
/// replacement from outside the C networks. Throws AssumptionViolation.
std::vector<AgentId> choose_representatives(const SystemTopology& topology, const PsGossipState& gossip,
                                            std::size_t f_bound, Rng& rng);

/// Parameter-server round for every pair at once (the representatives are
/// shared across pairs). `reported[k][p]` is what representative k returns for
/// pair p; non-C, non-faulty representatives adopt the trimmed mean.
void ps_gossip_round(std::vector<PairwiseState>& states, PsGossipState& gossip, const SystemTopology& topology,
                     const ByzantinePlan& plan, const std::vector<std::vector<double>>& reported);

enum class InnovationMode {
  kCumulative,  ///< log-likelihood ratio of all signals seen so far
  kFresh,       ///< log-likelihood ratio of this round's signal only
};

struct ByzantineOptions {
  std::vector<std::size_t> c_set;
  InnovationMode innovation = InnovationMode::kCumulative;
  Backend backend = Backend::kSerial;
  /// Store r for every round (memory heavy); otherwise only the final state.
  bool keep_history = false;
  CertOptions cert;
};

struct ByzantineRecord {
  std::size_t round = 0;
  /// r[agent] for every agent; faulty agents hold zeros.
  std::vector<PairwiseState> r;
  std::vector<std::optional<HypothesisId>> decoded;
};

struct ByzantineSummary {
  AgentId agent = 0;
  std::optional<HypothesisId> decoded;
  /// First round from which the decoded hypothesis is theta* through the end; 0 if never.
  std::size_t first_round_correct_stable = 0;
};

struct ByzantineTrajectory {
  std::vector<ByzantineRecord> history;
  std::vector<PairwiseState> final_state;
  std::vector<ByzantineSummary> summary;  ///< normal agents only
  /// ratio_mean[agent][theta]: mean of r(theta*, theta) / t^2 over the last 20% of rounds; C normal agents.
  std::vector<std::vector<double>> tail_ratio;
  /// Reference constant 0.5 beta^(chi phi) D*_KL, reported only.
  double byzantine_rate_constant = 0.0;
  double beta = 0.0;
  std::size_t chi = 0;
  double min_source_kl = 0.0;
  PsGossipState gossip;
};

using ByzantineObserver = std::function<void(const ByzantineRecord&)>;

/// Validates the configuration (certified C networks, |C| >= F + 1, in-degree
/// >= 2F + 1 inside C) and runs the pairwise dynamics. Signals for agent k come
/// from stream "signals"/k, forging from "byzantine"/k, sampling from "sampling".
/// Throws AssumptionViolation.
ByzantineTrajectory run_byzantine_learning(const SystemTopology& topology, const SignalModel& model,
                                           const ByzantinePlan& plan, std::size_t rounds, std::uint64_t seed,
                                           const ByzantineOptions& options, const ByzantineObserver& observer = {});

/// Checks a configuration without running it; returns every violation found.
std::vector<std::string> byzantine_violations(const SystemTopology& topology, const SignalModel& model,
                                              const ByzantinePlan& plan, const ByzantineOptions& options);

}  // namespace hfl

#endif  // HFL_BYZANTINE_HPP_
