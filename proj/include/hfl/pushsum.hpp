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

#ifndef HFL_PUSHSUM_HPP_
#define HFL_PUSHSUM_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hfl/faults.hpp"
#include "hfl/topology.hpp"

namespace hfl {

enum class Backend { kSerial, kOpenMP };

// Robust push-sum state of one agent. z and sigma have the configured
// dimension; rho holds one value vector per incoming link, ordered as `in_senders`.
struct AgentState {
  AgentId id = 0;
  std::vector<double> z;
  double m = 1.0;
  std::vector<double> sigma;
  double sigma_tilde = 0.0;
  std::vector<AgentId> in_senders;
  std::vector<double> rho;        // in_senders.size() * dim, row per link
  std::vector<double> rho_tilde;  // in_senders.size()

  std::size_t dim() const noexcept { return z.size(); }
  std::span<const double> rho_of(std::size_t slot) const { return {rho.data() + slot * dim(), dim()}; }
};

/// Fresh state: z = w, m = 1, every counter zero.
AgentState initial_state(AgentId id, std::vector<double> w, std::vector<AgentId> in_senders);

struct LinkMessage {
  AgentId sender = 0;
  AgentId receiver = 0;
  std::vector<double> sigma_plus;
  double sigma_tilde_plus = 0.0;
  std::size_t round = 0;
};

struct LocalRoundResult {
  AgentState state;
  std::vector<LinkMessage> broadcast;
};

/// One robust push-sum iteration for a single agent. `delivered` holds the
/// messages that arrived this round; links without a message keep their
/// previous rho. `out_degree` is the realized out-degree of this round's graph.
LocalRoundResult local_round(AgentState state, std::span<const LinkMessage> delivered, std::size_t out_degree,
                             std::span<const AgentId> out_neighbors, std::size_t round);

/// Broadcast payload (sigma+, sigma_tilde+) an agent sends in its next round.
LinkMessage prepare_broadcast(const AgentState& state, std::size_t out_degree, std::size_t round);

/// Parameter-server exchange: each designated agent keeps half of (z, m) and
/// receives the average of the uploaded halves.
void fusion_round(std::span<AgentState* const> designated, std::size_t m_count);

// Lock-step simulator of the hierarchical push-sum over a whole topology.
class HpsEngine {
 public:
  /// Called after the push-sum update of a round and before fusion.
  using Hook = std::function<void(std::size_t round, std::span<AgentState> states)>;

  HpsEngine(const SystemTopology& topology, const std::vector<std::vector<double>>& inputs,
            const DropSchedule& schedule, Backend backend = Backend::kSerial);

  void step(const Hook& before_fusion = {});
  std::size_t round() const noexcept { return round_; }
  const SystemTopology& topology() const noexcept { return *topology_; }
  std::span<const AgentState> states() const noexcept { return states_; }
  std::span<AgentState> mutable_states() noexcept { return states_; }
  std::size_t dim() const noexcept { return dim_; }

  /// z / m of one agent.
  std::vector<double> estimate(AgentId a) const;

  /// Stacked augmented state for one component: real agents first, then one
  /// virtual agent per link holding sigma_from - rho_link.
  std::vector<double> augmented_values(std::size_t component) const;
  std::vector<double> augmented_masses() const;

  /// |sum of augmented masses - N|.
  double mass_residual() const;
  /// max over components of |sum of augmented values - reference_sum[c]|.
  double value_residual(std::span<const double> reference_sum) const;

 private:
  const SystemTopology* topology_;
  const DropSchedule* schedule_;
  Backend backend_;
  std::size_t dim_;
  std::size_t round_ = 0;
  std::vector<AgentState> states_;
  std::vector<double> sigma_plus_;  // agent-major, dim per agent
  std::vector<double> mass_plus_;
  std::vector<std::pair<AgentId, std::size_t>> link_slot_;  // receiver, slot
};

struct ConsensusTrajectory {
  std::vector<double> average;
  /// estimates[t][agent] for t = 0..rounds
  std::vector<std::vector<std::vector<double>>> estimates;
  /// errors[t][agent] = || estimate - average ||
  std::vector<std::vector<double>> errors;
  std::vector<double> mass_residual;
  std::vector<double> value_residual;
};

ConsensusTrajectory run_consensus(const SystemTopology& topology, const std::vector<std::vector<double>>& inputs,
                                  const DropSchedule& schedule, std::size_t rounds,
                                  Backend backend = Backend::kSerial);

double euclidean_norm(std::span<const double> v);

}  // namespace hfl

#endif  // HFL_PUSHSUM_HPP_
