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

#ifndef HFL_TOPOLOGY_HPP_
#define HFL_TOPOLOGY_HPP_

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hfl/signals.hpp"

namespace hfl {

using AgentId = std::size_t;

struct Edge {
  AgentId from = 0;
  AgentId to = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// One sub-network: its agents (global ids) and directed links, sorted and
/// free of duplicates and self-loops.
class SubNetwork {
 public:
  SubNetwork() = default;
  SubNetwork(std::vector<AgentId> agents, std::vector<Edge> edges);

  static SubNetwork complete(AgentId first, std::size_t n);
  /// Ring first -> first+1 -> ... -> first; with `bidirectional` each link also runs backwards.
  static SubNetwork ring(AgentId first, std::size_t n, bool bidirectional);

  const std::vector<AgentId>& agents() const noexcept { return agents_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return agents_.size(); }
  bool contains(AgentId a) const;
  std::vector<AgentId> in_neighbors(AgentId a) const;
  std::vector<AgentId> out_neighbors(AgentId a) const;
  std::size_t in_degree(AgentId a) const;
  std::size_t out_degree(AgentId a) const;

 private:
  std::vector<AgentId> agents_;
  std::vector<Edge> edges_;
};

// Whole hierarchical system. Agent ids are dense 0..N-1, assigned in
// sub-network order; links get a global index in the same order.
class SystemTopology {
 public:
  SystemTopology(std::vector<SubNetwork> networks, std::vector<AgentId> designated, std::size_t gamma,
                 std::size_t window_b);

  /// Fusion period chosen as B * D*, the longest diameter times the reliability window.
  static SystemTopology with_auto_gamma(std::vector<SubNetwork> networks, std::vector<AgentId> designated,
                                        std::size_t window_b);

  std::size_t network_count() const noexcept { return networks_.size(); }
  std::size_t agent_count() const noexcept { return network_of_.size(); }
  std::size_t link_count() const noexcept { return links_.size(); }
  const std::vector<SubNetwork>& networks() const noexcept { return networks_; }
  const SubNetwork& network(std::size_t i) const { return networks_.at(i); }
  AgentId designated(std::size_t i) const { return designated_.at(i); }
  const std::vector<AgentId>& designated_agents() const noexcept { return designated_; }
  std::size_t gamma() const noexcept { return gamma_; }
  std::size_t window_b() const noexcept { return window_b_; }
  std::size_t network_of(AgentId a) const { return network_of_.at(a); }

  const std::vector<Edge>& links() const noexcept { return links_; }
  /// Global link indices entering `a`, ordered by sender.
  const std::vector<std::size_t>& in_links(AgentId a) const { return in_links_.at(a); }
  /// Global link indices leaving `a`, ordered by receiver.
  const std::vector<std::size_t>& out_links(AgentId a) const { return out_links_.at(a); }
  std::size_t out_degree(AgentId a) const { return out_links_.at(a).size(); }
  std::optional<std::size_t> link_index(Edge e) const;

 private:
  std::vector<SubNetwork> networks_;
  std::vector<AgentId> designated_;
  std::size_t gamma_;
  std::size_t window_b_;
  std::vector<std::size_t> network_of_;
  std::vector<Edge> links_;
  std::vector<std::vector<std::size_t>> in_links_;
  std::vector<std::vector<std::size_t>> out_links_;
};

struct GraphMetrics {
  std::size_t networks = 0;
  std::size_t agents = 0;
  std::size_t window_b = 0;
  std::size_t fusion_period = 0;
  std::vector<std::size_t> diameters;
  std::size_t d_star = 0;
  /// beta_i = 1 / max_j (d_j + 1)^2 with out-degrees over the full link set.
  std::vector<double> betas;
  double min_beta = 0.0;
  /// gamma = 1 - (min beta)^(2 D* B) / (4 M^2)
  double gamma_rate = 0.0;
};

/// Diameter of one sub-network over its full link set; throws NotStronglyConnected.
std::size_t network_diameter(const SubNetwork& net, std::size_t index = 0);

GraphMetrics compute_metrics(const SystemTopology& topology);

struct ReducedGraph {
  std::vector<AgentId> kept_agents;
  std::vector<Edge> kept_edges;
  /// Extra incoming links removed from surviving agents (step 3 of the construction).
  std::vector<Edge> removed_edges;
};

inline constexpr std::size_t kDefaultReducedGraphCap = 1'000'000;

/// Number of reduced graphs for one faulty set, saturating at cap + 1.
std::size_t count_reduced_graphs(const SubNetwork& net, const std::vector<AgentId>& faulty, std::size_t f_bound,
                                 std::size_t cap = kDefaultReducedGraphCap);

/// Every reduced graph of `net` for the faulty set: faulty agents and their
/// links removed, then each survivor drops min(F, in-degree) more incoming links.
std::vector<ReducedGraph> enumerate_reduced_graphs(const SubNetwork& net, const std::vector<AgentId>& faulty,
                                                   std::size_t f_bound,
                                                   std::size_t cap = kDefaultReducedGraphCap);

/// Strongly connected components of the kept graph that receive no link from
/// another component.
std::vector<std::vector<AgentId>> source_components(const ReducedGraph& rg);

bool has_unique_source_component(const ReducedGraph& rg);

struct CertFailure {
  std::vector<AgentId> faulty;
  ReducedGraph graph;
  /// Set when the failure is a zero KL sum over the source component.
  std::optional<HypothesisId> theta;
  std::string reason;
};

struct CertReport {
  bool certified = false;
  bool unique_source = true;
  bool source_identifiable = true;
  std::size_t placements = 0;
  std::size_t graphs_checked = 0;
  /// Reduced-graph count with no faulty agents.
  std::size_t chi = 0;
  /// Smallest source-component KL sum over every theta != truth and reduced graph.
  double min_source_kl = 0.0;
  std::size_t failure_count = 0;
  /// First few failures, for diagnostics.
  std::vector<CertFailure> failures;

  void throw_if_failed() const;
};

struct CertOptions {
  std::size_t cap = kDefaultReducedGraphCap;
  double tolerance = SignalModel::kIdentifiabilityTol;
  std::size_t max_failures_kept = 16;
};

/// Checks the unique-source-component condition over every faulty placement
/// |A| <= F and the source-component identifiability of the true hypothesis.
CertReport certify_byzantine_network(const SubNetwork& net, std::size_t f_bound, const SignalModel& model,
                                     HypothesisId truth, const CertOptions& options = {});

}  // namespace hfl

#endif  // HFL_TOPOLOGY_HPP_
