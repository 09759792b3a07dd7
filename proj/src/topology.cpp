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

#include "hfl/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <map>

#include "hfl/error.hpp"

namespace hfl {

// ---------------------------------------------------------------- SubNetwork

SubNetwork::SubNetwork(std::vector<AgentId> agents, std::vector<Edge> edges)
    : agents_(std::move(agents)), edges_(std::move(edges)) {
  std::vector<AgentId> sorted = agents_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidArgument("duplicate agent id in sub-network");
  }
  for (const Edge& e : edges_) {
    if (e.from == e.to) throw InvalidArgument("self-loop on agent " + std::to_string(e.from));
    if (!contains(e.from) || !contains(e.to)) {
      throw InvalidArgument("link " + std::to_string(e.from) + "->" + std::to_string(e.to) +
                            " leaves its sub-network");
    }
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

SubNetwork SubNetwork::complete(AgentId first, std::size_t n) {
  std::vector<AgentId> agents(n);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) agents[i] = first + i;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) edges.push_back({first + i, first + j});
  return SubNetwork(std::move(agents), std::move(edges));
}

SubNetwork SubNetwork::ring(AgentId first, std::size_t n, bool bidirectional) {
  std::vector<AgentId> agents(n);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) agents[i] = first + i;
  if (n > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      const AgentId a = first + i, b = first + (i + 1) % n;
      edges.push_back({a, b});
      if (bidirectional) edges.push_back({b, a});
    }
  }
  return SubNetwork(std::move(agents), std::move(edges));
}

bool SubNetwork::contains(AgentId a) const {
  return std::find(agents_.begin(), agents_.end(), a) != agents_.end();
}

std::vector<AgentId> SubNetwork::in_neighbors(AgentId a) const {
  std::vector<AgentId> out;
  for (const Edge& e : edges_)
    if (e.to == a) out.push_back(e.from);
  return out;
}

std::vector<AgentId> SubNetwork::out_neighbors(AgentId a) const {
  std::vector<AgentId> out;
  for (const Edge& e : edges_)
    if (e.from == a) out.push_back(e.to);
  return out;
}

std::size_t SubNetwork::in_degree(AgentId a) const {
  return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(), [a](const Edge& e) { return e.to == a; }));
}

std::size_t SubNetwork::out_degree(AgentId a) const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [a](const Edge& e) { return e.from == a; }));
}

// ------------------------------------------------------------ SystemTopology

SystemTopology::SystemTopology(std::vector<SubNetwork> networks, std::vector<AgentId> designated, std::size_t gamma,
                               std::size_t window_b)
    : networks_(std::move(networks)), designated_(std::move(designated)), gamma_(gamma), window_b_(window_b) {
  if (networks_.empty()) throw InvalidArgument("at least one sub-network is required");
  if (gamma_ < 1) throw InvalidArgument("fusion period must be >= 1");
  if (window_b_ < 1) throw InvalidArgument("link-reliability window must be >= 1");
  if (designated_.size() != networks_.size()) {
    throw MissingDesignated("expected one designated agent per sub-network");
  }
  AgentId next = 0;
  for (std::size_t i = 0; i < networks_.size(); ++i) {
    const auto& agents = networks_[i].agents();
    if (agents.empty()) throw InvalidArgument("sub-network " + std::to_string(i) + " has no agents");
    for (AgentId a : agents) {
      if (a != next) throw InvalidArgument("agent ids must be dense and assigned in sub-network order");
      network_of_.push_back(i);
      ++next;
    }
    if (!networks_[i].contains(designated_[i])) {
      throw InvalidArgument("designated agent " + std::to_string(designated_[i]) + " is not in sub-network " +
                            std::to_string(i));
    }
  }
  in_links_.resize(next);
  out_links_.resize(next);
  for (const auto& net : networks_) {
    for (const Edge& e : net.edges()) {
      out_links_[e.from].push_back(links_.size());
      in_links_[e.to].push_back(links_.size());
      links_.push_back(e);
    }
  }
  auto by_sender = [this](std::size_t x, std::size_t y) { return links_[x].from < links_[y].from; };
  for (auto& v : in_links_) std::sort(v.begin(), v.end(), by_sender);
}

SystemTopology SystemTopology::with_auto_gamma(std::vector<SubNetwork> networks, std::vector<AgentId> designated,
                                               std::size_t window_b) {
  std::size_t d_star = 0;
  for (std::size_t i = 0; i < networks.size(); ++i) d_star = std::max(d_star, network_diameter(networks[i], i));
  return SystemTopology(std::move(networks), std::move(designated), std::max<std::size_t>(1, window_b * d_star),
                        window_b);
}

std::optional<std::size_t> SystemTopology::link_index(Edge e) const {
  if (e.from >= out_links_.size()) return std::nullopt;
  for (std::size_t l : out_links_[e.from])
    if (links_[l].to == e.to) return l;
  return std::nullopt;
}

// ------------------------------------------------------------------- metrics

std::size_t network_diameter(const SubNetwork& net, std::size_t index) {
  const auto& agents = net.agents();
  std::map<AgentId, std::size_t> local;
  for (std::size_t k = 0; k < agents.size(); ++k) local[agents[k]] = k;
  std::vector<std::vector<std::size_t>> adj(agents.size());
  for (const Edge& e : net.edges()) adj[local[e.from]].push_back(local[e.to]);

  std::size_t diameter = 0;
  constexpr auto kUnseen = std::numeric_limits<std::size_t>::max();
  for (std::size_t s = 0; s < agents.size(); ++s) {
    std::vector<std::size_t> dist(agents.size(), kUnseen);
    std::deque<std::size_t> queue{s};
    dist[s] = 0;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v : adj[u]) {
        if (dist[v] == kUnseen) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
    for (std::size_t d : dist) {
      if (d == kUnseen) throw NotStronglyConnected(index);
      diameter = std::max(diameter, d);
    }
  }
  return diameter;
}

GraphMetrics compute_metrics(const SystemTopology& topology) {
  GraphMetrics g;
  g.networks = topology.network_count();
  g.agents = topology.agent_count();
  g.window_b = topology.window_b();
  g.fusion_period = topology.gamma();
  g.min_beta = 1.0;
  for (std::size_t i = 0; i < topology.network_count(); ++i) {
    const auto& net = topology.network(i);
    g.diameters.push_back(network_diameter(net, i));
    g.d_star = std::max(g.d_star, g.diameters.back());
    std::size_t max_deg = 0;
    for (AgentId a : net.agents()) max_deg = std::max(max_deg, topology.out_degree(a));
    const double denom = static_cast<double>(max_deg + 1);
    g.betas.push_back(1.0 / (denom * denom));
    g.min_beta = std::min(g.min_beta, g.betas.back());
  }
  const double m = static_cast<double>(g.networks);
  const double exponent = static_cast<double>(2 * g.d_star * g.window_b);
  g.gamma_rate = 1.0 - std::pow(g.min_beta, exponent) / (4.0 * m * m);
  return g;
}

// ------------------------------------------------------------ reduced graphs

namespace {

struct SurvivorChoices {
  AgentId agent;
  std::vector<Edge> incoming;
  std::vector<std::vector<std::size_t>> removal_sets;  // indices into incoming
};

void combinations(std::size_t n, std::size_t k, std::vector<std::vector<std::size_t>>& out) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct Survivors {
  std::vector<AgentId> kept;
  std::vector<Edge> kept_edges;  // among survivors
  std::vector<std::vector<Edge>> incoming;  // per kept agent
};

Survivors survivors(const SubNetwork& net, const std::vector<AgentId>& faulty) {
  for (AgentId a : faulty)
    if (!net.contains(a)) throw InvalidArgument("faulty agent " + std::to_string(a) + " is not in the sub-network");
  auto is_faulty = [&](AgentId a) { return std::find(faulty.begin(), faulty.end(), a) != faulty.end(); };
  Survivors s;
  for (AgentId a : net.agents())
    if (!is_faulty(a)) s.kept.push_back(a);
  for (const Edge& e : net.edges())
    if (!is_faulty(e.from) && !is_faulty(e.to)) s.kept_edges.push_back(e);
  s.incoming.resize(s.kept.size());
  for (std::size_t k = 0; k < s.kept.size(); ++k)
    for (const Edge& e : s.kept_edges)
      if (e.to == s.kept[k]) s.incoming[k].push_back(e);
  return s;
}

}  // namespace

std::size_t count_reduced_graphs(const SubNetwork& net, const std::vector<AgentId>& faulty, std::size_t f_bound,
                                 std::size_t cap) {
  const Survivors s = survivors(net, faulty);
  std::size_t total = 1;
  for (const auto& in : s.incoming) {
    const std::size_t c = binomial(in.size(), std::min(f_bound, in.size()));
    if (c != 0 && total > (cap + 1) / c) return cap + 1;
    total *= c;
    if (total > cap) return cap + 1;
  }
  return total;
}

std::vector<ReducedGraph> enumerate_reduced_graphs(const SubNetwork& net, const std::vector<AgentId>& faulty,
                                                   std::size_t f_bound, std::size_t cap) {
  const std::size_t count = count_reduced_graphs(net, faulty, f_bound, cap);
  if (count > cap) {
    throw ExplosionGuard("reduced-graph enumeration exceeds the cap of " + std::to_string(cap));
  }
  const Survivors s = survivors(net, faulty);
  std::vector<SurvivorChoices> choices;
  for (std::size_t k = 0; k < s.kept.size(); ++k) {
    SurvivorChoices c{s.kept[k], s.incoming[k], {}};
    combinations(c.incoming.size(), std::min(f_bound, c.incoming.size()), c.removal_sets);
    choices.push_back(std::move(c));
  }

  std::vector<ReducedGraph> out;
  out.reserve(count);
  std::vector<std::size_t> odometer(choices.size(), 0);
  while (true) {
    ReducedGraph rg;
    rg.kept_agents = s.kept;
    for (std::size_t k = 0; k < choices.size(); ++k) {
      const auto& removal = choices[k].removal_sets[odometer[k]];
      for (std::size_t i = 0; i < choices[k].incoming.size(); ++i) {
        const Edge& e = choices[k].incoming[i];
        if (std::find(removal.begin(), removal.end(), i) != removal.end()) {
          rg.removed_edges.push_back(e);
        } else {
          rg.kept_edges.push_back(e);
        }
      }
    }
    std::sort(rg.kept_edges.begin(), rg.kept_edges.end());
    std::sort(rg.removed_edges.begin(), rg.removed_edges.end());
    out.push_back(std::move(rg));

    std::size_t k = 0;
    while (k < choices.size()) {
      if (++odometer[k] < choices[k].removal_sets.size()) break;
      odometer[k] = 0;
      ++k;
    }
    if (k == choices.size()) break;
  }
  return out;
}

std::vector<std::vector<AgentId>> source_components(const ReducedGraph& rg) {
  const auto& agents = rg.kept_agents;
  const std::size_t n = agents.size();
  std::map<AgentId, std::size_t> local;
  for (std::size_t k = 0; k < n; ++k) local[agents[k]] = k;
  std::vector<std::vector<std::size_t>> adj(n);
  for (const Edge& e : rg.kept_edges) adj[local.at(e.from)].push_back(local.at(e.to));

  // Tarjan's algorithm.
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0, comps = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : adj[v]) {
      if (index[w] == kUnset) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = comps;
      } while (w != v);
      ++comps;
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] == kUnset) visit(v);

  std::vector<bool> has_incoming(comps, false);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v : adj[u])
      if (comp[u] != comp[v]) has_incoming[comp[v]] = true;

  std::vector<std::vector<AgentId>> members(comps);
  for (std::size_t v = 0; v < n; ++v) members[comp[v]].push_back(agents[v]);
  std::vector<std::vector<AgentId>> sources;
  for (std::size_t c = 0; c < comps; ++c)
    if (!has_incoming[c]) sources.push_back(std::move(members[c]));
  std::sort(sources.begin(), sources.end());
  return sources;
}

bool has_unique_source_component(const ReducedGraph& rg) { return source_components(rg).size() == 1; }

// ------------------------------------------------------------- certification

void CertReport::throw_if_failed() const {
  if (certified) return;
  std::string msg = std::to_string(failure_count) + " certification failure(s)";
  for (const auto& f : failures) {
    msg += "; " + f.reason;
    if (f.theta) msg += " (theta=" + std::to_string(*f.theta) + ")";
  }
  throw ToleranceViolation(msg);
}

CertReport certify_byzantine_network(const SubNetwork& net, std::size_t f_bound, const SignalModel& model,
                                     HypothesisId truth, const CertOptions& options) {
  CertReport rep;
  rep.min_source_kl = std::numeric_limits<double>::infinity();
  const auto& agents = net.agents();
  for (AgentId a : agents) {
    if (a >= model.agent_count()) throw InvalidArgument("agent " + std::to_string(a) + " has no likelihood table");
  }

  auto record = [&](const std::vector<AgentId>& faulty, const ReducedGraph& rg, std::optional<HypothesisId> theta,
                    std::string reason) {
    ++rep.failure_count;
    if (rep.failures.size() < options.max_failures_kept) rep.failures.push_back({faulty, rg, theta, std::move(reason)});
  };

  // Faulty placements: every subset of size 0..F, in lexicographic order.
  std::vector<std::vector<AgentId>> placements{{}};
  for (std::size_t size = 1; size <= std::min(f_bound, agents.size()); ++size) {
    std::vector<std::vector<std::size_t>> idx;
    combinations(agents.size(), size, idx);
    for (const auto& c : idx) {
      std::vector<AgentId> a;
      for (std::size_t i : c) a.push_back(agents[i]);
      placements.push_back(std::move(a));
    }
  }
  std::size_t budget = 0;
  for (const auto& faulty : placements) {
    budget += count_reduced_graphs(net, faulty, f_bound, options.cap);
    if (budget > options.cap) throw ExplosionGuard("certification exceeds the reduced-graph cap");
  }

  rep.placements = placements.size();
  for (const auto& faulty : placements) {
    const auto graphs = enumerate_reduced_graphs(net, faulty, f_bound, options.cap);
    if (faulty.empty()) rep.chi = graphs.size();
    for (const auto& rg : graphs) {
      ++rep.graphs_checked;
      const auto sources = source_components(rg);
      if (sources.size() != 1) {
        rep.unique_source = false;
        record(faulty, rg, std::nullopt, std::to_string(sources.size()) + " source components");
        continue;
      }
      for (HypothesisId theta = 0; theta < model.hypothesis_count(); ++theta) {
        if (theta == truth) continue;
        double kl = 0.0;
        for (AgentId j : sources.front()) kl += kl_divergence(model.table(j).row(truth), model.table(j).row(theta));
        rep.min_source_kl = std::min(rep.min_source_kl, kl);
        if (!(kl > options.tolerance)) {
          rep.source_identifiable = false;
          record(faulty, rg, theta, "source component cannot tell the truth from theta");
        }
      }
    }
  }
  rep.certified = rep.unique_source && rep.source_identifiable;
  return rep;
}

}  // namespace hfl
