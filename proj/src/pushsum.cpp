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

#include "hfl/pushsum.hpp"

#include <algorithm>
#include <cmath>

#include "hfl/error.hpp"
#include "hfl/kernels.hpp"

namespace hfl {

AgentState initial_state(AgentId id, std::vector<double> w, std::vector<AgentId> in_senders) {
  AgentState s;
  s.id = id;
  const std::size_t dim = w.size();
  s.z = std::move(w);
  s.m = 1.0;
  s.sigma.assign(dim, 0.0);
  s.sigma_tilde = 0.0;
  s.in_senders = std::move(in_senders);
  s.rho.assign(s.in_senders.size() * dim, 0.0);
  s.rho_tilde.assign(s.in_senders.size(), 0.0);
  return s;
}

LinkMessage prepare_broadcast(const AgentState& state, std::size_t out_degree, std::size_t round) {
  LinkMessage msg;
  msg.sender = state.id;
  msg.round = round;
  msg.sigma_plus.resize(state.dim());
  kernels::broadcast_agent(state, out_degree, msg.sigma_plus.data(), msg.sigma_tilde_plus);
  return msg;
}

LocalRoundResult local_round(AgentState state, std::span<const LinkMessage> delivered, std::size_t out_degree,
                             std::span<const AgentId> out_neighbors, std::size_t round) {
  std::vector<const LinkMessage*> by_slot(state.in_senders.size(), nullptr);
  for (const LinkMessage& msg : delivered) {
    const auto it = std::find(state.in_senders.begin(), state.in_senders.end(), msg.sender);
    if (msg.receiver != state.id || it == state.in_senders.end()) {
      throw UnknownLink("message " + std::to_string(msg.sender) + "->" + std::to_string(msg.receiver) +
                        " is not an incoming link of agent " + std::to_string(state.id));
    }
    if (msg.sigma_plus.size() != state.dim()) throw InvalidArgument("message dimension mismatch");
    by_slot[static_cast<std::size_t>(it - state.in_senders.begin())] = &msg;
  }

  LinkMessage own = prepare_broadcast(state, out_degree, round);
  kernels::absorb_agent(state, out_degree, own.sigma_plus.data(), own.sigma_tilde_plus,
                        [&](std::size_t slot, const double*& sigma, double& mass) {
                          if (by_slot[slot] == nullptr) return false;
                          sigma = by_slot[slot]->sigma_plus.data();
                          mass = by_slot[slot]->sigma_tilde_plus;
                          return true;
                        });

  LocalRoundResult out{std::move(state), {}};
  for (AgentId to : out_neighbors) {
    LinkMessage m = own;
    m.receiver = to;
    out.broadcast.push_back(std::move(m));
  }
  return out;
}

void fusion_round(std::span<AgentState* const> designated, std::size_t m_count) {
  if (designated.size() != m_count || m_count == 0) {
    throw MissingDesignated("fusion needs exactly one designated agent per sub-network");
  }
  for (const AgentState* s : designated)
    if (s == nullptr) throw MissingDesignated("designated agent state missing");
  const std::size_t dim = designated.front()->dim();
  const double count = static_cast<double>(m_count);
  // What the server sends back: (1/M) * sum of the uploaded halves.
  std::vector<double> z_back(dim, 0.0);
  double m_back = 0.0;
  for (const AgentState* s : designated) {
    for (std::size_t k = 0; k < dim; ++k) z_back[k] += 0.5 * s->z[k];
    m_back += 0.5 * s->m;
  }
  for (double& v : z_back) v /= count;
  m_back /= count;
  for (AgentState* s : designated) {
    for (std::size_t k = 0; k < dim; ++k) s->z[k] = 0.5 * s->z[k] + z_back[k];
    s->m = 0.5 * s->m + m_back;
  }
}

// ------------------------------------------------------------------ HpsEngine

HpsEngine::HpsEngine(const SystemTopology& topology, const std::vector<std::vector<double>>& inputs,
                     const DropSchedule& schedule, Backend backend)
    : topology_(&topology), schedule_(&schedule), backend_(backend) {
  const std::size_t n = topology.agent_count();
  if (inputs.size() != n) throw InvalidArgument("expected one input vector per agent");
  dim_ = inputs.front().size();
  if (dim_ == 0) throw InvalidArgument("input dimension must be >= 1");
  if (schedule.link_count() != topology.link_count()) throw InvalidArgument("schedule does not match topology");
  states_.reserve(n);
  for (AgentId a = 0; a < n; ++a) {
    if (inputs[a].size() != dim_) throw InvalidArgument("inputs must share one dimension");
    std::vector<AgentId> senders;
    for (std::size_t l : topology.in_links(a)) senders.push_back(topology.links()[l].from);
    states_.push_back(initial_state(a, inputs[a], std::move(senders)));
  }
  link_slot_.resize(topology.link_count());
  for (AgentId a = 0; a < n; ++a) {
    const auto& in = topology.in_links(a);
    for (std::size_t slot = 0; slot < in.size(); ++slot) link_slot_[in[slot]] = {a, slot};
  }
  sigma_plus_.assign(n * dim_, 0.0);
  mass_plus_.assign(n, 0.0);
}

void HpsEngine::step(const Hook& before_fusion) {
  ++round_;
  if (round_ > schedule_->rounds()) throw InvalidArgument("round exceeds the drop schedule horizon");
  kernels::PushSumBuffers buf{std::move(sigma_plus_), std::move(mass_plus_)};
  kernels::pushsum_round(backend_, *topology_, states_, buf, *schedule_, round_);
  sigma_plus_ = std::move(buf.sigma_plus);
  mass_plus_ = std::move(buf.mass_plus);

  if (before_fusion) before_fusion(round_, states_);

  if (round_ % topology_->gamma() == 0) {
    std::vector<AgentState*> designated;
    for (AgentId a : topology_->designated_agents()) designated.push_back(&states_[a]);
    fusion_round(designated, topology_->network_count());
  }
}

std::vector<double> HpsEngine::estimate(AgentId a) const {
  const auto& s = states_.at(a);
  std::vector<double> e(dim_);
  for (std::size_t k = 0; k < dim_; ++k) e[k] = s.z[k] / s.m;
  return e;
}

std::vector<double> HpsEngine::augmented_values(std::size_t component) const {
  std::vector<double> x;
  x.reserve(states_.size() + link_slot_.size());
  for (const auto& s : states_) x.push_back(s.z[component]);
  for (std::size_t l = 0; l < link_slot_.size(); ++l) {
    const auto [receiver, slot] = link_slot_[l];
    const AgentId sender = topology_->links()[l].from;
    x.push_back(states_[sender].sigma[component] - states_[receiver].rho[slot * dim_ + component]);
  }
  return x;
}

std::vector<double> HpsEngine::augmented_masses() const {
  std::vector<double> x;
  x.reserve(states_.size() + link_slot_.size());
  for (const auto& s : states_) x.push_back(s.m);
  for (std::size_t l = 0; l < link_slot_.size(); ++l) {
    const auto [receiver, slot] = link_slot_[l];
    const AgentId sender = topology_->links()[l].from;
    x.push_back(states_[sender].sigma_tilde - states_[receiver].rho_tilde[slot]);
  }
  return x;
}

double HpsEngine::mass_residual() const {
  double sum = 0.0;
  for (double v : augmented_masses()) sum += v;
  return std::abs(sum - static_cast<double>(states_.size()));
}

double HpsEngine::value_residual(std::span<const double> reference_sum) const {
  double worst = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    double sum = 0.0;
    for (double v : augmented_values(k)) sum += v;
    worst = std::max(worst, std::abs(sum - reference_sum[k]));
  }
  return worst;
}

double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

ConsensusTrajectory run_consensus(const SystemTopology& topology, const std::vector<std::vector<double>>& inputs,
                                  const DropSchedule& schedule, std::size_t rounds, Backend backend) {
  HpsEngine engine(topology, inputs, schedule, backend);
  const std::size_t n = topology.agent_count();
  const std::size_t dim = engine.dim();
  ConsensusTrajectory tr;
  std::vector<double> sum(dim, 0.0);
  for (const auto& w : inputs)
    for (std::size_t k = 0; k < dim; ++k) sum[k] += w[k];
  tr.average = sum;
  for (double& v : tr.average) v /= static_cast<double>(n);

  auto record = [&] {
    std::vector<std::vector<double>> est(n);
    std::vector<double> err(n);
    for (AgentId a = 0; a < n; ++a) {
      est[a] = engine.estimate(a);
      std::vector<double> diff(dim);
      for (std::size_t k = 0; k < dim; ++k) diff[k] = est[a][k] - tr.average[k];
      err[a] = euclidean_norm(diff);
    }
    tr.estimates.push_back(std::move(est));
    tr.errors.push_back(std::move(err));
    tr.mass_residual.push_back(engine.mass_residual());
    tr.value_residual.push_back(engine.value_residual(sum));
  };
  record();
  for (std::size_t t = 1; t <= rounds; ++t) {
    engine.step();
    record();
  }
  return tr;
}

}  // namespace hfl
