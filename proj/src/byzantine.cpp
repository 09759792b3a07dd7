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

#include "hfl/byzantine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hfl/error.hpp"
#include "hfl/kernels.hpp"

namespace hfl {

double log_likelihood_ratio(const SignalModel& model, std::size_t agent, SignalId signal, HypothesisId a,
                            HypothesisId b) {
  return log_likelihood(model, agent, signal, a) - log_likelihood(model, agent, signal, b);
}

double agent_pair_step(const PairwiseState& state, std::span<const Reported> incoming, const PairIndex& idx,
                       HypothesisId a, HypothesisId b, double innovation, std::size_t f_bound) {
  return trimmed_update(state.at(idx, a, b), incoming, innovation, f_bound);
}

std::optional<HypothesisId> decode_hypothesis(const PairwiseState& state, const PairIndex& idx) {
  const std::size_t m = idx.hypotheses();
  double best = -std::numeric_limits<double>::infinity();
  std::optional<HypothesisId> arg;
  bool tie = false;
  for (HypothesisId a = 0; a < m; ++a) {
    double worst = std::numeric_limits<double>::infinity();
    for (HypothesisId b = 0; b < m; ++b)
      if (a != b) worst = std::min(worst, state.at(idx, a, b));
    if (worst > best) {
      best = worst;
      arg = a;
      tie = false;
    } else if (worst == best) {
      tie = true;
    }
  }
  if (tie) return std::nullopt;
  return arg;
}

bool PsGossipState::in_c(std::size_t network) const {
  return std::binary_search(c_set.begin(), c_set.end(), network);
}

std::vector<AgentId> choose_representatives(const SystemTopology& topology, const PsGossipState& gossip,
                                            std::size_t f_bound, Rng& rng) {
  const std::size_t m = topology.network_count();
  std::vector<AgentId> reps;
  if (m >= 2 * f_bound + 1) {
    for (const SubNetwork& net : topology.networks()) reps.push_back(net.agents()[rng.below(net.size())]);
    return reps;
  }
  if (gossip.c_set.size() < f_bound + 1) {
    throw AssumptionViolation("need at least F + 1 = " + std::to_string(f_bound + 1) + " certified networks, have " +
                              std::to_string(gossip.c_set.size()));
  }
  std::vector<AgentId> pool;
  for (std::size_t i = 0; i < m; ++i) {
    const SubNetwork& net = topology.network(i);
    if (gossip.in_c(i)) {
      reps.push_back(net.agents()[rng.below(net.size())]);
    } else {
      pool.insert(pool.end(), net.agents().begin(), net.agents().end());
    }
  }
  const std::size_t extra = 2 * f_bound + 1 - std::min(2 * f_bound + 1, gossip.c_set.size());
  if (pool.size() < extra) {
    throw AssumptionViolation("need " + std::to_string(extra) + " representatives outside the certified networks, only " +
                              std::to_string(pool.size()) + " agents available");
  }
  // Partial Fisher-Yates: without replacement within the round.
  for (std::size_t k = 0; k < extra; ++k) {
    const std::size_t pick = k + rng.below(pool.size() - k);
    std::swap(pool[k], pool[pick]);
    reps.push_back(pool[k]);
  }
  return reps;
}

void ps_gossip_round(std::vector<PairwiseState>& states, PsGossipState& gossip, const SystemTopology& topology,
                     const ByzantinePlan& plan, const std::vector<std::vector<double>>& reported) {
  const auto& reps = gossip.representatives;
  if (reported.size() != reps.size()) throw InvalidArgument("one report per representative expected");
  const std::size_t pairs = reps.empty() ? 0 : reported.front().size();
  gossip.trimmed_mean.assign(pairs, 0.0);
  gossip.surviving.assign(pairs, {});
  std::vector<Reported> values(reps.size());
  for (std::size_t p = 0; p < pairs; ++p) {
    for (std::size_t k = 0; k < reps.size(); ++k) values[k] = {reported[k][p], reps[k]};
    const auto kept = trimmed_filter(values, plan.f_bound);
    double sum = 0.0;
    for (const Reported& v : kept) {
      sum += v.value;
      gossip.surviving[p].push_back(v.sender);
    }
    gossip.trimmed_mean[p] = sum / static_cast<double>(kept.size());
  }
  if (gossip.sample_counts.size() < topology.agent_count()) gossip.sample_counts.resize(topology.agent_count(), 0);
  for (AgentId rep : reps) {
    ++gossip.sample_counts[rep];
    if (plan.is_faulty(rep) || gossip.in_c(topology.network_of(rep))) continue;
    for (std::size_t p = 0; p < pairs; ++p) states[rep].r[p] = gossip.trimmed_mean[p];
  }
  ++gossip.fusion_rounds;
}

std::vector<std::string> byzantine_violations(const SystemTopology& topology, const SignalModel& model,
                                              const ByzantinePlan& plan, const ByzantineOptions& options) {
  std::vector<std::string> out;
  try {
    plan.validate();
  } catch (const Error& e) {
    out.emplace_back(e.what());
  }
  for (AgentId a : plan.faulty())
    if (a >= topology.agent_count()) out.push_back("faulty agent " + std::to_string(a) + " does not exist");
  const std::size_t f = plan.f_bound;
  std::vector<std::size_t> c = options.c_set;
  std::sort(c.begin(), c.end());
  if (std::adjacent_find(c.begin(), c.end()) != c.end()) out.emplace_back("c_set lists a network twice");
  c.erase(std::unique(c.begin(), c.end()), c.end());
  if (c.size() < f + 1) {
    out.push_back("at least F + 1 = " + std::to_string(f + 1) + " networks must be certified (c_set has " +
                  std::to_string(c.size()) + ")");
  }
  for (std::size_t i : c) {
    if (i >= topology.network_count()) {
      out.push_back("c_set network " + std::to_string(i) + " does not exist");
      continue;
    }
    const SubNetwork& net = topology.network(i);
    for (AgentId a : net.agents()) {
      if (net.in_degree(a) < 2 * f + 1) {
        out.push_back("agent " + std::to_string(a) + " in certified network " + std::to_string(i) + " has in-degree " +
                      std::to_string(net.in_degree(a)) + " < 2F + 1 = " + std::to_string(2 * f + 1));
      }
    }
    try {
      const CertReport rep = certify_byzantine_network(net, f, model, model.truth(), options.cert);
      if (!rep.certified) {
        std::string why = rep.failures.empty() ? std::string("certification failed") : rep.failures.front().reason;
        out.push_back("network " + std::to_string(i) + " is not certified: " + why);
      }
    } catch (const Error& e) {
      out.push_back("network " + std::to_string(i) + ": " + e.what());
    }
  }
  if (topology.network_count() < 2 * f + 1 && c.size() < 2 * f + 1) {
    std::size_t pool = 0;
    for (std::size_t i = 0; i < topology.network_count(); ++i)
      if (!std::binary_search(c.begin(), c.end(), i)) pool += topology.network(i).size();
    if (pool < 2 * f + 1 - c.size()) out.emplace_back("not enough agents outside the certified networks to sample");
  }
  return out;
}

ByzantineTrajectory run_byzantine_learning(const SystemTopology& topology, const SignalModel& model,
                                           const ByzantinePlan& plan, std::size_t rounds, std::uint64_t seed,
                                           const ByzantineOptions& options, const ByzantineObserver& observer) {
  const auto violations = byzantine_violations(topology, model, plan, options);
  if (!violations.empty()) {
    std::string msg = "invalid Byzantine configuration:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw AssumptionViolation(msg);
  }
  const std::size_t n = topology.agent_count();
  const std::size_t f = plan.f_bound;
  const PairIndex idx(model.hypothesis_count());
  const std::size_t pairs = idx.size();
  const HypothesisId truth = model.truth();

  ByzantineTrajectory out;
  PsGossipState& gossip = out.gossip;
  gossip.c_set = options.c_set;
  std::sort(gossip.c_set.begin(), gossip.c_set.end());
  gossip.c_set.erase(std::unique(gossip.c_set.begin(), gossip.c_set.end()), gossip.c_set.end());
  gossip.sample_counts.assign(n, 0);

  // Normal agents of certified networks run the trimmed dynamics.
  std::vector<AgentId> active;
  for (std::size_t i : gossip.c_set)
    for (AgentId a : topology.network(i).agents())
      if (!plan.is_faulty(a)) active.push_back(a);
  std::sort(active.begin(), active.end());
  std::vector<std::size_t> offsets{0};
  std::vector<AgentId> senders;
  for (AgentId a : active) {
    for (AgentId s : topology.network(topology.network_of(a)).in_neighbors(a)) senders.push_back(s);
    offsets.push_back(senders.size());
  }
  std::vector<AgentId> normal;
  for (AgentId a = 0; a < n; ++a)
    if (!plan.is_faulty(a)) normal.push_back(a);

  std::vector<Rng> signal_rng, forge_rng;
  for (AgentId a = 0; a < n; ++a) {
    signal_rng.push_back(Rng::stream(seed, "signals", a));
    forge_rng.push_back(Rng::stream(seed, "byzantine", a));
  }
  Rng sampling = Rng::stream(seed, "sampling");

  std::vector<PairwiseState> state(n, PairwiseState::zero(model.hypothesis_count()));
  std::vector<double> cumulative(n * pairs, 0.0), innovation(n * pairs, 0.0);
  std::vector<double> previous(n * pairs, 0.0), next(n * pairs, 0.0);
  std::vector<double> values(senders.size() * pairs, 0.0), center(pairs, 0.0);
  std::vector<std::size_t> last_wrong(n, 0);
  out.tail_ratio.assign(n, std::vector<double>(model.hypothesis_count(), 0.0));
  const std::size_t tail_start = rounds - rounds / 5 + 1;  // last 20% of rounds
  std::size_t tail_count = 0;

  for (std::size_t t = 1; t <= rounds; ++t) {
    for (AgentId a : active) {
      const SignalId s = sample_signal(model, a, signal_rng[a]);
      for (std::size_t p = 0; p < pairs; ++p) {
        const auto [x, y] = idx.pair(p);
        const double fresh = log_likelihood_ratio(model, a, s, x, y);
        cumulative[a * pairs + p] += fresh;
        innovation[a * pairs + p] = options.innovation == InnovationMode::kCumulative ? cumulative[a * pairs + p] : fresh;
      }
    }
    std::fill(center.begin(), center.end(), 0.0);
    for (AgentId a : normal)
      for (std::size_t p = 0; p < pairs; ++p) center[p] += state[a].r[p];
    for (double& c : center) c /= static_cast<double>(normal.size());

    for (AgentId a = 0; a < n; ++a) std::copy(state[a].r.begin(), state[a].r.end(), previous.begin() + a * pairs);
    // Forged messages come from per-agent streams, so they are built serially
    // in a fixed order; the trimmed updates themselves run in the kernel.
    for (std::size_t k = 0; k < active.size(); ++k) {
      for (std::size_t msg = offsets[k]; msg < offsets[k + 1]; ++msg) {
        const AgentId s = senders[msg];
        for (std::size_t p = 0; p < pairs; ++p) {
          values[msg * pairs + p] = plan.is_faulty(s)
                                        ? forge(plan, s, active[k], center[p], center[p], t, forge_rng[s])
                                        : previous[s * pairs + p];
        }
      }
    }
    next = previous;
    kernels::PairRound in{pairs, f, active, offsets, senders, values, previous, innovation};
    kernels::pair_round(options.backend, in, next);
    for (AgentId a : active) std::copy(next.begin() + a * pairs, next.begin() + (a + 1) * pairs, state[a].r.begin());

    if (t % topology.gamma() == 0) {
      gossip.representatives = choose_representatives(topology, gossip, f, sampling);
      std::vector<std::vector<double>> reported;
      for (AgentId rep : gossip.representatives) {
        std::vector<double> row(pairs);
        for (std::size_t p = 0; p < pairs; ++p) {
          row[p] = plan.is_faulty(rep) ? forge(plan, rep, kParameterServer, center[p], center[p], t, forge_rng[rep])
                                       : state[rep].r[p];
        }
        reported.push_back(std::move(row));
      }
      ps_gossip_round(state, gossip, topology, plan, reported);
    }

    ByzantineRecord rec;
    rec.round = t;
    rec.decoded.resize(n);
    for (AgentId a : normal) {
      rec.decoded[a] = decode_hypothesis(state[a], idx);
      if (rec.decoded[a] != truth) last_wrong[a] = t;
    }
    if (t >= tail_start) {
      ++tail_count;
      const double t2 = static_cast<double>(t) * static_cast<double>(t);
      for (AgentId a : active)
        for (HypothesisId th = 0; th < model.hypothesis_count(); ++th)
          if (th != truth) out.tail_ratio[a][th] += state[a].at(idx, truth, th) / t2;
    }
    if (observer || options.keep_history) {
      rec.r = state;
      if (observer) observer(rec);
      if (options.keep_history) out.history.push_back(std::move(rec));
    }
  }

  if (tail_count > 0)
    for (auto& row : out.tail_ratio)
      for (double& v : row) v /= static_cast<double>(tail_count);

  for (AgentId a : normal) {
    ByzantineSummary s;
    s.agent = a;
    s.decoded = decode_hypothesis(state[a], idx);
    s.first_round_correct_stable = last_wrong[a] < rounds ? last_wrong[a] + 1 : 0;
    out.summary.push_back(s);
  }
  out.final_state = std::move(state);

  // Reference constant, reported only.
  out.beta = 1.0;
  for (std::size_t i : gossip.c_set) {
    const SubNetwork& net = topology.network(i);
    for (AgentId a : net.agents())
      if (!plan.is_faulty(a))
        out.beta = std::min(out.beta, 1.0 / (2.0 * (static_cast<double>(net.in_degree(a)) - 2.0 * f) + 1.0));
  }
  double constant = std::numeric_limits<double>::infinity();
  out.min_source_kl = std::numeric_limits<double>::infinity();
  for (std::size_t i : gossip.c_set) {
    const SubNetwork& net = topology.network(i);
    const auto normal_count = static_cast<double>(
        std::count_if(net.agents().begin(), net.agents().end(), [&](AgentId a) { return !plan.is_faulty(a); }));
    const CertReport rep = certify_byzantine_network(net, f, model, truth, options.cert);
    out.chi = std::max(out.chi, rep.chi);
    out.min_source_kl = std::min(out.min_source_kl, rep.min_source_kl);
    constant = std::min(constant, 0.5 * std::pow(out.beta, static_cast<double>(rep.chi) * normal_count) *
                                      rep.min_source_kl);
  }
  out.byzantine_rate_constant = std::isfinite(constant) ? constant : 0.0;
  return out;
}

}  // namespace hfl
