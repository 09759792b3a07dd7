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

#include "hfl/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hfl/error.hpp"
#include "hfl/oracle.hpp"

namespace hfl {

std::vector<double> belief_project(std::span<const double> z, double mass) {
  if (!(mass > 0.0)) throw NonpositiveMass("belief projection needs a positive mass, got " + std::to_string(mass));
  std::vector<double> mu(z.size());
  if (z.empty()) return mu;
  double top = -std::numeric_limits<double>::infinity();
  for (double v : z) top = std::max(top, v / mass);
  double total = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    mu[k] = std::exp(z[k] / mass - top);
    total += mu[k];
  }
  for (double& v : mu) v /= total;
  return mu;
}

SignalId innovation_step(AgentState& state, const SignalModel& model, std::size_t agent, Rng& rng) {
  const SignalId s = sample_signal(model, agent, rng);
  for (HypothesisId theta = 0; theta < state.dim(); ++theta) state.z[theta] += log_likelihood(model, agent, s, theta);
  return s;
}

LearningTrajectory run_learning(const SystemTopology& topology, const SignalModel& model,
                                const DropSchedule& schedule, std::size_t rounds, std::uint64_t seed,
                                const LearningOptions& options, const LearningObserver& observer) {
  const auto obs = check_global_observability(model);
  if (!obs.pass) {
    throw IdentifiabilityFailure("model is not globally observable: hypotheses " +
                                 std::to_string(obs.worst_pair.first) + " and " +
                                 std::to_string(obs.worst_pair.second) + " have joint KL " +
                                 std::to_string(obs.min_kl));
  }
  const std::size_t n = topology.agent_count();
  const std::size_t m = model.hypothesis_count();
  if (model.agent_count() != n) throw InvalidArgument("signal model must have one table per agent");
  const HypothesisId truth = model.truth();
  const GraphMetrics metrics = compute_metrics(topology);

  HpsEngine engine(topology, std::vector<std::vector<double>>(n, std::vector<double>(m, 0.0)), schedule,
                   options.backend);
  std::vector<Rng> rngs;
  rngs.reserve(n);
  for (std::size_t a = 0; a < n; ++a) rngs.push_back(Rng::stream(seed, "signals", a));

  LearningBoundInputs bound_in{n, m, 0.0, model.l_bound(), options.delta};
  std::vector<double> kl(m, 0.0);
  for (HypothesisId theta = 0; theta < m; ++theta) kl[theta] = theta == truth ? 0.0 : joint_kl(model, truth, theta);

  LearningTrajectory out;
  out.consensus_term_bound = consensus_term_bound(metrics, n, model.l_bound());
  std::vector<double> injected(m, 0.0);
  std::vector<std::vector<double>> innovation(n, std::vector<double>(m, 0.0));
  std::vector<SignalId> drawn(n, 0);
  std::size_t last_unconfident = 0;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto make_record = [&](std::size_t t) {
    LearningRecord rec;
    rec.round = t;
    rec.mu.resize(n);
    rec.log_ratio.resize(n);
    rec.consensus_error.resize(n);
    rec.z_bar = injected;
    for (double& v : rec.z_bar) v /= static_cast<double>(n);
    for (AgentId a = 0; a < n; ++a) {
      const AgentState& s = engine.states()[a];
      rec.mu[a] = belief_project(s.z, s.m);
      rec.log_ratio[a].resize(m);
      for (HypothesisId theta = 0; theta < m; ++theta) rec.log_ratio[a][theta] = (s.z[theta] - s.z[truth]) / s.m;
      rec.consensus_error[a] = std::abs(rec.z_bar[truth] - s.z[truth] / s.m);
      if (!(rec.mu[a][truth] > kConfidentBelief)) last_unconfident = t;
    }
    rec.bound.assign(m, nan);
    rec.bound_exact.assign(m, nan);
    if (t >= 2 * metrics.fusion_period) {
      for (HypothesisId theta = 0; theta < m; ++theta) {
        if (theta == truth) continue;
        bound_in.joint_kl = kl[theta];
        const LearningBound b = learning_rate_bound(metrics, bound_in, t);
        rec.bound[theta] = b.simplified();
        rec.bound_exact[theta] = b.exact();
        for (AgentId a = 0; a < n; ++a)
          if (rec.log_ratio[a][theta] > rec.bound[theta]) out.bound_violated = true;
      }
    }
    rec.value_residual = engine.value_residual(injected);
    return rec;
  };

  auto emit = [&](LearningRecord&& rec) {
    if (observer) observer(rec);
    if (options.keep_records) out.records.push_back(std::move(rec));
  };

  emit(make_record(0));
  last_unconfident = 0;
  for (std::size_t t = 1; t <= rounds; ++t) {
    engine.step([&](std::size_t, std::span<AgentState> states) {
      for (AgentId a = 0; a < n; ++a) {
        drawn[a] = innovation_step(states[a], model, a, rngs[a]);
        for (HypothesisId theta = 0; theta < m; ++theta) {
          innovation[a][theta] = log_likelihood(model, a, drawn[a], theta);
          injected[theta] += innovation[a][theta];
        }
      }
    });
    if (options.keep_innovations) out.innovations.push_back(innovation);
    out.signals.push_back(drawn);
    emit(make_record(t));
  }

  out.confident_from = last_unconfident < rounds ? last_unconfident + 1 : 0;
  for (const AgentState& s : engine.states()) {
    out.z.push_back(s.z);
    out.mass.push_back(s.m);
  }
  return out;
}

}  // namespace hfl
