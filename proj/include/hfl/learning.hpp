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


#ifndef HFL_LEARNING_HPP_
#define HFL_LEARNING_HPP_

// Non-Bayesian learning over lossy links: push-sum on accumulated
// log-likelihoods with the KL-proximal (softmax) belief projection.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hfl/faults.hpp"
#include "hfl/pushsum.hpp"
#include "hfl/rng.hpp"
#include "hfl/signals.hpp"
#include "hfl/topology.hpp"

namespace hfl {

/// Softmax of z / mass under a uniform prior, shifted by the max coordinate.
/// Throws NonpositiveMass.
std::vector<double> belief_project(std::span<const double> z, double mass);

/// Draws one signal for `agent` and adds its log-likelihood to every
/// hypothesis coordinate of the state's z. Returns the drawn signal.
SignalId innovation_step(AgentState& state, const SignalModel& model, std::size_t agent, Rng& rng);

struct LearningOptions {
  double delta = 0.1;
  Backend backend = Backend::kSerial;
  /// Keep per-round log-likelihood vectors (needed by the reconstruction oracle).
  bool keep_innovations = false;
  /// Keep every round's record in the returned trajectory.
  bool keep_records = true;
};

struct LearningRecord {
  std::size_t round = 0;
  /// mu[agent][theta]
  std::vector<std::vector<double>> mu;
  /// log(mu(theta) / mu(theta*)) per agent and theta; zero at theta*.
  std::vector<std::vector<double>> log_ratio;
  /// Log-ratio bound per theta, simplified and floor/ceiling-exact; NaN before 2 Gamma and at theta*.
  std::vector<double> bound;
  std::vector<double> bound_exact;
  /// |z-bar(theta*, t) - z_j(theta*, t) / m_j(t)| per agent.
  std::vector<double> consensus_error;
  /// Running network average of all injected log-likelihoods, per theta.
  std::vector<double> z_bar;
  /// |sum of augmented values - sum of injected log-likelihoods|, max over theta.
  double value_residual = 0.0;
};

struct LearningTrajectory {
  std::vector<LearningRecord> records;
  /// innovations[r - 1][agent][theta] when requested.
  std::vector<std::vector<std::vector<double>>> innovations;
  /// signals[r - 1][agent]
  std::vector<std::vector<SignalId>> signals;
  /// Final accumulated values [agent][theta] and masses.
  std::vector<std::vector<double>> z;
  std::vector<double> mass;
  /// First round from which every agent keeps mu(theta*) > 0.99; 0 when never.
  std::size_t confident_from = 0;
  /// Bound on the consensus-error term used in the log-ratio bound.
  double consensus_term_bound = 0.0;
  /// Whether any recorded log-ratio exceeded its simplified bound.
  bool bound_violated = false;
};

using LearningObserver = std::function<void(const LearningRecord&)>;

/// Runs the learning dynamics for `rounds` rounds. Signals for agent k come
/// from the named stream "signals"/k of `seed`. Throws IdentifiabilityFailure
/// when the model is not globally observable.
LearningTrajectory run_learning(const SystemTopology& topology, const SignalModel& model,
                                const DropSchedule& schedule, std::size_t rounds, std::uint64_t seed,
                                const LearningOptions& options = {}, const LearningObserver& observer = {});

/// Confidence threshold used by `confident_from`.
inline constexpr double kConfidentBelief = 0.99;

}  // namespace hfl

#endif  // HFL_LEARNING_HPP_
