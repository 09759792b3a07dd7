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

#ifndef HFL_SIGNALS_HPP_
#define HFL_SIGNALS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hfl/rng.hpp"

namespace hfl {

using HypothesisId = std::size_t;
using SignalId = std::size_t;

// Row-stochastic likelihood table of one agent: one row per hypothesis, one
// column per signal symbol. Entries are floored at SignalModel::kFloor and the
// row renormalized, so every log-ratio is finite.
class LikelihoodTable {
 public:
  LikelihoodTable() = default;
  explicit LikelihoodTable(const std::vector<std::vector<double>>& rows);

  std::size_t hypothesis_count() const noexcept { return hypotheses_; }
  std::size_t symbol_count() const noexcept { return symbols_; }
  double operator()(HypothesisId theta, SignalId w) const { return p_[theta * symbols_ + w]; }
  std::span<const double> row(HypothesisId theta) const {
    return {p_.data() + theta * symbols_, symbols_};
  }

 private:
  std::size_t hypotheses_ = 0;
  std::size_t symbols_ = 0;
  std::vector<double> p_;
};

class SignalModel {
 public:
  static constexpr double kFloor = 1e-12;
  static constexpr double kIdentifiabilityTol = 1e-9;

  SignalModel(std::size_t hypothesis_count, HypothesisId truth, std::vector<LikelihoodTable> tables,
              std::vector<std::string> names = {});

  std::size_t hypothesis_count() const noexcept { return hypotheses_; }
  HypothesisId truth() const noexcept { return truth_; }
  std::size_t agent_count() const noexcept { return tables_.size(); }
  const LikelihoodTable& table(std::size_t agent) const { return tables_.at(agent); }
  const std::string& name(HypothesisId theta) const { return names_.at(theta); }
  /// L: the largest log-likelihood ratio over agents, signals and hypothesis pairs.
  double l_bound() const noexcept { return l_bound_; }

  /// Same model with a different true hypothesis.
  SignalModel with_truth(HypothesisId truth) const;

 private:
  std::size_t hypotheses_;
  HypothesisId truth_;
  std::vector<LikelihoodTable> tables_;
  std::vector<std::string> names_;
  double l_bound_ = 0.0;
};

/// Draws one signal for `agent` from its row under the true hypothesis.
SignalId sample_signal(const SignalModel& model, std::size_t agent, Rng& rng);

double log_likelihood(const SignalModel& model, std::size_t agent, SignalId signal, HypothesisId theta);

/// D_KL(p || q) over a common finite support. Throws SupportMismatch.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// KL divergence of the joint signal-profile distributions: sum over agents of
/// D_KL(l_j(.|a) || l_j(.|b)).
double joint_kl(const SignalModel& model, HypothesisId a, HypothesisId b);

struct ObservabilityReport {
  bool pass = false;
  double min_kl = 0.0;
  std::pair<HypothesisId, HypothesisId> worst_pair{0, 0};
  /// kl[a][b] = joint_kl(model, a, b); diagonal is zero.
  std::vector<std::vector<double>> kl;
};

ObservabilityReport check_global_observability(const SignalModel& model,
                                               double tolerance = SignalModel::kIdentifiabilityTol);

// Table generators used by configs and tests.

/// Symbol (theta mod symbols) has probability `strength`; the rest share the remainder.
LikelihoodTable peaked_table(std::size_t hypotheses, std::size_t symbols, double strength);

/// Binary-signal table that separates hypotheses <= split from those > split.
/// An agent with this table cannot tell apart two hypotheses on the same side.
LikelihoodTable threshold_table(std::size_t hypotheses, std::size_t split, double strength);

}  // namespace hfl

#endif  // HFL_SIGNALS_HPP_
