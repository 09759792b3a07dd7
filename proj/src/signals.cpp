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

#include "hfl/signals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hfl/error.hpp"

namespace hfl {

namespace {

constexpr double kRowSumTolerance = 1e-6;

// Raise entries below the floor to the floor and take the added mass from the
// remaining entries proportionally.
void floor_row(std::span<double> row) {
  const double floor = SignalModel::kFloor;
  double kept = 0.0;
  std::size_t floored = 0;
  for (double v : row) {
    if (v < floor) {
      ++floored;
    } else {
      kept += v;
    }
  }
  const double target = 1.0 - static_cast<double>(floored) * floor;
  for (double& v : row) v = v < floor ? floor : v * (target / kept);
}

}  // namespace

LikelihoodTable::LikelihoodTable(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw InvalidArgument("likelihood table must be non-empty");
  hypotheses_ = rows.size();
  symbols_ = rows.front().size();
  p_.reserve(hypotheses_ * symbols_);
  for (std::size_t theta = 0; theta < rows.size(); ++theta) {
    const auto& r = rows[theta];
    if (r.size() != symbols_) throw InvalidArgument("likelihood rows must share one alphabet");
    double sum = 0.0;
    for (double v : r) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("likelihood entries must be finite and >= 0");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw InvalidArgument("likelihood row " + std::to_string(theta) + " sums to " + std::to_string(sum));
    }
    const std::size_t start = p_.size();
    for (double v : r) p_.push_back(v / sum);
    floor_row(std::span<double>(p_.data() + start, symbols_));
  }
}

SignalModel::SignalModel(std::size_t hypothesis_count, HypothesisId truth, std::vector<LikelihoodTable> tables,
                         std::vector<std::string> names)
    : hypotheses_(hypothesis_count), truth_(truth), tables_(std::move(tables)), names_(std::move(names)) {
  if (hypotheses_ < 2) throw InvalidArgument("at least two hypotheses are required");
  if (truth_ >= hypotheses_) throw InvalidArgument("true hypothesis out of range");
  if (names_.empty()) {
    for (std::size_t i = 0; i < hypotheses_; ++i) names_.push_back("theta" + std::to_string(i));
  }
  if (names_.size() != hypotheses_) throw InvalidArgument("hypothesis name count mismatch");
  for (std::size_t j = 0; j < tables_.size(); ++j) {
    if (tables_[j].hypothesis_count() != hypotheses_) {
      throw InvalidArgument("agent " + std::to_string(j) + " table has wrong hypothesis count");
    }
  }
  for (const auto& t : tables_) {
    for (SignalId w = 0; w < t.symbol_count(); ++w) {
      double hi = t(0, w), lo = t(0, w);
      for (HypothesisId theta = 1; theta < hypotheses_; ++theta) {
        hi = std::max(hi, t(theta, w));
        lo = std::min(lo, t(theta, w));
      }
      l_bound_ = std::max(l_bound_, std::log(hi / lo));
    }
  }
}

SignalModel SignalModel::with_truth(HypothesisId truth) const {
  SignalModel copy = *this;
  if (truth >= hypotheses_) throw InvalidArgument("true hypothesis out of range");
  copy.truth_ = truth;
  return copy;
}

SignalId sample_signal(const SignalModel& model, std::size_t agent, Rng& rng) {
  const auto row = model.table(agent).row(model.truth());
  const double u = rng.uniform();
  double acc = 0.0;
  for (SignalId w = 0; w + 1 < row.size(); ++w) {
    acc += row[w];
    if (u < acc) return w;
  }
  return row.size() - 1;
}

double log_likelihood(const SignalModel& model, std::size_t agent, SignalId signal, HypothesisId theta) {
  return std::log(model.table(agent)(theta, signal));
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw SupportMismatch("distributions have different support sizes");
  double d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) d += p[k] * std::log(p[k] / q[k]);
  }
  return d;
}

double joint_kl(const SignalModel& model, HypothesisId a, HypothesisId b) {
  double d = 0.0;
  for (std::size_t j = 0; j < model.agent_count(); ++j) {
    d += kl_divergence(model.table(j).row(a), model.table(j).row(b));
  }
  return d;
}

ObservabilityReport check_global_observability(const SignalModel& model, double tolerance) {
  const std::size_t m = model.hypothesis_count();
  ObservabilityReport rep;
  rep.kl.assign(m, std::vector<double>(m, 0.0));
  rep.min_kl = std::numeric_limits<double>::infinity();
  for (HypothesisId a = 0; a < m; ++a) {
    for (HypothesisId b = 0; b < m; ++b) {
      if (a == b) continue;
      rep.kl[a][b] = joint_kl(model, a, b);
      if (rep.kl[a][b] < rep.min_kl) {
        rep.min_kl = rep.kl[a][b];
        rep.worst_pair = {a, b};
      }
    }
  }
  rep.pass = rep.min_kl > tolerance;
  return rep;
}

LikelihoodTable peaked_table(std::size_t hypotheses, std::size_t symbols, double strength) {
  if (symbols < 2) throw InvalidArgument("peaked table needs at least two symbols");
  std::vector<std::vector<double>> rows(hypotheses, std::vector<double>(symbols));
  const double rest = (1.0 - strength) / static_cast<double>(symbols - 1);
  for (std::size_t theta = 0; theta < hypotheses; ++theta) {
    for (std::size_t w = 0; w < symbols; ++w) rows[theta][w] = (w == theta % symbols) ? strength : rest;
  }
  return LikelihoodTable(rows);
}

LikelihoodTable threshold_table(std::size_t hypotheses, std::size_t split, double strength) {
  std::vector<std::vector<double>> rows(hypotheses);
  for (std::size_t theta = 0; theta < hypotheses; ++theta) {
    rows[theta] = theta <= split ? std::vector<double>{strength, 1.0 - strength}
                                 : std::vector<double>{1.0 - strength, strength};
  }
  return LikelihoodTable(rows);
}

}  // namespace hfl
