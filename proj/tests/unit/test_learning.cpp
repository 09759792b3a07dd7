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

#include <cmath>
#include <vector>

#include <doctest.h>

#include "../support/oracles.hpp"
#include "hfl/error.hpp"
#include "hfl/faults.hpp"
#include "hfl/learning.hpp"
#include "hfl/rng.hpp"

using namespace hfl;

namespace {

SystemTopology isolated() { return SystemTopology({SubNetwork({0}, {})}, {0}, 1, 1); }

SystemTopology two_triangles(std::size_t b) {
  return SystemTopology::with_auto_gamma({SubNetwork::ring(0, 3, true), SubNetwork::ring(3, 3, true)}, {0, 3}, b);
}

}  // namespace

TEST_CASE("belief projection") {
  const std::vector<double> zero(4, 0.0);
  for (double mu : belief_project(zero, 1.0)) CHECK(mu == 0.25);
  const std::vector<double> z{std::log(2.0), 0.0};
  const auto mu = belief_project(z, 1.0);
  CHECK(mu[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(mu[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const std::vector<double> shifted{std::log(2.0) + 3.7, 3.7};
  const auto mu2 = belief_project(shifted, 1.0);
  CHECK(mu2[0] == doctest::Approx(mu[0]).epsilon(1e-14));
  CHECK(belief_project(std::vector<double>{2 * std::log(2.0), 0.0}, 2.0)[0] == doctest::Approx(2.0 / 3.0));
  // Huge statistics must not overflow.
  const auto big = belief_project(std::vector<double>{-1e6, -1e6 - 50.0}, 1.0);
  CHECK(big[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(belief_project(z, 0.0), NonpositiveMass);
}

TEST_CASE("uninformative signals shift every coordinate equally") {
  const SignalModel model(3, 0, {LikelihoodTable({{0.3, 0.7}, {0.3, 0.7}, {0.3, 0.7}})});
  AgentState s = initial_state(0, {0.5, -1.0, 2.0}, {});
  const auto before = belief_project(s.z, s.m);
  Rng rng(1);
  for (int i = 0; i < 10; ++i) innovation_step(s, model, 0, rng);
  CHECK(s.z[0] - 0.5 == doctest::Approx(s.z[1] + 1.0).epsilon(1e-13));
  CHECK(s.z[0] - 0.5 == doctest::Approx(s.z[2] - 2.0).epsilon(1e-13));
  const auto after = belief_project(s.z, s.m);
  for (std::size_t k = 0; k < 3; ++k) CHECK(after[k] == doctest::Approx(before[k]).epsilon(1e-12));
}

TEST_CASE("an informative signal moves the gap by log 4") {
  const SignalModel model(2, 0, {LikelihoodTable({{0.8, 0.2}, {0.2, 0.8}})});
  AgentState s = initial_state(0, {0.0, 0.0}, {});
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const double gap = s.z[0] - s.z[1];
    const SignalId w = innovation_step(s, model, 0, rng);
    const double step = s.z[0] - s.z[1] - gap;
    CHECK(std::abs(step) == doctest::Approx(std::log(4.0)).epsilon(1e-13));
    CHECK((step > 0) == (w == 0));
  }
}

TEST_CASE("learning replays exactly") {
  const auto topo = two_triangles(2);
  const SignalModel model(3, 2, std::vector<LikelihoodTable>(6, peaked_table(3, 3, 0.6)));
  Rng r1(5), r2(5);
  const auto s1 = make_schedule(topo, 0.3, 200, r1), s2 = make_schedule(topo, 0.3, 200, r2);
  const auto a = run_learning(topo, model, s1, 200, 17);
  const auto b = run_learning(topo, model, s2, 200, 17);
  CHECK(a.z == b.z);
  CHECK(a.signals == b.signals);
  for (std::size_t t = 0; t < a.records.size(); ++t) CHECK(a.records[t].mu == b.records[t].mu);
  const auto c = run_learning(topo, model, s1, 200, 18);
  CHECK(a.signals != c.signals);
}

TEST_CASE("single agent matches the centralized posterior exactly") {
  const SignalModel model(3, 1, {LikelihoodTable({{0.5, 0.3, 0.2}, {0.2, 0.5, 0.3}, {0.3, 0.2, 0.5}})});
  const std::size_t T = 3000;
  const auto tr = run_learning(isolated(), model, DropSchedule::reliable(0, T), T, 4);
  for (std::size_t t : {1ul, 10ul, 500ul, T}) {
    const auto post = testing::centralized_posterior(model, tr.signals, t);
    for (HypothesisId th = 0; th < 3; ++th) CHECK(tr.records[t].mu[0][th] == doctest::Approx(post[th]).epsilon(1e-9));
  }
  CHECK(tr.confident_from > 0);
  CHECK(tr.confident_from == testing::centralized_confident_round(model, tr.signals, kConfidentBelief));
  // Log-ratio slope approaches -KL(theta* || theta).
  for (HypothesisId th : {0ul, 2ul}) {
    const double slope = (tr.records[T].log_ratio[0][th] - tr.records[T / 2].log_ratio[0][th]) / (T / 2.0);
    const double kl = joint_kl(model, 1, th);
    CHECK(std::abs(slope + kl) < 0.25 * kl);
  }
}

TEST_CASE("duplicated hypothesis is refused and shows no drift") {
  const LikelihoodTable t({{0.6, 0.4}, {0.6, 0.4}, {0.2, 0.8}});
  const SignalModel model(3, 0, {t, t, t, t, t, t});
  CHECK_THROWS_AS(run_learning(two_triangles(1), model, DropSchedule::reliable(12, 10), 10, 1), IdentifiabilityFailure);
  AgentState s = initial_state(0, {0.0, 0.0, 0.0}, {});
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) innovation_step(s, model, 0, rng);
  CHECK(s.z[1] - s.z[0] == 0.0);
  CHECK(s.z[2] - s.z[0] < -50.0);
}

TEST_CASE("local confusion: every agent still concentrates on the truth") {
  // Half the agents separate theta0 from the rest, half separate theta2 from the rest.
  const auto topo = two_triangles(1);
  std::vector<LikelihoodTable> tables;
  for (int j = 0; j < 6; ++j) tables.push_back(threshold_table(3, j % 2 == 0 ? 0 : 1, 0.8));
  const SignalModel model(3, 1, tables);
  const std::size_t T = 4000;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    LearningOptions opt;
    opt.keep_records = false;
    const auto tr = run_learning(topo, model, DropSchedule::reliable(topo.link_count(), T), T, seed, opt);
    CHECK(tr.confident_from > 0);
    const auto central = testing::centralized_confident_round(model, tr.signals, kConfidentBelief);
    CHECK(central > 0);
  }
}

TEST_CASE("bounds are reported only after two fusion periods") {
  const auto topo = two_triangles(2);
  const SignalModel model(3, 0, std::vector<LikelihoodTable>(6, peaked_table(3, 3, 0.6)));
  const auto tr = run_learning(topo, model, DropSchedule::reliable(topo.link_count(), 20), 20, 1);
  const std::size_t p = topo.gamma();
  CHECK(std::isnan(tr.records[2 * p - 1].bound[1]));
  CHECK_FALSE(std::isnan(tr.records[2 * p].bound[1]));
  CHECK(std::isnan(tr.records[2 * p].bound[0]));  // the truth has no bound
  CHECK(tr.records[2 * p].bound[1] >= tr.records[2 * p].bound_exact[1]);
  CHECK(tr.records.size() == 21);
}

TEST_CASE("per-round invariants under drops") {
  const auto topo = two_triangles(2);
  std::vector<LikelihoodTable> tables;
  for (int j = 0; j < 6; ++j) tables.push_back(j < 3 ? peaked_table(3, 3, 0.55) : threshold_table(3, 1, 0.7));
  const SignalModel model(3, 0, tables);
  Rng rng(14);
  const std::size_t T = 600;
  const auto sched = make_schedule(topo, 0.4, T, rng);
  const auto tr = run_learning(topo, model, sched, T, 14);
  std::vector<double> running(3, 0.0);
  for (const auto& rec : tr.records) {
    // Beliefs stay on the simplex.
    for (const auto& mu : rec.mu) {
      double s = 0.0;
      for (double v : mu) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
    // The network average of z is the plain sum of injected log-likelihoods over N.
    if (rec.round > 0)
      for (AgentId a = 0; a < 6; ++a)
        for (HypothesisId th = 0; th < 3; ++th)
          running[th] += log_likelihood(model, a, tr.signals[rec.round - 1][a], th) / 6.0;
    for (HypothesisId th = 0; th < 3; ++th) CHECK(rec.z_bar[th] == doctest::Approx(running[th]).epsilon(1e-12));
    CHECK(rec.value_residual < 1e-9);
    // Consensus error of the truth coordinate stays under the geometric-sum bound.
    if (rec.round >= 2 * topo.gamma())
      for (double e : rec.consensus_error) CHECK(e <= tr.consensus_term_bound);
  }
}
