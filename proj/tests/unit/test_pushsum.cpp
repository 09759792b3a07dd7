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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "hfl/error.hpp"
#include "hfl/faults.hpp"
#include "hfl/pushsum.hpp"
#include "hfl/rng.hpp"

using namespace hfl;

namespace {

SystemTopology desk(std::size_t b) {
  return SystemTopology::with_auto_gamma({SubNetwork::ring(0, 4, false), SubNetwork::ring(4, 4, false)}, {0, 4}, b);
}

std::vector<std::vector<double>> scalar_inputs(std::vector<double> w) {
  std::vector<std::vector<double>> out;
  for (double x : w) out.push_back({x});
  return out;
}

}  // namespace

TEST_CASE("isolated agent keeps its value and mass") {
  AgentState s = initial_state(0, {3.0, -1.0}, {});
  for (std::size_t t = 1; t <= 50; ++t) {
    auto res = local_round(s, {}, 0, {}, t);
    CHECK(res.broadcast.empty());
    s = std::move(res.state);
    CHECK(s.z == std::vector<double>{3.0, -1.0});
    CHECK(s.m == 1.0);
  }
}

TEST_CASE("two reliable agents reach the average") {
  const SystemTopology topo({SubNetwork::complete(0, 2)}, {0}, 1, 1);
  const auto tr = run_consensus(topo, scalar_inputs({1.0, 0.0}), DropSchedule::reliable(2, 25), 25);
  for (std::size_t t = 20; t <= 25; ++t)
    for (std::size_t a = 0; a < 2; ++a) CHECK(std::abs(tr.estimates[t][a][0] - 0.5) < 1e-12);
}

TEST_CASE("a dropped backlog arrives in full on the next delivery") {
  // Agent 0 -> agent 1 only; the link is down for rounds 1..k.
  const std::size_t k = 4;
  AgentState a = initial_state(0, {2.0}, {});
  AgentState b = initial_state(1, {0.0}, {0});
  const AgentId to_b[] = {1};
  double rho_before = b.rho[0];
  for (std::size_t t = 1; t <= k + 1; ++t) {
    auto ra = local_round(a, {}, 1, to_b, t);
    const LinkMessage& msg = ra.broadcast.at(0);
    const bool up = t == k + 1;
    auto rb = local_round(b, up ? std::span<const LinkMessage>(&msg, 1) : std::span<const LinkMessage>{}, 0, {}, t);
    if (!up) {
      CHECK(rb.state.rho[0] == rho_before);
    } else {
      CHECK(rb.state.rho[0] - rho_before == doctest::Approx(msg.sigma_plus[0] - 0.0).epsilon(1e-15));
      CHECK(rb.state.rho_tilde[0] == msg.sigma_tilde_plus);
    }
    a = std::move(ra.state);
    b = std::move(rb.state);
  }
  // Nothing lost: agent 0 holds z, agent 1 holds the rest, nothing in flight.
  CHECK(a.z[0] + b.z[0] + (a.sigma[0] - b.rho[0]) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(a.m + b.m + (a.sigma_tilde - b.rho_tilde[0]) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("local round rejects unknown links") {
  AgentState s = initial_state(1, {0.0}, {0});
  LinkMessage bogus{2, 1, {1.0}, 1.0, 1};
  CHECK_THROWS_AS(local_round(s, std::span<const LinkMessage>(&bogus, 1), 0, {}, 1), UnknownLink);
  LinkMessage misrouted{0, 3, {1.0}, 1.0, 1};
  CHECK_THROWS_AS(local_round(s, std::span<const LinkMessage>(&misrouted, 1), 0, {}, 1), UnknownLink);
}

TEST_CASE("fusion") {
  SUBCASE("one network is the identity") {
    AgentState s = initial_state(0, {5.0}, {});
    s.m = 0.3;
    AgentState* ptr[] = {&s};
    fusion_round(ptr, 1);
    CHECK(s.z[0] == 5.0);
    CHECK(s.m == 0.3);
  }
  SUBCASE("two networks, masses (2, 0)") {
    AgentState a = initial_state(0, {2.0}, {}), b = initial_state(1, {0.0}, {});
    a.m = 2.0;
    b.m = 0.0;
    AgentState* ptr[] = {&a, &b};
    fusion_round(ptr, 2);
    CHECK(a.m == 1.5);
    CHECK(b.m == 0.5);
    CHECK(a.z[0] == 1.5);
    CHECK(b.z[0] == 0.5);
  }
  SUBCASE("sums preserved for any inputs") {
    Rng rng(4);
    std::vector<AgentState> s;
    for (AgentId i = 0; i < 5; ++i) {
      s.push_back(initial_state(i, {rng.uniform(-3, 3), rng.uniform(-3, 3)}, {}));
      s.back().m = rng.uniform(0.1, 2.0);
    }
    double z0 = 0, z1 = 0, m = 0;
    for (const auto& x : s) z0 += x.z[0], z1 += x.z[1], m += x.m;
    std::vector<AgentState*> ptr;
    for (auto& x : s) ptr.push_back(&x);
    fusion_round(ptr, 5);
    double y0 = 0, y1 = 0, n = 0;
    for (const auto& x : s) y0 += x.z[0], y1 += x.z[1], n += x.m;
    CHECK(y0 == doctest::Approx(z0).epsilon(1e-14));
    CHECK(y1 == doctest::Approx(z1).epsilon(1e-14));
    CHECK(n == doctest::Approx(m).epsilon(1e-14));
  }
  SUBCASE("wrong count") {
    AgentState a = initial_state(0, {1.0}, {});
    AgentState* ptr[] = {&a};
    CHECK_THROWS_AS(fusion_round(ptr, 2), MissingDesignated);
  }
}

TEST_CASE("equal inputs stay put") {
  const auto topo = desk(2);
  Rng rng(8);
  const auto sched = make_schedule(topo, 0.5, 100, rng);
  const auto tr = run_consensus(topo, scalar_inputs(std::vector<double>(8, 2.5)), sched, 100);
  for (const auto& row : tr.errors)
    for (double e : row) CHECK(e < 1e-12);
}

TEST_CASE("conservation and positive mass under drops") {
  const auto topo = desk(2);
  Rng rng(21);
  const auto sched = make_schedule(topo, 0.5, 300, rng);
  std::vector<std::vector<double>> w;
  for (int i = 0; i < 8; ++i) w.push_back({rng.uniform(-5, 5), rng.uniform(0, 1)});
  HpsEngine engine(topo, w, sched);
  std::vector<double> sum(2, 0.0);
  for (const auto& x : w) sum[0] += x[0], sum[1] += x[1];
  for (std::size_t t = 1; t <= 300; ++t) {
    engine.step();
    CHECK(engine.mass_residual() < 1e-9);
    CHECK(engine.value_residual(sum) < 1e-9);
    for (const auto& s : engine.states()) CHECK(s.m > 0.0);
  }
}

TEST_CASE("permuted inputs share the limit") {
  const auto topo = desk(2);
  Rng rng(33);
  const auto sched = make_schedule(topo, 0.3, 3000, rng);
  std::vector<double> w{1, 2, 3, 4, 5, 6, 7, 8};
  const auto a = run_consensus(topo, scalar_inputs(w), sched, 3000);
  std::reverse(w.begin(), w.end());
  const auto b = run_consensus(topo, scalar_inputs(w), sched, 3000);
  CHECK(a.average == b.average);
  for (std::size_t j = 0; j < 8; ++j) {
    CHECK(std::abs(a.estimates.back()[j][0] - 4.5) < 1e-6);
    CHECK(std::abs(b.estimates.back()[j][0] - 4.5) < 1e-6);
  }
}

TEST_CASE("engine input validation") {
  const auto topo = desk(2);
  CHECK_THROWS(HpsEngine(topo, scalar_inputs({1, 2, 3}), DropSchedule::reliable(topo.link_count(), 10)));
}
