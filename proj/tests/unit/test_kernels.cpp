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

#include <vector>

#include <doctest.h>

#include "hfl/byzantine.hpp"
#include "hfl/faults.hpp"
#include "hfl/kernels.hpp"
#include "hfl/learning.hpp"
#include "hfl/oracle.hpp"
#include "hfl/pushsum.hpp"
#include "hfl/rng.hpp"

using namespace hfl;

// The serial kernels are the reference; the OpenMP ones must match bit for bit.

TEST_CASE("push-sum rounds agree bitwise") {
  std::vector<SubNetwork> nets;
  std::vector<AgentId> des;
  for (AgentId i = 0; i < 8; ++i) {
    nets.push_back(SubNetwork::ring(i * 25, 25, true));
    des.push_back(i * 25);
  }
  const auto topo = SystemTopology::with_auto_gamma(nets, des, 2);
  Rng rng(1);
  const auto sched = make_schedule(topo, 0.4, 200, rng);
  std::vector<std::vector<double>> w;
  for (std::size_t j = 0; j < topo.agent_count(); ++j) w.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
  HpsEngine a(topo, w, sched, Backend::kSerial), b(topo, w, sched, Backend::kOpenMP);
  for (int t = 0; t < 200; ++t) {
    a.step();
    b.step();
  }
  for (std::size_t j = 0; j < topo.agent_count(); ++j) {
    CHECK(a.states()[j].z == b.states()[j].z);
    CHECK(a.states()[j].m == b.states()[j].m);
    CHECK(a.states()[j].rho == b.states()[j].rho);
  }
}

TEST_CASE("matrix products agree bitwise") {
  Rng rng(2);
  Matrix x(70, 90), y(90, 50);
  for (double& v : x.data()) v = rng.uniform(-1, 1);
  for (double& v : y.data()) v = rng.uniform(-1, 1);
  CHECK(kernels::matmul(Backend::kSerial, x, y) == kernels::matmul(Backend::kOpenMP, x, y));
}

TEST_CASE("learning and Byzantine runs agree across backends") {
  const auto topo = SystemTopology({SubNetwork::complete(0, 4), SubNetwork::complete(4, 4), SubNetwork::complete(8, 4)},
                                   {0, 4, 8}, 2, 1);
  const SignalModel model(3, 0, std::vector<LikelihoodTable>(12, peaked_table(3, 3, 0.6)));
  LearningOptions lo;
  lo.backend = Backend::kOpenMP;
  const auto sched = DropSchedule::reliable(topo.link_count(), 100);
  CHECK(run_learning(topo, model, sched, 100, 5).z == run_learning(topo, model, sched, 100, 5, lo).z);

  ByzantinePlan plan;
  plan.f_bound = 1;
  plan.strategies[5] = strategy::Random{-50, 50};
  ByzantineOptions so, po;
  so.c_set = po.c_set = {0, 1};
  po.backend = Backend::kOpenMP;
  const auto s = run_byzantine_learning(topo, model, plan, 300, 9, so);
  const auto p = run_byzantine_learning(topo, model, plan, 300, 9, po);
  for (std::size_t a = 0; a < 12; ++a) CHECK(s.final_state[a].r == p.final_state[a].r);
}
