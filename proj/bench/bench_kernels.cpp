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

// Serial reference kernels against their OpenMP counterparts.

#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "hfl/faults.hpp"
#include "hfl/kernels.hpp"
#include "hfl/pushsum.hpp"
#include "hfl/rng.hpp"

using namespace hfl;

namespace {

constexpr std::size_t kScheduleRounds = 1000;

Backend backend_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Backend::kSerial : Backend::kOpenMP;
}

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "openmp"); }

// Eight bidirectional rings of `per` agents each.
SystemTopology rings(std::size_t per) {
  std::vector<SubNetwork> nets;
  std::vector<AgentId> des;
  for (AgentId i = 0; i < 8; ++i) {
    nets.push_back(SubNetwork::ring(i * per, per, true));
    des.push_back(i * per);
  }
  return SystemTopology(nets, des, 10, 2);
}

void BM_PushSumRound(benchmark::State& state) {
  const auto topo = rings(static_cast<std::size_t>(state.range(1)) / 8);
  Rng rng(1);
  const auto sched = make_schedule(topo, 0.3, kScheduleRounds, rng);
  std::vector<std::vector<double>> w(topo.agent_count(), std::vector<double>(4));
  for (auto& v : w)
    for (double& x : v) x = rng.uniform();
  auto engine = std::make_unique<HpsEngine>(topo, w, sched, backend_of(state));
  for (auto _ : state) {
    if (engine->round() == kScheduleRounds) {
      state.PauseTiming();
      engine = std::make_unique<HpsEngine>(topo, w, sched, backend_of(state));
      state.ResumeTiming();
    }
    engine->step();
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(topo.agent_count()));
  label(state);
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(1));
  Rng rng(2);
  Matrix a(n, n), b(n, n);
  for (double& v : a.data()) v = rng.uniform();
  for (double& v : b.data()) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::matmul(backend_of(state), a, b));
  label(state);
}

void BM_PairRound(benchmark::State& state) {
  // Complete graph, every agent hears every other; 4 hypotheses give 12 pairs.
  const auto n = static_cast<std::size_t>(state.range(1));
  const std::size_t pairs = 12;
  Rng rng(3);
  std::vector<AgentId> agents(n), senders;
  std::vector<std::size_t> offsets{0};
  std::vector<double> values, previous(n * pairs), innovation(n * pairs), next(n * pairs);
  for (AgentId a = 0; a < n; ++a) {
    agents[a] = a;
    for (AgentId s = 0; s < n; ++s) {
      if (s == a) continue;
      senders.push_back(s);
      for (std::size_t p = 0; p < pairs; ++p) values.push_back(rng.uniform(-1, 1));
    }
    offsets.push_back(senders.size());
  }
  for (double& v : previous) v = rng.uniform(-1, 1);
  for (double& v : innovation) v = rng.uniform(-0.1, 0.1);
  kernels::PairRound in{pairs, 2, agents, offsets, senders, values, previous, innovation};
  for (auto _ : state) {
    kernels::pair_round(backend_of(state), in, next);
    benchmark::DoNotOptimize(next.data());
  }
  label(state);
}

}  // namespace

BENCHMARK(BM_PushSumRound)->ArgsProduct({{0, 1}, {80, 800, 8000}});
BENCHMARK(BM_Matmul)->ArgsProduct({{0, 1}, {64, 200, 400}});
BENCHMARK(BM_PairRound)->ArgsProduct({{0, 1}, {16, 64, 256}});

BENCHMARK_MAIN();
