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

#include "hfl/error.hpp"
#include "hfl/kernels.hpp"

namespace hfl::kernels {

namespace serial {

void pushsum_round(const SystemTopology& topology, std::span<AgentState> states, PushSumBuffers& buf,
                   const DropSchedule& schedule, std::size_t round) {
  const std::size_t n = states.size();
  for (std::size_t a = 0; a < n; ++a) broadcast_for(topology, states, buf, a);
  for (std::size_t a = 0; a < n; ++a) absorb_for(topology, states, buf, schedule, round, a);
}

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) = 0.0;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
}

void pair_round(const PairRound& in, std::span<double> next) {
  std::vector<Reported> scratch;
  for (std::size_t k = 0; k < in.agents.size(); ++k) pair_agent(in, k, next, scratch);
}

}  // namespace serial

void pushsum_round(Backend backend, const SystemTopology& topology, std::span<AgentState> states,
                   PushSumBuffers& buf, const DropSchedule& schedule, std::size_t round) {
  if (backend == Backend::kOpenMP) {
    omp::pushsum_round(topology, states, buf, schedule, round);
  } else {
    serial::pushsum_round(topology, states, buf, schedule, round);
  }
}

Matrix matmul(Backend backend, const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matrix shapes do not conform");
  Matrix out(a.rows(), b.cols());
  if (backend == Backend::kOpenMP) {
    omp::matmul(a, b, out);
  } else {
    serial::matmul(a, b, out);
  }
  return out;
}

void pair_round(Backend backend, const PairRound& in, std::span<double> next) {
  if (backend == Backend::kOpenMP) {
    omp::pair_round(in, next);
  } else {
    serial::pair_round(in, next);
  }
}

}  // namespace hfl::kernels
