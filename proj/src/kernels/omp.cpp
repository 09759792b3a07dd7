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

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hfl/kernels.hpp"

namespace hfl::kernels::omp {

namespace {

// Exceptions must not escape an OpenMP region; keep the first and rethrow.
class FirstError {
 public:
  template <class F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
#pragma omp critical(hfl_first_error)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

}  // namespace

void pushsum_round(const SystemTopology& topology, std::span<AgentState> states, PushSumBuffers& buf,
                   const DropSchedule& schedule, std::size_t round) {
  const auto n = static_cast<std::ptrdiff_t>(states.size());
  FirstError err;
#pragma omp parallel
  {
#pragma omp for schedule(static)
    for (std::ptrdiff_t a = 0; a < n; ++a) err.run([&] { broadcast_for(topology, states, buf, a); });
#pragma omp for schedule(static)
    for (std::ptrdiff_t a = 0; a < n; ++a) err.run([&] { absorb_for(topology, states, buf, schedule, round, a); });
  }
  err.rethrow();
}

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  const auto rows = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) = 0.0;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
}

void pair_round(const PairRound& in, std::span<double> next) {
  const auto n = static_cast<std::ptrdiff_t>(in.agents.size());
  FirstError err;
#pragma omp parallel
  {
    std::vector<Reported> scratch;
#pragma omp for schedule(dynamic, 4)
    for (std::ptrdiff_t k = 0; k < n; ++k) err.run([&] { pair_agent(in, k, next, scratch); });
  }
  err.rethrow();
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace hfl::kernels::omp
