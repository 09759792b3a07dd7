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

#ifndef HFL_KERNELS_HPP_
#define HFL_KERNELS_HPP_

// Data-parallel inner loops of the simulator. Each kernel exists as a serial
// reference and an OpenMP version; both run the same per-item code, so their
// results agree bit for bit.

#include <cstddef>
#include <span>
#include <vector>

#include "hfl/faults.hpp"
#include "hfl/matrix.hpp"
#include "hfl/pushsum.hpp"
#include "hfl/trimmed.hpp"

namespace hfl::kernels {

// ---------------------------------------------------------------- per item

/// sigma+ = sigma + z / (d + 1) and the mass counterpart.
inline void broadcast_agent(const AgentState& s, std::size_t out_degree, double* sigma_plus, double& mass_plus) {
  const double div = static_cast<double>(out_degree + 1);
  for (std::size_t k = 0; k < s.dim(); ++k) sigma_plus[k] = s.sigma[k] + s.z[k] / div;
  mass_plus = s.sigma_tilde + s.m / div;
}

/// Recovery bookkeeping and both half-updates. `delivered(slot, sigma, mass)`
/// returns true and fills the sender's payload when that link delivered.
template <class Delivered>
void absorb_agent(AgentState& s, std::size_t out_degree, const double* own_sigma_plus, double own_mass_plus,
                  Delivered&& delivered) {
  const double div = static_cast<double>(out_degree + 1);
  const std::size_t dim = s.dim();
  for (std::size_t k = 0; k < dim; ++k) s.z[k] = s.z[k] / div;
  s.m = s.m / div;
  const double* sigma = nullptr;
  double mass = 0.0;
  for (std::size_t slot = 0; slot < s.in_senders.size(); ++slot) {
    if (!delivered(slot, sigma, mass)) continue;
    double* rho = s.rho.data() + slot * dim;
    for (std::size_t k = 0; k < dim; ++k) {
      s.z[k] += sigma[k] - rho[k];
      rho[k] = sigma[k];
    }
    s.m += mass - s.rho_tilde[slot];
    s.rho_tilde[slot] = mass;
  }
  // s.z, s.m now hold z+, m+.
  for (std::size_t k = 0; k < dim; ++k) s.sigma[k] = own_sigma_plus[k] + s.z[k] / div;
  s.sigma_tilde = own_mass_plus + s.m / div;
  for (std::size_t k = 0; k < dim; ++k) s.z[k] = s.z[k] / div;
  s.m = s.m / div;
}

struct PushSumBuffers {
  std::vector<double> sigma_plus;  // agent-major
  std::vector<double> mass_plus;
};

inline void broadcast_for(const SystemTopology& topology, std::span<const AgentState> states, PushSumBuffers& buf,
                          AgentId a) {
  const std::size_t dim = states[a].dim();
  broadcast_agent(states[a], topology.out_degree(a), buf.sigma_plus.data() + a * dim, buf.mass_plus[a]);
}

inline void absorb_for(const SystemTopology& topology, std::span<AgentState> states, const PushSumBuffers& buf,
                       const DropSchedule& schedule, std::size_t round, AgentId a) {
  const std::size_t dim = states[a].dim();
  const auto& in = topology.in_links(a);
  absorb_agent(states[a], topology.out_degree(a), buf.sigma_plus.data() + a * dim, buf.mass_plus[a],
               [&](std::size_t slot, const double*& sigma, double& mass) {
                 const std::size_t link = in[slot];
                 if (!schedule.operational(link, round)) return false;
                 const AgentId sender = topology.links()[link].from;
                 sigma = buf.sigma_plus.data() + sender * dim;
                 mass = buf.mass_plus[sender];
                 return true;
               });
}

/// Inputs for one round of all trimmed pairwise dynamics.
struct PairRound {
  std::size_t pairs = 0;
  std::size_t f_bound = 0;
  std::span<const AgentId> agents;          ///< agents that update this round
  std::span<const std::size_t> offsets;     ///< agents.size() + 1 message offsets
  std::span<const AgentId> senders;         ///< one per message
  std::span<const double> values;           ///< message-major, `pairs` values per message
  std::span<const double> previous;         ///< agent-major over every agent
  std::span<const double> innovation;       ///< agent-major over every agent
};

inline void pair_agent(const PairRound& in, std::size_t k, std::span<double> next, std::vector<Reported>& scratch) {
  const AgentId a = in.agents[k];
  const std::size_t lo = in.offsets[k], hi = in.offsets[k + 1];
  for (std::size_t p = 0; p < in.pairs; ++p) {
    scratch.clear();
    for (std::size_t msg = lo; msg < hi; ++msg) scratch.push_back({in.values[msg * in.pairs + p], in.senders[msg]});
    next[a * in.pairs + p] =
        trimmed_update(in.previous[a * in.pairs + p], scratch, in.innovation[a * in.pairs + p], in.f_bound);
  }
}

// ---------------------------------------------------------------- backends

namespace serial {
void pushsum_round(const SystemTopology& topology, std::span<AgentState> states, PushSumBuffers& buf,
                   const DropSchedule& schedule, std::size_t round);
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
void pair_round(const PairRound& in, std::span<double> next);
}  // namespace serial

namespace omp {
void pushsum_round(const SystemTopology& topology, std::span<AgentState> states, PushSumBuffers& buf,
                   const DropSchedule& schedule, std::size_t round);
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
void pair_round(const PairRound& in, std::span<double> next);
/// Threads OpenMP would use; 1 when built without OpenMP.
int max_threads();
}  // namespace omp

void pushsum_round(Backend backend, const SystemTopology& topology, std::span<AgentState> states,
                   PushSumBuffers& buf, const DropSchedule& schedule, std::size_t round);
Matrix matmul(Backend backend, const Matrix& a, const Matrix& b);
void pair_round(Backend backend, const PairRound& in, std::span<double> next);

}  // namespace hfl::kernels

#endif  // HFL_KERNELS_HPP_
