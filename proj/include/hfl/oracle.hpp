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


#ifndef HFL_ORACLE_HPP_
#define HFL_ORACLE_HPP_

// Verification machinery. Builds the per-round column-stochastic matrices of
// the augmented graph (one virtual vertex per link holding undelivered
// value), their transposed products, and closed-form bound evaluators.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hfl/faults.hpp"
#include "hfl/matrix.hpp"
#include "hfl/pushsum.hpp"
#include "hfl/topology.hpp"

namespace hfl {

/// Largest augmented system the dense oracle accepts.
inline constexpr std::size_t kMaxAugmentedSize = 200;

// Real agents occupy indices 0..N-1; link l gets virtual index N + l.
struct AugmentedSystem {
  std::size_t n_real = 0;
  std::size_t n_virtual = 0;
  std::size_t n_total = 0;
  std::vector<Edge> links;

  static AugmentedSystem of(const SystemTopology& topology);
  std::size_t virtual_index(std::size_t link) const { return n_real + link; }
  /// Throws InstanceTooLarge above `cap`.
  void check_size(std::size_t cap = kMaxAugmentedSize) const;
};

/// Doubly stochastic fusion matrix on the augmented index set.
Matrix fusion_matrix(const SystemTopology& topology);

/// M[t]: the round matrix, left-multiplied by the fusion matrix on fusion rounds.
/// With `fusion == false` the plain M-bar[t] is returned.
Matrix build_round_matrix(const SystemTopology& topology, const DropSchedule& schedule, std::size_t round,
                          bool fusion = true);

/// M[1..rounds], index 0 holds M[1].
std::vector<Matrix> round_matrices(const SystemTopology& topology, const DropSchedule& schedule,
                                   std::size_t rounds);

/// Psi(r, t) = M[r]^T M[r+1]^T ... M[t]^T; identity when r = t + 1.
Matrix psi_product(std::span<const Matrix> rounds, std::size_t r, std::size_t t, Backend backend = Backend::kSerial);
Matrix psi_product(const SystemTopology& topology, const DropSchedule& schedule, std::size_t r, std::size_t t);

struct ErgodicCoefficients {
  /// max_j max_{i1,i2} |a_{i1 j} - a_{i2 j}|
  double delta = 0.0;
  /// 1 - min_{i1,i2} sum_j min(a_{i1 j}, a_{i2 j})
  double lambda = 0.0;
};

/// Throws NotRowStochastic when a row sum is off by more than `tol`.
ErgodicCoefficients ergodic_coefficients(const Matrix& a, double tol = 1e-9);

/// (min beta)^(2 D* B) / (4 M^2), computed without forming gamma.
double contraction_gap(const GraphMetrics& metrics);

/// Every entry of Psi(r, t) with t - r + 1 >= 2 Gamma is at least this value.
double product_entry_bound(const GraphMetrics& metrics);

/// Consensus-error bound at round t >= 2 Gamma; throws HorizonTooSmall.
/// The input-norm sum runs over all N agents.
double consensus_rate_bound(const GraphMetrics& metrics, const std::vector<std::vector<double>>& inputs, std::size_t t);

struct LearningBound {
  double drift = 0.0;          ///< -(t / N) D_KL(theta* || theta)
  double noise = 0.0;          ///< L sqrt(2 t log(m / delta))
  double consensus = 0.0;      ///< geometric-series consensus term
  double consensus_exact = 0.0;  ///< same term with the floor/ceiling exponents kept
  double simplified() const { return drift + noise + consensus; }
  double exact() const { return drift + noise + consensus_exact; }
};

struct LearningBoundInputs {
  std::size_t agents = 0;
  std::size_t hypotheses = 0;
  double joint_kl = 0.0;  ///< sum over agents of D_KL(l_j(.|theta*) || l_j(.|theta))
  double l_bound = 0.0;
  double delta = 0.1;
};

/// Log-ratio bound for one theta != theta* at round t >= 2 Gamma; throws HorizonTooSmall.
LearningBound learning_rate_bound(const GraphMetrics& metrics, const LearningBoundInputs& in, std::size_t t);

/// Bound on |z-bar(theta, t) - z_j(theta, t) / m_j(t)|, valid for t >= 2 Gamma.
double consensus_term_bound(const GraphMetrics& metrics, std::size_t agents, double l_bound);

/// Real-agent accumulated values after `t` rounds of learning, rebuilt from the
/// per-round innovations as sum_r (M[t] ... M[r+1]) F_r L(r), where F_r is the
/// fusion matrix on fusion rounds and the identity otherwise.
/// innovations[r - 1][agent][theta]; the result is indexed [agent][theta].
std::vector<std::vector<double>> reconstruct_values(const SystemTopology& topology, std::span<const Matrix> rounds,
                                                    const std::vector<std::vector<std::vector<double>>>& innovations,
                                                    std::size_t t);

/// Real-agent masses after `t` rounds: (M[t] ... M[1]) applied to the initial masses.
std::vector<double> reconstruct_masses(const SystemTopology& topology, std::span<const Matrix> rounds,
                                       std::size_t t);

/// Dense row-major plain-text dump, one row per line.
void dump_matrix(std::ostream& os, const Matrix& m, const std::string& label);

}  // namespace hfl

#endif  // HFL_ORACLE_HPP_
