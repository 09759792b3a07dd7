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

#include "hfl/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "hfl/error.hpp"
#include "hfl/kernels.hpp"

namespace hfl {

AugmentedSystem AugmentedSystem::of(const SystemTopology& topology) {
  AugmentedSystem s;
  s.n_real = topology.agent_count();
  s.n_virtual = topology.link_count();
  s.n_total = s.n_real + s.n_virtual;
  s.links = topology.links();
  return s;
}

void AugmentedSystem::check_size(std::size_t cap) const {
  if (n_total > cap) {
    throw InstanceTooLarge("augmented system has " + std::to_string(n_total) + " vertices, oracle cap is " +
                           std::to_string(cap));
  }
}

Matrix fusion_matrix(const SystemTopology& topology) {
  const auto aug = AugmentedSystem::of(topology);
  aug.check_size();
  Matrix f = Matrix::identity(aug.n_total);
  const double m = static_cast<double>(topology.network_count());
  for (AgentId a : topology.designated_agents())
    for (AgentId b : topology.designated_agents()) f(a, b) = a == b ? (m + 1.0) / (2.0 * m) : 1.0 / (2.0 * m);
  return f;
}

Matrix build_round_matrix(const SystemTopology& topology, const DropSchedule& schedule, std::size_t round,
                          bool fusion) {
  if (round == 0) throw InvalidArgument("round matrices start at round 1");
  const auto aug = AugmentedSystem::of(topology);
  aug.check_size();
  Matrix mat(aug.n_total, aug.n_total, 0.0);
  auto share = [&](AgentId a) { return 1.0 / static_cast<double>(topology.out_degree(a) + 1); };

  for (AgentId j = 0; j < aug.n_real; ++j) mat(j, j) = share(j) * share(j);

  for (std::size_t l = 0; l < aug.n_virtual; ++l) {
    const auto [from, to] = aug.links[l];
    const std::size_t v = aug.virtual_index(l);
    const bool up = schedule.operational(l, round);
    // Receiver absorbs the backlog plus the sender's fresh share.
    if (up) {
      mat(to, from) += share(to) * share(from);
      mat(to, v) += share(to);
    }
    // Whatever the sender pushed into the link in its second half-update.
    mat(v, from) += share(from) * share(from) + (up ? 0.0 : share(from));
    for (std::size_t k : topology.in_links(from)) {
      if (!schedule.operational(k, round)) continue;
      const AgentId src = aug.links[k].from;
      mat(v, src) += share(src) * share(from);
      mat(v, aug.virtual_index(k)) += share(from);
    }
    if (!up) mat(v, v) += 1.0;
  }

  if (fusion && round % topology.gamma() == 0) return kernels::matmul(Backend::kSerial, fusion_matrix(topology), mat);
  return mat;
}

std::vector<Matrix> round_matrices(const SystemTopology& topology, const DropSchedule& schedule,
                                   std::size_t rounds) {
  std::vector<Matrix> out;
  out.reserve(rounds);
  for (std::size_t t = 1; t <= rounds; ++t) out.push_back(build_round_matrix(topology, schedule, t));
  return out;
}

Matrix psi_product(std::span<const Matrix> rounds, std::size_t r, std::size_t t, Backend backend) {
  if (r == 0 || r > t + 1 || t > rounds.size()) throw InvalidArgument("psi_product needs 1 <= r <= t + 1 <= T + 1");
  const std::size_t n = rounds.empty() ? 0 : rounds.front().rows();
  Matrix acc = Matrix::identity(n);
  // (M[t] ... M[r])^T built left to right as M[r]^T M[r+1]^T ...
  for (std::size_t tau = r; tau <= t; ++tau) acc = kernels::matmul(backend, acc, rounds[tau - 1].transpose());
  return acc;
}

Matrix psi_product(const SystemTopology& topology, const DropSchedule& schedule, std::size_t r, std::size_t t) {
  if (r == 0 || r > t + 1) throw InvalidArgument("psi_product needs 1 <= r <= t + 1");
  std::vector<Matrix> mats;
  for (std::size_t tau = r; tau <= t; ++tau) mats.push_back(build_round_matrix(topology, schedule, tau));
  if (mats.empty()) return Matrix::identity(AugmentedSystem::of(topology).n_total);
  Matrix acc = mats.front().transpose();
  for (std::size_t i = 1; i < mats.size(); ++i) acc = kernels::matmul(Backend::kSerial, acc, mats[i].transpose());
  return acc;
}

ErgodicCoefficients ergodic_coefficients(const Matrix& a, double tol) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double v : a.row(i)) s += v;
    if (std::abs(s - 1.0) > tol) {
      throw NotRowStochastic("row " + std::to_string(i) + " sums to " + std::to_string(s));
    }
  }
  ErgodicCoefficients out;
  double min_overlap = 1.0;
  for (std::size_t i1 = 0; i1 < a.rows(); ++i1) {
    for (std::size_t i2 = i1 + 1; i2 < a.rows(); ++i2) {
      double overlap = 0.0;
      for (std::size_t j = 0; j < a.cols(); ++j) {
        out.delta = std::max(out.delta, std::abs(a(i1, j) - a(i2, j)));
        overlap += std::min(a(i1, j), a(i2, j));
      }
      min_overlap = std::min(min_overlap, overlap);
    }
  }
  out.lambda = std::clamp(1.0 - min_overlap, 0.0, 1.0);
  out.delta = std::min(out.delta, 1.0);
  return out;
}

namespace {

double beta_power(const GraphMetrics& metrics) {
  return std::pow(metrics.min_beta, 2.0 * static_cast<double>(metrics.d_star * metrics.window_b));
}

void require_horizon(const GraphMetrics& metrics, std::size_t t) {
  if (t < 2 * metrics.fusion_period) {
    throw HorizonTooSmall("bound needs t >= 2 Gamma = " + std::to_string(2 * metrics.fusion_period) + ", got " +
                          std::to_string(t));
  }
}

}  // namespace

double contraction_gap(const GraphMetrics& metrics) {
  const double m = static_cast<double>(metrics.networks);
  return beta_power(metrics) / (4.0 * m * m);
}

double product_entry_bound(const GraphMetrics& metrics) { return contraction_gap(metrics); }

double consensus_rate_bound(const GraphMetrics& metrics, const std::vector<std::vector<double>>& inputs, std::size_t t) {
  require_horizon(metrics, t);
  double norms = 0.0;
  for (const auto& w : inputs) norms += euclidean_norm(w);
  const double m = static_cast<double>(metrics.networks);
  const double n = static_cast<double>(inputs.size());
  const double prefactor = 4.0 * m * m * norms / (beta_power(metrics) * n);
  const double exponent = static_cast<double>(t / (2 * metrics.fusion_period)) - 1.0;
  // log1p keeps gamma^k meaningful when the gap is below machine epsilon.
  return prefactor * std::exp(exponent * std::log1p(-contraction_gap(metrics)));
}

double consensus_term_bound(const GraphMetrics& metrics, std::size_t agents, double l_bound) {
  const double m = static_cast<double>(metrics.networks);
  const double log_root = std::log1p(-contraction_gap(metrics)) / (2.0 * static_cast<double>(metrics.fusion_period));
  const double root = std::exp(log_root);    // gamma^(1/2Gamma)
  const double one_minus = -std::expm1(log_root);
  return 4.0 * m * m * l_bound * root / (static_cast<double>(agents) * one_minus * beta_power(metrics));
}

LearningBound learning_rate_bound(const GraphMetrics& metrics, const LearningBoundInputs& in, std::size_t t) {
  require_horizon(metrics, t);
  if (in.agents == 0 || in.hypotheses < 2 || !(in.delta > 0.0 && in.delta < 1.0)) {
    throw InvalidArgument("learning_rate_bound needs N >= 1, m >= 2 and delta in (0, 1)");
  }
  LearningBound b;
  const double td = static_cast<double>(t);
  const double n = static_cast<double>(in.agents);
  b.drift = -(td / n) * in.joint_kl;
  b.noise = in.l_bound * std::sqrt(2.0 * td * std::log(static_cast<double>(in.hypotheses) / in.delta));
  b.consensus = 2.0 * consensus_term_bound(metrics, in.agents, in.l_bound);

  // sum_{r=1}^t gamma^max(0, floor(t/P) - ceil(r/P)), grouped by k = ceil(r/P).
  const std::size_t period = 2 * metrics.fusion_period;
  const double log_gamma = std::log1p(-contraction_gap(metrics));
  const std::size_t tf = t / period;
  const std::size_t blocks = (t + period - 1) / period;
  double series = 0.0;
  for (std::size_t k = 1; k <= blocks; ++k) {
    const std::size_t count = std::min(t, k * period) - (k - 1) * period;
    const double e = tf > k ? static_cast<double>(tf - k) : 0.0;
    series += static_cast<double>(count) * std::exp(e * log_gamma);
  }
  const double m = static_cast<double>(metrics.networks);
  b.consensus_exact = 8.0 * m * m * in.l_bound * series / (n * beta_power(metrics));
  return b;
}

std::vector<std::vector<double>> reconstruct_values(const SystemTopology& topology, std::span<const Matrix> rounds,
                                                    const std::vector<std::vector<std::vector<double>>>& innovations,
                                                    std::size_t t) {
  if (t > rounds.size() || t > innovations.size()) throw InvalidArgument("reconstruction horizon exceeds data");
  const auto aug = AugmentedSystem::of(topology);
  const std::size_t dim = t == 0 ? 0 : innovations.front().front().size();
  const Matrix fusion = fusion_matrix(topology);
  std::vector<std::vector<double>> z(aug.n_real, std::vector<double>(dim, 0.0));
  // suffix = M[t] ... M[r+1], grown backwards from the identity.
  Matrix suffix = Matrix::identity(aug.n_total);
  for (std::size_t r = t; r >= 1; --r) {
    const Matrix& into = r % topology.gamma() == 0 ? kernels::matmul(Backend::kSerial, suffix, fusion) : suffix;
    for (std::size_t c = 0; c < dim; ++c) {
      std::vector<double> l(aug.n_total, 0.0);
      for (AgentId a = 0; a < aug.n_real; ++a) l[a] = innovations[r - 1][a][c];
      const auto y = into.apply(l);
      for (AgentId a = 0; a < aug.n_real; ++a) z[a][c] += y[a];
    }
    suffix = kernels::matmul(Backend::kSerial, suffix, rounds[r - 1]);
  }
  return z;
}

std::vector<double> reconstruct_masses(const SystemTopology& topology, std::span<const Matrix> rounds,
                                       std::size_t t) {
  if (t > rounds.size()) throw InvalidArgument("reconstruction horizon exceeds data");
  const auto aug = AugmentedSystem::of(topology);
  std::vector<double> x(aug.n_total, 0.0);
  std::fill(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(aug.n_real), 1.0);
  for (std::size_t r = 1; r <= t; ++r) x = rounds[r - 1].apply(x);
  x.resize(aug.n_real);
  return x;
}

void dump_matrix(std::ostream& os, const Matrix& m, const std::string& label) {
  os << "# " << label << ' ' << m.rows() << 'x' << m.cols() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof buf, m(i, j));
      if (j) os << ' ';
      os.write(buf, res.ptr - buf);
    }
    os << '\n';
  }
}

}  // namespace hfl
