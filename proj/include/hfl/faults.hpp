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

#ifndef HFL_FAULTS_HPP_
#define HFL_FAULTS_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "hfl/rng.hpp"
#include "hfl/topology.hpp"

namespace hfl {

/// Precomputed link-operational indicators for rounds 1..rounds.
class DropSchedule {
 public:
  DropSchedule() = default;
  DropSchedule(std::size_t links, std::size_t rounds, std::size_t window_b);

  /// Every link delivers in every round.
  static DropSchedule reliable(std::size_t links, std::size_t rounds, std::size_t window_b = 1);

  std::size_t link_count() const noexcept { return links_; }
  std::size_t rounds() const noexcept { return rounds_; }
  std::size_t window_b() const noexcept { return window_b_; }
  bool operational(std::size_t link, std::size_t round) const;
  void set(std::size_t link, std::size_t round, bool up);

 private:
  std::size_t links_ = 0;
  std::size_t rounds_ = 0;
  std::size_t window_b_ = 1;
  std::vector<std::uint8_t> up_;  // round-major, rounds 1..rounds
};

enum class ForcedPlacement {
  kWindowEnd,  ///< force delivery after B-1 consecutive drops
  kUniform,    ///< force delivery at a uniformly chosen round of the window after the last delivery
};

/// I.i.d. Bernoulli(drop_prob) drops, overridden so that every link is
/// operational at least once in every B consecutive rounds.
DropSchedule make_schedule(const SystemTopology& topology, double drop_prob, std::size_t rounds, Rng& rng,
                           ForcedPlacement placement = ForcedPlacement::kWindowEnd);

/// True iff every link is operational at least once in every window of B consecutive rounds.
bool is_b_bounded(const DropSchedule& schedule);

namespace strategy {
struct Constant {
  double value = 0.0;
};
struct Negate {};
struct Amplify {
  double kappa = 1.0;
};
struct Random {
  double low = -1.0;
  double high = 1.0;
};
struct ColludeExtreme {
  double magnitude = 1e6;
};
}  // namespace strategy

using Strategy =
    std::variant<strategy::Constant, strategy::Negate, strategy::Amplify, strategy::Random, strategy::ColludeExtreme>;

/// Config-facing strategy name: constant, negate, amplify, random, collude_extreme.
std::string strategy_name(const Strategy& s);

struct ByzantinePlan {
  std::size_t f_bound = 0;
  std::map<AgentId, Strategy> strategies;  ///< keys form the faulty set A

  bool is_faulty(AgentId a) const { return strategies.count(a) != 0; }
  std::vector<AgentId> faulty() const;
  void validate() const;
};

/// Receiver id used when the parameter server queries a faulty representative.
inline constexpr AgentId kParameterServer = static_cast<AgentId>(-1);

/// Value a faulty sender reports to `receiver`. `honest_value` is what an
/// honest sender would have reported; `honest_center` is the current mean of
/// the honest agents' values, which colluding agents push against.
double forge(const ByzantinePlan& plan, AgentId sender, AgentId receiver, double honest_value, double honest_center,
             std::size_t round, Rng& rng);

}  // namespace hfl

#endif  // HFL_FAULTS_HPP_
