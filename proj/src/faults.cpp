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

#include "hfl/faults.hpp"

#include "hfl/error.hpp"

namespace hfl {

DropSchedule::DropSchedule(std::size_t links, std::size_t rounds, std::size_t window_b)
    : links_(links), rounds_(rounds), window_b_(window_b), up_(links * rounds, 1) {
  if (window_b_ < 1) throw InvalidArgument("window B must be >= 1");
}

DropSchedule DropSchedule::reliable(std::size_t links, std::size_t rounds, std::size_t window_b) {
  return DropSchedule(links, rounds, window_b);
}

bool DropSchedule::operational(std::size_t link, std::size_t round) const {
  if (round < 1 || round > rounds_ || link >= links_) {
    throw InvalidArgument("schedule query outside link/round range (round " + std::to_string(round) + ")");
  }
  return up_[(round - 1) * links_ + link] != 0;
}

void DropSchedule::set(std::size_t link, std::size_t round, bool up) {
  if (round < 1 || round > rounds_ || link >= links_) throw InvalidArgument("schedule write out of range");
  up_[(round - 1) * links_ + link] = up ? 1 : 0;
}

DropSchedule make_schedule(const SystemTopology& topology, double drop_prob, std::size_t rounds, Rng& rng,
                           ForcedPlacement placement) {
  if (!(drop_prob >= 0.0 && drop_prob < 1.0)) throw InvalidArgument("drop probability must lie in [0, 1)");
  const std::size_t links = topology.link_count();
  const std::size_t b = topology.window_b();
  DropSchedule s(links, rounds, b);
  // Round-major draw order keeps a schedule's prefix independent of its horizon.
  std::vector<std::size_t> since_delivery(links, 0);
  std::vector<std::size_t> forced_at(links, 0);
  if (placement == ForcedPlacement::kUniform) {
    for (std::size_t l = 0; l < links; ++l) forced_at[l] = 1 + rng.below(b);
  }
  for (std::size_t t = 1; t <= rounds; ++t) {
    for (std::size_t l = 0; l < links; ++l) {
      const bool dropped = rng.bernoulli(drop_prob);
      bool up = !dropped;
      if (placement == ForcedPlacement::kWindowEnd) {
        if (since_delivery[l] + 1 >= b) up = true;
        since_delivery[l] = up ? 0 : since_delivery[l] + 1;
      } else {
        if (t == forced_at[l]) up = true;
        if (up) forced_at[l] = t + 1 + rng.below(b);
      }
      s.set(l, t, up);
    }
  }
  return s;
}

bool is_b_bounded(const DropSchedule& schedule) {
  const std::size_t b = schedule.window_b();
  for (std::size_t l = 0; l < schedule.link_count(); ++l) {
    for (std::size_t start = 1; start + b - 1 <= schedule.rounds(); ++start) {
      bool any = false;
      for (std::size_t t = start; t < start + b && !any; ++t) any = schedule.operational(l, t);
      if (!any) return false;
    }
  }
  return true;
}

std::string strategy_name(const Strategy& s) {
  struct Namer {
    std::string operator()(const strategy::Constant&) const { return "constant"; }
    std::string operator()(const strategy::Negate&) const { return "negate"; }
    std::string operator()(const strategy::Amplify&) const { return "amplify"; }
    std::string operator()(const strategy::Random&) const { return "random"; }
    std::string operator()(const strategy::ColludeExtreme&) const { return "collude_extreme"; }
  };
  return std::visit(Namer{}, s);
}

std::vector<AgentId> ByzantinePlan::faulty() const {
  std::vector<AgentId> out;
  for (const auto& [a, _] : strategies) out.push_back(a);
  return out;
}

void ByzantinePlan::validate() const {
  if (strategies.size() > f_bound) {
    throw AssumptionViolation(std::to_string(strategies.size()) + " faulty agents exceed F = " +
                              std::to_string(f_bound));
  }
}

double forge(const ByzantinePlan& plan, AgentId sender, AgentId receiver, double honest_value, double honest_center,
             std::size_t round, Rng& rng) {
  (void)receiver;
  (void)round;
  const auto it = plan.strategies.find(sender);
  if (it == plan.strategies.end()) throw NotFaulty("agent " + std::to_string(sender) + " is not faulty");
  struct Forger {
    double honest;
    double center;
    Rng& rng;
    double operator()(const strategy::Constant& s) const { return s.value; }
    double operator()(const strategy::Negate&) const { return -honest; }
    double operator()(const strategy::Amplify& s) const { return s.kappa * honest; }
    double operator()(const strategy::Random& s) const { return rng.uniform(s.low, s.high); }
    double operator()(const strategy::ColludeExtreme& s) const {
      return center >= 0.0 ? -s.magnitude : s.magnitude;
    }
  };
  return std::visit(Forger{honest_value, honest_center, rng}, it->second);
}

}  // namespace hfl
