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

#ifndef HFL_TRIMMED_HPP_
#define HFL_TRIMMED_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "hfl/topology.hpp"

namespace hfl {

struct Reported {
  double value = 0.0;
  AgentId sender = 0;
  friend bool operator==(const Reported&, const Reported&) = default;
};

/// Sorts by (value, sender) and drops the F smallest and F largest entries.
/// Throws TooFewValues when fewer than 2F + 1 values are given.
std::vector<Reported> trimmed_filter(std::span<const Reported> values, std::size_t f_bound);

/// Trimmed-mean consensus step plus innovation:
///   (sum of survivors + own_previous) / (|survivors| + 1) + innovation.
/// Throws TooFewNeighbors when fewer than 2F + 1 values arrive.
double trimmed_update(double own_previous, std::span<const Reported> incoming, double innovation,
                      std::size_t f_bound);

}  // namespace hfl

#endif  // HFL_TRIMMED_HPP_
