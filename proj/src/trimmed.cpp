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

#include "hfl/trimmed.hpp"

#include <algorithm>

#include "hfl/error.hpp"

namespace hfl {

std::vector<Reported> trimmed_filter(std::span<const Reported> values, std::size_t f_bound) {
  if (values.size() < 2 * f_bound + 1) {
    throw TooFewValues("trimming F=" + std::to_string(f_bound) + " needs at least " +
                       std::to_string(2 * f_bound + 1) + " values, got " + std::to_string(values.size()));
  }
  std::vector<Reported> sorted(values.begin(), values.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const Reported& a, const Reported& b) {
    return a.value < b.value || (a.value == b.value && a.sender < b.sender);
  });
  return {sorted.begin() + static_cast<std::ptrdiff_t>(f_bound),
          sorted.end() - static_cast<std::ptrdiff_t>(f_bound)};
}

double trimmed_update(double own_previous, std::span<const Reported> incoming, double innovation,
                      std::size_t f_bound) {
  if (incoming.size() < 2 * f_bound + 1) {
    throw TooFewNeighbors("agent needs at least " + std::to_string(2 * f_bound + 1) + " incoming values, got " +
                          std::to_string(incoming.size()));
  }
  const auto kept = trimmed_filter(incoming, f_bound);
  double sum = own_previous;
  for (const auto& r : kept) sum += r.value;
  return sum / static_cast<double>(kept.size() + 1) + innovation;
}

}  // namespace hfl
