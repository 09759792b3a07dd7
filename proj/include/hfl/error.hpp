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

#ifndef HFL_ERROR_HPP_
#define HFL_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hfl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HFL_DEFINE_ERROR(Name)           \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

HFL_DEFINE_ERROR(InvalidArgument);
HFL_DEFINE_ERROR(ExplosionGuard);
HFL_DEFINE_ERROR(ToleranceViolation);
HFL_DEFINE_ERROR(SupportMismatch);
HFL_DEFINE_ERROR(UnknownLink);
HFL_DEFINE_ERROR(MissingDesignated);
HFL_DEFINE_ERROR(NotFaulty);
HFL_DEFINE_ERROR(NonpositiveMass);
HFL_DEFINE_ERROR(IdentifiabilityFailure);
HFL_DEFINE_ERROR(TooFewValues);
HFL_DEFINE_ERROR(TooFewNeighbors);
HFL_DEFINE_ERROR(AssumptionViolation);
HFL_DEFINE_ERROR(NotRowStochastic);
HFL_DEFINE_ERROR(HorizonTooSmall);
HFL_DEFINE_ERROR(InstanceTooLarge);

#undef HFL_DEFINE_ERROR

class NotStronglyConnected : public Error {
 public:
  explicit NotStronglyConnected(std::size_t network)
      : Error("sub-network " + std::to_string(network) + " is not strongly connected"),
        network_(network) {}
  std::size_t network() const noexcept { return network_; }

 private:
  std::size_t network_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Carries every violation found, not only the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid configuration:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

}  // namespace hfl

#endif  // HFL_ERROR_HPP_
