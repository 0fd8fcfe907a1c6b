// Copyright 2026 The liketrial Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace liketrial {

/// Argument outside the mathematical domain of a function (non-finite input,
/// non-positive standard error, probability at 0 or 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operation not permitted in the current trial state, e.g. adding an
/// observation after the trial has stopped.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct FieldError {
  std::string field;
  std::string message;

  bool operator==(const FieldError&) const = default;
};

/// Raised when a set of user-supplied parameters violates one or more
/// invariants. Every violated field is reported, not just the first.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<FieldError> errors);
  ValidationError(std::string field, std::string message);

  const std::vector<FieldError>& errors() const noexcept { return errors_; }

 private:
  std::vector<FieldError> errors_;
};

}  // namespace liketrial
