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

#include "liketrial/errors.hpp"

#include <utility>

namespace liketrial {

ValidationError::ValidationError(std::vector<FieldError> errors)
    : std::invalid_argument([&] {
        std::string msg = "invalid parameters:";
        for (const auto& e : errors) {
          msg += " " + e.field + ": " + e.message + ";";
        }
        return msg;
      }()),
      errors_(std::move(errors)) {}

ValidationError::ValidationError(std::string field, std::string message)
    : ValidationError(std::vector<FieldError>{{std::move(field), std::move(message)}}) {}

}  // namespace liketrial
