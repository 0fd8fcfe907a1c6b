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

// JSON wire format for the session API and the on-disk event log.
// Field names are snake_case. Every likelihood ratio is written as `log_lr`
// (authoritative, full precision) plus `lr` (display; null if it overflows).

#include "json.hpp"
#include "liketrial/design.hpp"
#include "liketrial/evidence.hpp"
#include "liketrial/service/session_store.hpp"
#include "liketrial/trial.hpp"

namespace liketrial::service {

nlohmann::json design_to_json(const TrialDesign& design);

/// Accepts {delta, lr_upper?, lr_lower?, z_crit?, label?}. Missing z_crit
/// defaults to `default_z_crit`. Type errors and invariant violations are
/// reported together as a ValidationError.
DesignParams design_params_from_json(const nlohmann::json& body, double default_z_crit);

/// Writes `lr` and `log_lr` into `out` under the given key prefix.
void put_lr(nlohmann::json& out, const LikelihoodRatio& lr, const std::string& prefix = "");

/// {n, theta_obs, se, log_lr, lr, status, ci_lower, ci_upper}; mean, se and CI
/// are null before the first observation.
nlohmann::json state_to_json(const TrialState& state);

nlohmann::json session_to_json(const SessionRecord& record, bool include_trajectory);

nlohmann::json summary_to_json(const SessionSummary& summary);

}  // namespace liketrial::service
