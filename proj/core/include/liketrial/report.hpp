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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "liketrial/simulator.hpp"

namespace liketrial {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_exact(double value);

/// printf("%.*g") with `digits` significant figures.
std::string format_sig(double value, int digits = 4);

/// Human-readable outcome table: Result | Incidence (%) | Mean LR, one row
/// per outcome category (the neutral row only when non-empty), followed by
/// the overall mean sample size and misleading-evidence rate.
std::string summary_to_table(const SimulationSummary& summary);

/// Machine form. Two `#` metadata lines carry the configuration and overall
/// statistics, then `category,incidence,mean_folded_lr` rows for all five
/// categories and a final `summary,<misleading_total>,` row. Numbers use
/// format_exact so that summary_from_csv(summary_to_csv(s)) == s.
std::string summary_to_csv(const SimulationSummary& summary);

/// Throws DomainError on malformed input.
SimulationSummary summary_from_csv(std::string_view csv);

/// theta_T,mean_n,stop_early_rate,replications
std::string sweep_to_csv(std::span<const SweepPoint> points);

}  // namespace liketrial
