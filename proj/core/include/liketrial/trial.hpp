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

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>

#include "liketrial/design.hpp"
#include "liketrial/evidence.hpp"

namespace liketrial {

enum class TrialStatus { Collecting, Continue, StoppedHigh, StoppedLow, StoppedMaxN };

enum class StopKind { Continue, StopHigh, StopLow, StopMaxN };

enum class EvidenceDirection { FavorsAboveDelta, FavorsBelowDelta, Neutral };

std::string_view to_string(TrialStatus status) noexcept;
std::string_view to_string(StopKind kind) noexcept;
std::string_view to_string(EvidenceDirection direction) noexcept;
std::optional<TrialStatus> parse_trial_status(std::string_view text) noexcept;

bool is_stopped(TrialStatus status) noexcept;

struct StopDecision {
  StopKind kind = StopKind::Continue;
  LikelihoodRatio lr;
  std::int64_t n = 0;

  bool operator==(const StopDecision&) const = default;
};

struct ConfidenceInterval {
  double lower;
  double upper;

  double width() const noexcept { return upper - lower; }
  bool operator==(const ConfidenceInterval&) const = default;
};

/// Running state of one sequential trial under the known unit-variance model:
/// each observation is one standardized draw, theta_obs is the running mean
/// and se = 1 / sqrt(n).
///
/// A value type. `add_observation` returns the successor state; a state never
/// leaves a Stopped* status.
class TrialState {
 public:
  const TrialDesign& design() const noexcept { return design_; }
  std::int64_t n() const noexcept { return n_; }
  double sum() const noexcept { return sum_; }
  double sum_sq() const noexcept { return sum_sq_; }
  /// Running mean; 0 when n == 0.
  double theta_obs() const noexcept { return theta_obs_; }
  /// 1 / sqrt(n); +inf when n == 0.
  double se() const noexcept;
  /// Directional LR at the current mean; 1 when n == 0.
  LikelihoodRatio lr() const noexcept { return lr_; }
  TrialStatus status() const noexcept { return status_; }
  bool stopped() const noexcept { return is_stopped(status_); }

  bool operator==(const TrialState&) const = default;

 private:
  explicit TrialState(TrialDesign design) : design_(std::move(design)) {}

  friend TrialState new_trial(TrialDesign design);
  friend TrialState add_observation(TrialState state, double x);

  TrialDesign design_;
  std::int64_t n_ = 0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  double theta_obs_ = 0.0;
  LikelihoodRatio lr_;
  TrialStatus status_ = TrialStatus::Collecting;
};

/// Terminal snapshot of a stopped trial.
struct TrialResult {
  LikelihoodRatio final_lr;
  std::int64_t final_n = 0;
  double theta_obs_final = 0.0;
  StopKind stop_reason = StopKind::Continue;
  EvidenceDirection evidence_direction = EvidenceDirection::Neutral;

  bool operator==(const TrialResult&) const = default;
};

/// Empty trial in the Collecting state.
TrialState new_trial(TrialDesign design);

/// Validates `params` (ValidationError) and starts a trial.
TrialState new_trial(const DesignParams& params);

/// Appends one observation and re-evaluates the stopping rule.
/// Throws DomainError for non-finite x and StateError once stopped.
TrialState add_observation(TrialState state, double x);

/// Stopping rule. Never stops below n_min. From n_min on, stops high when
/// LR >= lr_upper and low when LR <= lr_lower; otherwise stops at n_max.
/// Throws StateError when n == 0.
StopDecision evaluate_stopping(const TrialState& state);

/// theta_obs +- z_crit / sqrt(n). Throws StateError when n == 0.
ConfidenceInterval confidence_interval(const TrialState& state);

/// Throws StateError unless the trial has stopped.
TrialResult finalize(const TrialState& state);

}  // namespace liketrial
