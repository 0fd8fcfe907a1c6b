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

#include "liketrial/trial.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "liketrial/errors.hpp"

namespace liketrial {

std::string_view to_string(TrialStatus status) noexcept {
  switch (status) {
    case TrialStatus::Collecting: return "Collecting";
    case TrialStatus::Continue: return "Continue";
    case TrialStatus::StoppedHigh: return "StoppedHigh";
    case TrialStatus::StoppedLow: return "StoppedLow";
    case TrialStatus::StoppedMaxN: return "StoppedMaxN";
  }
  return "?";
}

std::string_view to_string(StopKind kind) noexcept {
  switch (kind) {
    case StopKind::Continue: return "Continue";
    case StopKind::StopHigh: return "StopHigh";
    case StopKind::StopLow: return "StopLow";
    case StopKind::StopMaxN: return "StopMaxN";
  }
  return "?";
}

std::string_view to_string(EvidenceDirection direction) noexcept {
  switch (direction) {
    case EvidenceDirection::FavorsAboveDelta: return "FavorsAboveDelta";
    case EvidenceDirection::FavorsBelowDelta: return "FavorsBelowDelta";
    case EvidenceDirection::Neutral: return "Neutral";
  }
  return "?";
}

std::optional<TrialStatus> parse_trial_status(std::string_view text) noexcept {
  for (auto s : {TrialStatus::Collecting, TrialStatus::Continue, TrialStatus::StoppedHigh,
                 TrialStatus::StoppedLow, TrialStatus::StoppedMaxN}) {
    if (to_string(s) == text) {
      return s;
    }
  }
  return std::nullopt;
}

bool is_stopped(TrialStatus status) noexcept {
  return status == TrialStatus::StoppedHigh || status == TrialStatus::StoppedLow ||
         status == TrialStatus::StoppedMaxN;
}

double TrialState::se() const noexcept {
  if (n_ == 0) {
    return std::numeric_limits<double>::infinity();
  }
  return 1.0 / std::sqrt(static_cast<double>(n_));
}

TrialState new_trial(TrialDesign design) { return TrialState(std::move(design)); }

TrialState new_trial(const DesignParams& params) { return new_trial(TrialDesign(params)); }

TrialState add_observation(TrialState state, double x) {
  if (state.stopped()) {
    throw StateError("add_observation: trial already stopped (" +
                     std::string(to_string(state.status_)) + ")");
  }
  if (!std::isfinite(x)) {
    throw DomainError("add_observation: observation must be finite");
  }
  state.n_ += 1;
  state.sum_ += x;
  state.sum_sq_ += x * x;
  state.theta_obs_ = state.sum_ / static_cast<double>(state.n_);
  state.lr_ = directional_lr(state.theta_obs_, state.design_.delta(), state.se());

  switch (evaluate_stopping(state).kind) {
    case StopKind::StopHigh: state.status_ = TrialStatus::StoppedHigh; break;
    case StopKind::StopLow: state.status_ = TrialStatus::StoppedLow; break;
    case StopKind::StopMaxN: state.status_ = TrialStatus::StoppedMaxN; break;
    case StopKind::Continue:
      state.status_ =
          state.n_ < state.design_.n_min() ? TrialStatus::Collecting : TrialStatus::Continue;
      break;
  }
  return state;
}

StopDecision evaluate_stopping(const TrialState& state) {
  if (state.n() == 0) {
    throw StateError("evaluate_stopping: no observations yet");
  }
  const TrialDesign& design = state.design();
  const LikelihoodRatio lr = state.lr();
  StopDecision decision{StopKind::Continue, lr, state.n()};
  if (state.n() < design.n_min()) {
    return decision;
  }
  const double log_lr = lr.log_value();
  if (log_lr >= std::log(design.lr_upper())) {
    decision.kind = StopKind::StopHigh;
  } else if (log_lr <= std::log(design.lr_lower())) {
    decision.kind = StopKind::StopLow;
  } else if (state.n() >= design.n_max()) {
    decision.kind = StopKind::StopMaxN;
  }
  return decision;
}

ConfidenceInterval confidence_interval(const TrialState& state) {
  if (state.n() == 0) {
    throw StateError("confidence_interval: no observations yet");
  }
  const double half_width = state.design().z_crit() / std::sqrt(static_cast<double>(state.n()));
  return {state.theta_obs() - half_width, state.theta_obs() + half_width};
}

TrialResult finalize(const TrialState& state) {
  TrialResult result;
  switch (state.status()) {
    case TrialStatus::StoppedHigh: result.stop_reason = StopKind::StopHigh; break;
    case TrialStatus::StoppedLow: result.stop_reason = StopKind::StopLow; break;
    case TrialStatus::StoppedMaxN: result.stop_reason = StopKind::StopMaxN; break;
    default:
      throw StateError("finalize: trial has not stopped (" +
                       std::string(to_string(state.status())) + ")");
  }
  result.final_lr = state.lr();
  result.final_n = state.n();
  result.theta_obs_final = state.theta_obs();
  const double log_lr = state.lr().log_value();
  result.evidence_direction = log_lr > 0.0   ? EvidenceDirection::FavorsAboveDelta
                              : log_lr < 0.0 ? EvidenceDirection::FavorsBelowDelta
                                             : EvidenceDirection::Neutral;
  return result;
}

}  // namespace liketrial
