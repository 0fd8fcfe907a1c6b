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

#include "liketrial/design.hpp"

#include <cmath>
#include <string>

namespace liketrial {
namespace {

double checked_ratio(double delta, double z_crit, const char* fn) {
  if (!std::isfinite(delta) || !(delta > 0.0)) {
    throw DomainError(std::string(fn) + ": delta must be finite and positive");
  }
  if (!std::isfinite(z_crit) || !(z_crit > 0.0)) {
    throw DomainError(std::string(fn) + ": z_crit must be finite and positive");
  }
  return z_crit / delta;
}

std::int64_t checked_ceil(double n, const char* fn) {
  const double rounded = std::ceil(n);
  if (!(rounded <= static_cast<double>(kMaxSampleSizeLimit))) {
    throw DomainError(std::string(fn) + ": sample size exceeds " +
                      std::to_string(kMaxSampleSizeLimit));
  }
  return rounded < 1.0 ? 1 : static_cast<std::int64_t>(rounded);
}

}  // namespace

// (2r)^2 == 4 r^2 exactly in binary floating point, so n_max is exactly the
// ceiling of four times the unrounded minimum.
std::int64_t min_sample_size(double delta, double z_crit) {
  const double r = checked_ratio(delta, z_crit, "min_sample_size");
  return checked_ceil(r * r, "min_sample_size");
}

std::int64_t max_sample_size(double delta, double z_crit) {
  const double r = 2.0 * checked_ratio(delta, z_crit, "max_sample_size");
  return checked_ceil(r * r, "max_sample_size");
}

DesignParams DesignParams::reference(double delta) {
  DesignParams p;
  p.delta = delta;
  p.z_crit = kReferenceZCrit;
  return p;
}

std::vector<FieldError> validate(const DesignParams& params) {
  std::vector<FieldError> errors;
  const bool delta_ok = std::isfinite(params.delta) && params.delta > 0.0;
  const bool z_ok = std::isfinite(params.z_crit) && params.z_crit > 0.0;
  if (!delta_ok) {
    errors.push_back({"delta", "must be a finite number greater than 0"});
  }
  if (!(std::isfinite(params.lr_upper) && params.lr_upper > 1.0)) {
    errors.push_back({"lr_upper", "must be a finite number greater than 1"});
  }
  if (params.lr_lower &&
      !(std::isfinite(*params.lr_lower) && *params.lr_lower > 0.0 && *params.lr_lower < 1.0)) {
    errors.push_back({"lr_lower", "must lie strictly between 0 and 1"});
  }
  if (!z_ok) {
    errors.push_back({"z_crit", "must be a finite number greater than 0"});
  }
  if (delta_ok && z_ok) {
    const double r = 2.0 * params.z_crit / params.delta;
    if (!(std::ceil(r * r) <= static_cast<double>(kMaxSampleSizeLimit))) {
      errors.push_back({"delta", "maximum sample size exceeds " +
                                     std::to_string(kMaxSampleSizeLimit)});
    }
  }
  return errors;
}

TrialDesign::TrialDesign(const DesignParams& params) {
  if (auto errors = validate(params); !errors.empty()) {
    throw ValidationError(std::move(errors));
  }
  delta_ = params.delta;
  lr_upper_ = params.lr_upper;
  lr_lower_ = params.lr_lower.value_or(1.0 / params.lr_upper);
  z_crit_ = params.z_crit;
  n_min_ = min_sample_size(delta_, z_crit_);
  n_max_ = max_sample_size(delta_, z_crit_);
  label_ = params.label;
}

DesignParams TrialDesign::params() const {
  DesignParams p;
  p.delta = delta_;
  p.lr_upper = lr_upper_;
  p.lr_lower = lr_lower_;
  p.z_crit = z_crit_;
  p.label = label_;
  return p;
}

}  // namespace liketrial
