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
#include <string>
#include <vector>

#include "liketrial/errors.hpp"

namespace liketrial {

inline constexpr double kDefaultLrUpper = 20.0;
inline constexpr double kDefaultZCrit = 1.96;
/// Critical value under which n_max = 64 for delta = 0.5.
inline constexpr double kReferenceZCrit = 2.0;
/// Hard cap on derived sample sizes; designs needing more are rejected.
inline constexpr std::int64_t kMaxSampleSizeLimit = 1'000'000'000;

/// ceil((z_crit / delta)^2): the smallest n whose CI width 2 z_crit / sqrt(n)
/// does not exceed 2 delta. Throws DomainError on non-positive or non-finite
/// input, or when the result exceeds kMaxSampleSizeLimit.
std::int64_t min_sample_size(double delta, double z_crit);

/// ceil((2 z_crit / delta)^2): the smallest n whose CI width does not exceed
/// delta. Same error contract as min_sample_size.
std::int64_t max_sample_size(double delta, double z_crit);

/// Unvalidated user input for a TrialDesign.
struct DesignParams {
  double delta = 0.0;
  double lr_upper = kDefaultLrUpper;
  /// Defaults to 1 / lr_upper when unset.
  std::optional<double> lr_lower;
  double z_crit = kDefaultZCrit;
  std::string label;

  /// delta with z_crit = 2.0 and thresholds 20 / 0.05.
  static DesignParams reference(double delta = 0.5);
};

/// Every invariant violated by `params`, in field order. Empty when valid.
std::vector<FieldError> validate(const DesignParams& params);

/// The immutable contract of one trial. Construction validates and derives
/// n_min / n_max; an invalid design cannot exist.
class TrialDesign {
 public:
  /// Throws ValidationError listing each violated invariant.
  explicit TrialDesign(const DesignParams& params);

  double delta() const noexcept { return delta_; }
  double lr_upper() const noexcept { return lr_upper_; }
  double lr_lower() const noexcept { return lr_lower_; }
  double z_crit() const noexcept { return z_crit_; }
  std::int64_t n_min() const noexcept { return n_min_; }
  std::int64_t n_max() const noexcept { return n_max_; }
  const std::string& label() const noexcept { return label_; }

  DesignParams params() const;

  bool operator==(const TrialDesign&) const = default;

 private:
  double delta_;
  double lr_upper_;
  double lr_lower_;
  double z_crit_;
  std::int64_t n_min_;
  std::int64_t n_max_;
  std::string label_;
};

}  // namespace liketrial
