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

#include <compare>

namespace liketrial {

/// A probability strictly inside (0, 1).
///
/// Both tails are carried in log space so that a p-value computed from a
/// tail-accurate survival function keeps full relative precision on either
/// side. `value()` and `complement()` materialize the linear values.
class Probability {
 public:
  /// Smallest tail mass either side may carry. Anything below is clamped.
  static constexpr double kMinTail = 1e-300;

  /// Throws DomainError unless 0 < value < 1.
  explicit Probability(double value);

  /// Builds from log(p) and log(1 - p), clamping the smaller tail to
  /// kMinTail. Throws DomainError on NaN.
  static Probability from_log_tails(double log_value, double log_complement);

  double value() const noexcept { return value_; }
  double complement() const noexcept { return complement_; }
  double log_value() const noexcept { return log_value_; }
  double log_complement() const noexcept { return log_complement_; }

 private:
  Probability() = default;

  double value_ = 0.5;
  double complement_ = 0.5;
  double log_value_ = 0.0;
  double log_complement_ = 0.0;
};

/// A likelihood ratio stored as its natural log.
class LikelihoodRatio {
 public:
  /// LR = 1.
  constexpr LikelihoodRatio() = default;

  /// Throws DomainError if log_value is not finite.
  static LikelihoodRatio from_log(double log_value);
  /// Throws DomainError unless value is finite and > 0.
  static LikelihoodRatio from_linear(double value);

  double log_value() const noexcept { return log_value_; }
  /// exp(log_value); may overflow to +inf or underflow to 0 for extreme
  /// evidence. Use only for presentation.
  double value() const noexcept;

  LikelihoodRatio inverse() const noexcept { return LikelihoodRatio(-log_value_); }
  /// max(LR, 1/LR).
  LikelihoodRatio folded() const noexcept;

  bool operator==(const LikelihoodRatio&) const = default;
  auto operator<=>(const LikelihoodRatio&) const = default;

 private:
  constexpr explicit LikelihoodRatio(double log_value) : log_value_(log_value) {}

  double log_value_ = 0.0;
};

/// Effect size in standard-error units.
struct StandardizedEffect {
  /// Throws DomainError if z is not finite.
  explicit StandardizedEffect(double z);

  double z;
};

/// Upper-tail p-value 1 - Phi((theta_obs - delta) / se) against the dividing
/// hypothesis theta = delta. Throws DomainError if se <= 0 or inputs are not
/// finite.
Probability one_sided_p(double theta_obs, double delta, double se);

/// LR = 0.25 / (p - p^2), evaluated as log(0.25) - log(p) - log(1 - p).
/// Always >= 1 and symmetric under p <-> 1 - p.
LikelihoodRatio lr_from_p(const Probability& p);

/// The directional LR: lr_from_p(one_sided_p(...)) when theta_obs > delta, its
/// inverse when theta_obs < delta and exactly 1 at equality. Measures evidence
/// that the true effect exceeds delta.
LikelihoodRatio directional_lr(double theta_obs, double delta, double se);

/// Retrospective LR from a standardized effect z:
///   0.25 / (Phi(z - delta_std) - Phi(z - delta_std)^2)
/// `delta_std` is delta in the same standard-error units as z. Undirected:
/// the caller applies the direction from the sign of z - delta_std.
LikelihoodRatio lr_from_z(StandardizedEffect z, double delta_std);

/// Generalized LR for the composite split at delta under a normal likelihood:
/// exp(+-z^2 / 2), signed like directional_lr. Diagnostic only; the stopping
/// rule uses directional_lr.
LikelihoodRatio supremum_glr(double theta_obs, double delta, double se);

/// One-sided p at which lr_from_p equals `lr` (> 1), i.e. the smaller root of
/// p^2 - p + 0.25 / lr = 0.
double threshold_p(double lr);

/// Standardized distance |theta_obs - delta| / se at which the directional LR
/// reaches `lr` (> 1).
double threshold_z(double lr);

}  // namespace liketrial
