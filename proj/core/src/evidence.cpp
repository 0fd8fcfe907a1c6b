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

#include "liketrial/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "liketrial/errors.hpp"
#include "liketrial/normal.hpp"

namespace liketrial {
namespace {

// log(0.25)
constexpr double kLogQuarter = -2.0 * std::numbers::ln2;
const double kLogMinTail = std::log(Probability::kMinTail);

double standardize(double theta_obs, double delta, double se, const char* fn) {
  if (!std::isfinite(theta_obs) || !std::isfinite(delta) || !std::isfinite(se)) {
    throw DomainError(std::string(fn) + ": arguments must be finite");
  }
  if (!(se > 0.0)) {
    throw DomainError(std::string(fn) + ": se must be positive");
  }
  return (theta_obs - delta) / se;
}

// log(0.25) - log(p) - log(1 - p), floored at 0 (p - p^2 <= 0.25).
double log_lr_from_tails(double log_p, double log_q) {
  return std::max(0.0, kLogQuarter - log_p - log_q);
}

}  // namespace

Probability::Probability(double value) {
  if (!(value > 0.0 && value < 1.0)) {
    throw DomainError("Probability: value must lie in (0, 1)");
  }
  value_ = value;
  complement_ = 1.0 - value;
  log_value_ = std::log(value);
  log_complement_ = std::log1p(-value);
}

Probability Probability::from_log_tails(double log_value, double log_complement) {
  if (std::isnan(log_value) || std::isnan(log_complement)) {
    throw DomainError("Probability: NaN tail");
  }
  Probability p;
  p.log_value_ = std::min(std::max(log_value, kLogMinTail), 0.0);
  p.log_complement_ = std::min(std::max(log_complement, kLogMinTail), 0.0);
  p.value_ = std::exp(p.log_value_);
  p.complement_ = std::exp(p.log_complement_);
  return p;
}

LikelihoodRatio LikelihoodRatio::from_log(double log_value) {
  if (!std::isfinite(log_value)) {
    throw DomainError("LikelihoodRatio: log value must be finite");
  }
  return LikelihoodRatio(log_value);
}

LikelihoodRatio LikelihoodRatio::from_linear(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError("LikelihoodRatio: value must be finite and positive");
  }
  return LikelihoodRatio(std::log(value));
}

double LikelihoodRatio::value() const noexcept { return std::exp(log_value_); }

LikelihoodRatio LikelihoodRatio::folded() const noexcept {
  return LikelihoodRatio(std::fabs(log_value_));
}

StandardizedEffect::StandardizedEffect(double z_value) : z(z_value) {
  if (!std::isfinite(z_value)) {
    throw DomainError("StandardizedEffect: z must be finite");
  }
}

Probability one_sided_p(double theta_obs, double delta, double se) {
  const double z = standardize(theta_obs, delta, se, "one_sided_p");
  return Probability::from_log_tails(norm_sf_log(z), norm_sf_log(-z));
}

LikelihoodRatio lr_from_p(const Probability& p) {
  return LikelihoodRatio::from_log(log_lr_from_tails(p.log_value(), p.log_complement()));
}

LikelihoodRatio directional_lr(double theta_obs, double delta, double se) {
  const double z = standardize(theta_obs, delta, se, "directional_lr");
  if (z == 0.0) {
    return LikelihoodRatio();
  }
  const LikelihoodRatio magnitude = lr_from_p(one_sided_p(z, 0.0, 1.0));
  return z > 0.0 ? magnitude : magnitude.inverse();
}

LikelihoodRatio lr_from_z(StandardizedEffect z, double delta_std) {
  if (!std::isfinite(delta_std)) {
    throw DomainError("lr_from_z: delta_std must be finite");
  }
  const double shifted = z.z - delta_std;
  // log Phi(shifted) and log(1 - Phi(shifted)).
  const double log_cdf = std::max(norm_sf_log(-shifted), kLogMinTail);
  const double log_sf = std::max(norm_sf_log(shifted), kLogMinTail);
  return LikelihoodRatio::from_log(log_lr_from_tails(log_cdf, log_sf));
}

LikelihoodRatio supremum_glr(double theta_obs, double delta, double se) {
  const double z = standardize(theta_obs, delta, se, "supremum_glr");
  const double half_sq = 0.5 * z * z;
  if (z == 0.0) {
    return LikelihoodRatio();
  }
  return LikelihoodRatio::from_log(z > 0.0 ? half_sq : -half_sq);
}

double threshold_p(double lr) {
  if (!(lr > 1.0) || !std::isfinite(lr)) {
    throw DomainError("threshold_p: lr must be finite and > 1");
  }
  // Smaller root of p^2 - p + 1/(4 lr), in the cancellation-free form
  // (1 - sqrt(1 - 1/lr)) / 2 = (1 / (2 lr)) / (1 + sqrt(1 - 1/lr)).
  const double inv = 1.0 / lr;
  return 0.5 * inv / (1.0 + std::sqrt(1.0 - inv));
}

double threshold_z(double lr) { return -norm_quantile(threshold_p(lr)); }

}  // namespace liketrial
