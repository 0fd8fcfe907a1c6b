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

// Standard normal distribution primitives.
//
// Accuracy targets:
//   norm_cdf       absolute error <= 1e-12
//   norm_sf_log    absolute error <= 1e-10 in log space for |x| <= 40
//   norm_quantile  |norm_cdf(norm_quantile(p)) - p| <= 1e-9
//
// All functions throw DomainError on non-finite input.

namespace liketrial {

/// Phi(x), the standard normal CDF.
double norm_cdf(double x);

/// log(1 - Phi(x)), accurate deep into the upper tail where 1 - Phi(x)
/// underflows (x > ~38) and near 0 for very negative x.
double norm_sf_log(double x);

/// Inverse of Phi for p in the open interval (0, 1).
double norm_quantile(double p);

}  // namespace liketrial
