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

#include "liketrial/normal.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "liketrial/errors.hpp"

namespace liketrial {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kHalfLog2Pi = 0.91893853320467274178;

// Beyond this point erfc loses relative precision to gradual underflow and
// the continued fraction for the Mills ratio converges in a few dozen terms.
constexpr double kTailSwitch = 20.0;
constexpr int kMillsTerms = 64;

void require_finite(double x, const char* fn) {
  if (!std::isfinite(x)) {
    throw DomainError(std::string(fn) + ": argument must be finite");
  }
}

// Mills ratio (1 - Phi(x)) / phi(x) by backward evaluation of
//   1 / (x + 1 / (x + 2 / (x + 3 / (x + ...)))).
double mills_ratio(double x) {
  double tail = x;
  for (int k = kMillsTerms; k >= 1; --k) {
    tail = x + k / tail;
  }
  return 1.0 / tail;
}

template <std::size_t N>
double polyval(const std::array<double, N>& coeffs, double x) {
  double acc = coeffs[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) {
    acc = acc * x + coeffs[i];
  }
  return acc;
}

// Wichura (1988), algorithm AS 241 PPND16.
constexpr std::array<double, 8> kCentralNum = {
    3.3871328727963666080e0,  1.3314166789178437745e+2, 1.9715909503065514427e+3,
    1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
    3.3430575583588128105e+4, 2.5090809287301226727e+3};
constexpr std::array<double, 8> kCentralDen = {
    1.0,                      4.2313330701600911252e+1, 6.8718700749205790830e+2,
    5.3941960214247511077e+3, 2.1213794301586595867e+4, 3.9307895800092710610e+4,
    2.8729085735721942674e+4, 5.2264952788528545610e+3};
constexpr std::array<double, 8> kNearNum = {
    1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
    3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4};
constexpr std::array<double, 8> kNearDen = {
    1.0,                       2.05319162663775882187e0,  1.67638483018380384940e0,
    6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
    5.47593808499534494600e-4, 1.05075007164441684324e-9};
constexpr std::array<double, 8> kFarNum = {
    6.65790464350110377720e0,  5.46378491116411436990e0,  1.78482653991729133580e0,
    2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr std::array<double, 8> kFarDen = {
    1.0,                       5.99832206555887937690e-1, 1.36929880922735805310e-1,
    1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
    1.42151175831644588870e-7, 2.04426310338993978564e-15};

}  // namespace

double norm_cdf(double x) {
  require_finite(x, "norm_cdf");
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double norm_sf_log(double x) {
  require_finite(x, "norm_sf_log");
  if (x <= 0.0) {
    // 1 - Phi(x) = 1 - Phi(-|x|), and Phi(-|x|) <= 0.5 is computed without
    // cancellation.
    return std::log1p(-0.5 * std::erfc(-x * kInvSqrt2));
  }
  if (x < kTailSwitch) {
    return std::log(0.5 * std::erfc(x * kInvSqrt2));
  }
  return -0.5 * x * x - kHalfLog2Pi + std::log(mills_ratio(x));
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("norm_quantile: p must lie in (0, 1)");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * polyval(kCentralNum, r) / polyval(kCentralDen, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = polyval(kNearNum, r) / polyval(kNearDen, r);
  } else {
    r -= 5.0;
    value = polyval(kFarNum, r) / polyval(kFarDen, r);
  }
  return q < 0.0 ? -value : value;
}

}  // namespace liketrial
