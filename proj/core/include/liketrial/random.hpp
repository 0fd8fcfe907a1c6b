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
#include <random>

namespace liketrial {

/// Mixes (master_seed, index) into an independent 64-bit seed (SplitMix64
/// finalizer over a Weyl-sequence offset). Pure function.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept;

/// A reproducible stream of uniforms and normal variates.
///
/// Normals are generated by inversion, so every variate consumes exactly one
/// 64-bit word; stream position is therefore a pure function of the number
/// of draws.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Stream number `index` under `master_seed`.
  static RandomStream substream(std::uint64_t master_seed, std::uint64_t index) {
    return RandomStream(derive_seed(master_seed, index));
  }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform_open() noexcept;

  /// Standard normal variate, norm_quantile(uniform_open()).
  double standard_normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace liketrial
