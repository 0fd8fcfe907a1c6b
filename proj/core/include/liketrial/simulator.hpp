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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "liketrial/design.hpp"
#include "liketrial/random.hpp"
#include "liketrial/trial.hpp"

namespace liketrial {

struct NormalEffect {
  double mean = 0.0;
  double sd = 1.0;

  bool operator==(const NormalEffect&) const = default;
};

struct PointMassEffect {
  double theta = 0.0;

  bool operator==(const PointMassEffect&) const = default;
};

/// Distribution of true effects across simulated trials, in the same
/// standardized per-observation units as delta.
class EffectDistribution {
 public:
  /// Throws DomainError for a non-finite parameter or sd <= 0.
  EffectDistribution(NormalEffect normal);
  EffectDistribution(PointMassEffect point);

  const std::variant<NormalEffect, PointMassEffect>& kind() const noexcept { return kind_; }

  /// "normal(mean,sd)" or "point(theta)".
  std::string describe() const;
  /// Inverse of describe(). Throws DomainError on malformed text.
  static EffectDistribution parse(std::string_view text);

  bool operator==(const EffectDistribution&) const = default;

 private:
  std::variant<NormalEffect, PointMassEffect> kind_;
};

enum class OutcomeCategory : std::size_t {
  MisleadingEarly = 0,
  CorrectEarly,
  MisleadingMaxN,
  CorrectMaxN,
  NeutralUnclassified,
};

inline constexpr std::size_t kOutcomeCategoryCount = 5;
inline constexpr std::array<OutcomeCategory, kOutcomeCategoryCount> kAllOutcomeCategories = {
    OutcomeCategory::MisleadingEarly, OutcomeCategory::CorrectEarly,
    OutcomeCategory::MisleadingMaxN,  OutcomeCategory::CorrectMaxN,
    OutcomeCategory::NeutralUnclassified,
};

/// snake_case identifier, e.g. "misleading_early".
std::string_view to_string(OutcomeCategory category) noexcept;
std::optional<OutcomeCategory> parse_outcome_category(std::string_view text) noexcept;

struct SimulationConfig {
  TrialDesign design;
  EffectDistribution effect_dist;
  std::int64_t n_trials = 10'000;
  std::uint64_t master_seed = 1;

  /// Delta 0.5, z_crit 2.0, thresholds 20 / 0.05, theta_T ~ Normal(0, 1).
  static SimulationConfig reference(std::int64_t n_trials = 10'000, std::uint64_t seed = 1);

  bool operator==(const SimulationConfig&) const = default;
};

struct CategoryStats {
  std::int64_t count = 0;
  double incidence = 0.0;
  /// Mean of max(LR, 1/LR) over trials in the category; empty when count is 0.
  /// May be +inf if the mean overflows a double.
  std::optional<double> mean_folded_lr;

  bool operator==(const CategoryStats&) const = default;
};

struct SimulationSummary {
  SimulationConfig config;
  std::array<CategoryStats, kOutcomeCategoryCount> categories;
  double mean_n = 0.0;
  double misleading_total = 0.0;

  const CategoryStats& operator[](OutcomeCategory c) const {
    return categories[static_cast<std::size_t>(c)];
  }
  std::int64_t n_trials() const noexcept { return config.n_trials; }
  std::uint64_t master_seed() const noexcept { return config.master_seed; }

  bool operator==(const SimulationSummary&) const = default;
};

struct SweepPoint {
  double theta_t = 0.0;
  double mean_n = 0.0;
  double stop_early_rate = 0.0;
  std::int64_t replications = 0;

  bool operator==(const SweepPoint&) const = default;
};

struct ParallelOptions {
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned threads = 1;
};

double draw_true_effect(const EffectDistribution& effect_dist, RandomStream& stream);

/// Feeds unit-variance normal observations with mean theta_t through the
/// trial engine until it stops.
TrialResult simulate_trial(double theta_t, const TrialDesign& design, RandomStream& stream);

/// Misleading means the evidence points away from the true side of delta.
/// Early means the trial stopped on a threshold crossing.
OutcomeCategory classify(const TrialResult& result, double theta_t, double delta);

/// Trial i uses substream(master_seed, i): it draws theta_T, then its
/// observations. Output is identical for any thread count.
SimulationSummary run_batch(const SimulationConfig& config, ParallelOptions parallel = {});

/// One point per grid value; point i draws replication j from
/// substream(derive_seed(master_seed, i), j). Throws DomainError on an empty
/// grid, a non-finite grid value or replications < 1.
std::vector<SweepPoint> sweep_mean_n(std::span<const double> theta_grid, const TrialDesign& design,
                                     std::int64_t replications_per_point,
                                     std::uint64_t master_seed, ParallelOptions parallel = {});

/// Evenly spaced grid from `min` to `max` inclusive (within step / 1e6).
/// Throws DomainError if step <= 0 or max < min.
std::vector<double> make_grid(double min, double max, double step);

}  // namespace liketrial
