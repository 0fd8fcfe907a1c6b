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

#include "liketrial/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "liketrial/errors.hpp"
#include "liketrial/report.hpp"

namespace liketrial {
namespace {

struct TrialOutcome {
  OutcomeCategory category = OutcomeCategory::NeutralUnclassified;
  std::int64_t n = 0;
  double log_folded_lr = 0.0;
  bool early = false;
};

unsigned resolve_threads(ParallelOptions parallel, std::int64_t work) {
  unsigned threads = parallel.threads;
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  return static_cast<unsigned>(std::min<std::int64_t>(threads, std::max<std::int64_t>(work, 1)));
}

// Runs fn(i) for i in [0, count) over contiguous chunks. fn must only write
// to slot i of its output, so the result does not depend on scheduling.
template <typename Fn>
void parallel_for(std::int64_t count, ParallelOptions parallel, Fn&& fn) {
  const unsigned threads = resolve_threads(parallel, count);
  if (threads <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    const std::int64_t chunk = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::int64_t begin = t * chunk;
      const std::int64_t end = std::min(count, begin + chunk);
      if (begin >= end) break;
      workers.emplace_back([&, begin, end] {
        try {
          for (std::int64_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

// log(mean(exp(values))) without overflow in the intermediate sum. Summation
// runs in index order.
double log_mean_exp(const std::vector<double>& values) {
  const double peak = *std::max_element(values.begin(), values.end());
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - peak);
  return peak + std::log(acc) - std::log(static_cast<double>(values.size()));
}

double parse_number(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DomainError("EffectDistribution: bad number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

EffectDistribution::EffectDistribution(NormalEffect normal) : kind_(normal) {
  if (!std::isfinite(normal.mean) || !std::isfinite(normal.sd) || !(normal.sd > 0.0)) {
    throw DomainError("EffectDistribution: normal needs a finite mean and sd > 0");
  }
}

EffectDistribution::EffectDistribution(PointMassEffect point) : kind_(point) {
  if (!std::isfinite(point.theta)) {
    throw DomainError("EffectDistribution: point mass must be finite");
  }
}

std::string EffectDistribution::describe() const {
  if (const auto* normal = std::get_if<NormalEffect>(&kind_)) {
    return "normal(" + format_exact(normal->mean) + "," + format_exact(normal->sd) + ")";
  }
  return "point(" + format_exact(std::get<PointMassEffect>(kind_).theta) + ")";
}

EffectDistribution EffectDistribution::parse(std::string_view text) {
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.empty() || text.back() != ')') {
    throw DomainError("EffectDistribution: expected normal(mean,sd) or point(theta)");
  }
  const std::string_view name = text.substr(0, open);
  const std::string_view args = text.substr(open + 1, text.size() - open - 2);
  if (name == "normal") {
    const auto comma = args.find(',');
    if (comma == std::string_view::npos) {
      throw DomainError("EffectDistribution: normal needs two arguments");
    }
    return NormalEffect{parse_number(args.substr(0, comma)), parse_number(args.substr(comma + 1))};
  }
  if (name == "point") {
    return PointMassEffect{parse_number(args)};
  }
  throw DomainError("EffectDistribution: unknown kind '" + std::string(name) + "'");
}

std::string_view to_string(OutcomeCategory category) noexcept {
  switch (category) {
    case OutcomeCategory::MisleadingEarly: return "misleading_early";
    case OutcomeCategory::CorrectEarly: return "correct_early";
    case OutcomeCategory::MisleadingMaxN: return "misleading_max_n";
    case OutcomeCategory::CorrectMaxN: return "correct_max_n";
    case OutcomeCategory::NeutralUnclassified: return "neutral_unclassified";
  }
  return "?";
}

std::optional<OutcomeCategory> parse_outcome_category(std::string_view text) noexcept {
  for (auto c : kAllOutcomeCategories) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

SimulationConfig SimulationConfig::reference(std::int64_t n_trials, std::uint64_t seed) {
  return SimulationConfig{TrialDesign(DesignParams::reference(0.5)), NormalEffect{0.0, 1.0},
                          n_trials, seed};
}

double draw_true_effect(const EffectDistribution& effect_dist, RandomStream& stream) {
  if (const auto* normal = std::get_if<NormalEffect>(&effect_dist.kind())) {
    return normal->mean + normal->sd * stream.standard_normal();
  }
  return std::get<PointMassEffect>(effect_dist.kind()).theta;
}

TrialResult simulate_trial(double theta_t, const TrialDesign& design, RandomStream& stream) {
  TrialState state = new_trial(design);
  while (!state.stopped()) {
    state = add_observation(std::move(state), theta_t + stream.standard_normal());
  }
  return finalize(state);
}

OutcomeCategory classify(const TrialResult& result, double theta_t, double delta) {
  if (theta_t == delta || result.evidence_direction == EvidenceDirection::Neutral) {
    return OutcomeCategory::NeutralUnclassified;
  }
  const bool truly_above = theta_t > delta;
  const bool favors_above = result.evidence_direction == EvidenceDirection::FavorsAboveDelta;
  const bool misleading = truly_above != favors_above;
  const bool early =
      result.stop_reason == StopKind::StopHigh || result.stop_reason == StopKind::StopLow;
  if (early) {
    return misleading ? OutcomeCategory::MisleadingEarly : OutcomeCategory::CorrectEarly;
  }
  return misleading ? OutcomeCategory::MisleadingMaxN : OutcomeCategory::CorrectMaxN;
}

SimulationSummary run_batch(const SimulationConfig& config, ParallelOptions parallel) {
  if (config.n_trials < 1) {
    throw DomainError("run_batch: n_trials must be at least 1");
  }
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(config.n_trials));
  parallel_for(config.n_trials, parallel, [&](std::int64_t i) {
    RandomStream stream = RandomStream::substream(config.master_seed, static_cast<std::uint64_t>(i));
    const double theta_t = draw_true_effect(config.effect_dist, stream);
    const TrialResult result = simulate_trial(theta_t, config.design, stream);
    auto& out = outcomes[static_cast<std::size_t>(i)];
    out.category = classify(result, theta_t, config.design.delta());
    out.n = result.final_n;
    out.log_folded_lr = result.final_lr.folded().log_value();
  });

  SimulationSummary summary{config, {}, 0.0, 0.0};
  std::array<std::vector<double>, kOutcomeCategoryCount> log_folded;
  std::int64_t total_n = 0;
  for (const auto& out : outcomes) {
    const auto c = static_cast<std::size_t>(out.category);
    summary.categories[c].count += 1;
    log_folded[c].push_back(out.log_folded_lr);
    total_n += out.n;
  }
  const auto trials = static_cast<double>(config.n_trials);
  for (std::size_t c = 0; c < kOutcomeCategoryCount; ++c) {
    auto& stats = summary.categories[c];
    stats.incidence = static_cast<double>(stats.count) / trials;
    if (stats.count > 0) {
      stats.mean_folded_lr = std::exp(log_mean_exp(log_folded[c]));
    }
  }
  summary.mean_n = static_cast<double>(total_n) / trials;
  summary.misleading_total =
      static_cast<double>(summary[OutcomeCategory::MisleadingEarly].count +
                          summary[OutcomeCategory::MisleadingMaxN].count) /
      trials;
  return summary;
}

std::vector<SweepPoint> sweep_mean_n(std::span<const double> theta_grid, const TrialDesign& design,
                                     std::int64_t replications_per_point,
                                     std::uint64_t master_seed, ParallelOptions parallel) {
  if (theta_grid.empty()) {
    throw DomainError("sweep_mean_n: empty grid");
  }
  if (replications_per_point < 1) {
    throw DomainError("sweep_mean_n: replications must be at least 1");
  }
  for (double theta : theta_grid) {
    if (!std::isfinite(theta)) throw DomainError("sweep_mean_n: non-finite grid value");
  }
  const auto points = static_cast<std::int64_t>(theta_grid.size());
  const std::int64_t total = points * replications_per_point;
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(total));
  parallel_for(total, parallel, [&](std::int64_t k) {
    const std::int64_t point = k / replications_per_point;
    const std::int64_t rep = k % replications_per_point;
    RandomStream stream = RandomStream::substream(
        derive_seed(master_seed, static_cast<std::uint64_t>(point)), static_cast<std::uint64_t>(rep));
    const TrialResult result =
        simulate_trial(theta_grid[static_cast<std::size_t>(point)], design, stream);
    auto& out = outcomes[static_cast<std::size_t>(k)];
    out.n = result.final_n;
    out.early = result.stop_reason == StopKind::StopHigh || result.stop_reason == StopKind::StopLow;
  });

  std::vector<SweepPoint> sweep;
  sweep.reserve(theta_grid.size());
  for (std::int64_t point = 0; point < points; ++point) {
    std::int64_t total_n = 0;
    std::int64_t early = 0;
    for (std::int64_t rep = 0; rep < replications_per_point; ++rep) {
      const auto& out = outcomes[static_cast<std::size_t>(point * replications_per_point + rep)];
      total_n += out.n;
      early += out.early ? 1 : 0;
    }
    const auto reps = static_cast<double>(replications_per_point);
    sweep.push_back({theta_grid[static_cast<std::size_t>(point)], static_cast<double>(total_n) / reps,
                     static_cast<double>(early) / reps, replications_per_point});
  }
  return sweep;
}

std::vector<double> make_grid(double min, double max, double step) {
  if (!std::isfinite(min) || !std::isfinite(max) || !std::isfinite(step)) {
    throw DomainError("make_grid: bounds and step must be finite");
  }
  if (!(step > 0.0)) throw DomainError("make_grid: step must be positive");
  if (max < min) throw DomainError("make_grid: max must not be below min");
  const auto count = static_cast<std::int64_t>(std::floor((max - min) / step + 1e-6)) + 1;
  if (count > 10'000'000) throw DomainError("make_grid: too many grid points");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    grid.push_back(min + static_cast<double>(i) * step);
  }
  return grid;
}

}  // namespace liketrial
