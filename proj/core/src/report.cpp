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

#include "liketrial/report.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>

#include "liketrial/errors.hpp"

namespace liketrial {
namespace {

constexpr std::string_view kCsvHeader = "category,incidence,mean_folded_lr";

std::string table_label(OutcomeCategory c, std::int64_t n_max) {
  const std::string early = "stopped early (N<" + std::to_string(n_max) + ")";
  const std::string at_max = "stopped at N=" + std::to_string(n_max);
  switch (c) {
    case OutcomeCategory::MisleadingEarly: return "Misleading evidence, " + early;
    case OutcomeCategory::CorrectEarly: return "Correct evidence, " + early;
    case OutcomeCategory::MisleadingMaxN: return "Misleading evidence, " + at_max;
    case OutcomeCategory::CorrectMaxN: return "Correct evidence, " + at_max;
    case OutcomeCategory::NeutralUnclassified: return "Neutral (LR = 1 or theta_T = delta)";
  }
  return "?";
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
T parse_as(std::string_view text, std::string_view what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DomainError("summary csv: bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string format_exact(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string format_sig(double value, int digits) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*g", digits, value);
  return buf.data();
}

std::string summary_to_table(const SimulationSummary& summary) {
  const TrialDesign& design = summary.config.design;
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-44s %14s %10s\n", "Result", "Incidence (%)", "Mean LR");
  out << line;
  for (auto c : kAllOutcomeCategories) {
    const CategoryStats& stats = summary[c];
    if (c == OutcomeCategory::NeutralUnclassified && stats.count == 0) continue;
    const std::string lr = stats.mean_folded_lr ? format_sig(*stats.mean_folded_lr) : "-";
    std::snprintf(line, sizeof line, "%-44s %14.2f %10s\n", table_label(c, design.n_max()).c_str(),
                  100.0 * stats.incidence, lr.c_str());
    out << line;
  }
  out << "\n";
  std::snprintf(line, sizeof line, "Trials: %lld  seed: %llu  effect: %s\n",
                static_cast<long long>(summary.n_trials()),
                static_cast<unsigned long long>(summary.master_seed()),
                summary.config.effect_dist.describe().c_str());
  out << line;
  out << "Design: delta=" << format_sig(design.delta()) << " z_crit=" << format_sig(design.z_crit())
      << " LR thresholds=" << format_sig(design.lr_upper()) << "/" << format_sig(design.lr_lower())
      << " n_min=" << design.n_min() << " n_max=" << design.n_max() << "\n";
  std::snprintf(line, sizeof line, "Mean sample size: %.2f  Misleading evidence overall: %.2f%%\n",
                summary.mean_n, 100.0 * summary.misleading_total);
  out << line;
  return out.str();
}

std::string summary_to_csv(const SimulationSummary& summary) {
  const TrialDesign& design = summary.config.design;
  std::ostringstream out;
  out << "# config n_trials=" << summary.n_trials() << " master_seed=" << summary.master_seed()
      << " delta=" << format_exact(design.delta()) << " z_crit=" << format_exact(design.z_crit())
      << " lr_upper=" << format_exact(design.lr_upper())
      << " lr_lower=" << format_exact(design.lr_lower())
      << " effect=" << summary.config.effect_dist.describe() << "\n";
  out << "# overall mean_n=" << format_exact(summary.mean_n)
      << " misleading_total=" << format_exact(summary.misleading_total) << "\n";
  out << kCsvHeader << "\n";
  for (auto c : kAllOutcomeCategories) {
    const CategoryStats& stats = summary[c];
    out << to_string(c) << "," << format_exact(stats.incidence) << ","
        << (stats.mean_folded_lr ? format_exact(*stats.mean_folded_lr) : "") << "\n";
  }
  out << "summary," << format_exact(summary.misleading_total) << ",\n";
  return out.str();
}

SimulationSummary summary_from_csv(std::string_view csv) {
  std::map<std::string, std::string, std::less<>> meta;
  std::array<std::optional<CategoryStats>, kOutcomeCategoryCount> rows;
  bool header_seen = false;
  bool summary_seen = false;

  for (std::string_view line : split(csv, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      for (std::string_view token : split(line.substr(1), ' ')) {
        const auto eq = token.find('=');
        if (eq != std::string_view::npos) {
          meta.emplace(std::string(token.substr(0, eq)), std::string(token.substr(eq + 1)));
        }
      }
      continue;
    }
    if (!header_seen) {
      if (line != kCsvHeader) throw DomainError("summary csv: unexpected header");
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw DomainError("summary csv: expected 3 columns");
    if (fields[0] == "summary") {
      summary_seen = true;
      continue;
    }
    const auto category = parse_outcome_category(fields[0]);
    if (!category) throw DomainError("summary csv: unknown category '" + std::string(fields[0]) + "'");
    CategoryStats stats;
    stats.incidence = parse_as<double>(fields[1], "incidence");
    if (!fields[2].empty()) stats.mean_folded_lr = parse_as<double>(fields[2], "mean_folded_lr");
    rows[static_cast<std::size_t>(*category)] = stats;
  }
  if (!header_seen || !summary_seen) throw DomainError("summary csv: truncated");

  auto need = [&](std::string_view key) -> std::string_view {
    const auto it = meta.find(key);
    if (it == meta.end()) throw DomainError("summary csv: missing '" + std::string(key) + "'");
    return it->second;
  };
  DesignParams params;
  params.delta = parse_as<double>(need("delta"), "delta");
  params.z_crit = parse_as<double>(need("z_crit"), "z_crit");
  params.lr_upper = parse_as<double>(need("lr_upper"), "lr_upper");
  params.lr_lower = parse_as<double>(need("lr_lower"), "lr_lower");

  SimulationConfig config{TrialDesign(params), EffectDistribution::parse(need("effect")),
                          parse_as<std::int64_t>(need("n_trials"), "n_trials"),
                          parse_as<std::uint64_t>(need("master_seed"), "master_seed")};
  SimulationSummary summary{config, {}, parse_as<double>(need("mean_n"), "mean_n"),
                            parse_as<double>(need("misleading_total"), "misleading_total")};
  for (std::size_t c = 0; c < kOutcomeCategoryCount; ++c) {
    if (!rows[c]) throw DomainError("summary csv: missing category row");
    summary.categories[c] = *rows[c];
    summary.categories[c].count =
        std::llround(rows[c]->incidence * static_cast<double>(config.n_trials));
  }
  return summary;
}

std::string sweep_to_csv(std::span<const SweepPoint> points) {
  std::ostringstream out;
  out << "theta_T,mean_n,stop_early_rate,replications\n";
  for (const auto& p : points) {
    out << format_exact(p.theta_t) << "," << format_exact(p.mean_n) << ","
        << format_exact(p.stop_early_rate) << "," << p.replications << "\n";
  }
  return out.str();
}

}  // namespace liketrial
