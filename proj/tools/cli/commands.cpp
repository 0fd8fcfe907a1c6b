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

#include "commands.hpp"

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "liketrial/design.hpp"
#include "liketrial/errors.hpp"
#include "liketrial/evidence.hpp"
#include "liketrial/report.hpp"
#include "liketrial/service/http_api.hpp"
#include "liketrial/service/json_codec.hpp"
#include "liketrial/service/session_store.hpp"
#include "liketrial/simulator.hpp"
#include "liketrial/trial.hpp"

namespace liketrial::cli {
namespace {

using nlohmann::json;

enum class Format { Table, Json, Csv };

const std::map<std::string, Format> kFormats = {
    {"table", Format::Table}, {"json", Format::Json}, {"csv", Format::Csv}};

/// Thrown for inputs that parse but make no sense together.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Design flags shared by design, simulate, sweep, monitor.
struct DesignFlags {
  double delta = 0.5;
  double z_crit = kReferenceZCrit;
  double lr_upper = kDefaultLrUpper;
  std::optional<double> lr_lower;

  void add_to(CLI::App& cmd, bool delta_required, double default_z_crit) {
    z_crit = default_z_crit;
    auto* d = cmd.add_option("--delta", delta, "Minimum clinically significant effect (standardized)");
    if (delta_required) {
      d->required();
    } else {
      d->capture_default_str();
    }
    cmd.add_option("--z-crit", z_crit, "Critical z for the CI-width sample-size rules")
        ->capture_default_str();
    cmd.add_option("--lr-upper", lr_upper, "Stop when LR >= this")->capture_default_str();
    cmd.add_option("--lr-lower", lr_lower, "Stop when LR <= this (default 1 / lr-upper)");
  }

  TrialDesign design() const {
    DesignParams p;
    p.delta = delta;
    p.z_crit = z_crit;
    p.lr_upper = lr_upper;
    p.lr_lower = lr_lower;
    return TrialDesign(p);
  }
};

std::string sig(double v) { return format_sig(v, 4); }

json design_json(const TrialDesign& d) { return service::design_to_json(d); }

// Writes to --output when given, otherwise to `out`.
void emit(const std::string& text, const std::string& output_path, std::ostream& out) {
  if (output_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(output_path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open output file " + output_path);
  file << text;
  if (!file.flush()) throw std::runtime_error("cannot write output file " + output_path);
}

// ---- design -----------------------------------------------------------------

struct DesignCommand {
  DesignFlags flags;
  Format format = Format::Table;

  int run(std::ostream& out) const {
    const TrialDesign d = flags.design();
    const double z_high = threshold_z(d.lr_upper());
    const double p_high = threshold_p(d.lr_upper());
    const double z_low = -threshold_z(1.0 / d.lr_lower());
    const double p_low = 1.0 - threshold_p(1.0 / d.lr_lower());
    const double w_min = 2.0 * d.z_crit() / std::sqrt(static_cast<double>(d.n_min()));
    const double w_max = 2.0 * d.z_crit() / std::sqrt(static_cast<double>(d.n_max()));
    switch (format) {
      case Format::Json: {
        json j = design_json(d);
        j.erase("label");
        j["ci_width_at_n_min"] = w_min;
        j["ci_width_at_n_max"] = w_max;
        j["stop_high"] = {{"lr", d.lr_upper()}, {"z", z_high}, {"p", p_high}};
        j["stop_low"] = {{"lr", d.lr_lower()}, {"z", z_low}, {"p", p_low}};
        out << j.dump(2) << "\n";
        break;
      }
      case Format::Csv:
        out << "quantity,value\n"
            << "delta," << format_exact(d.delta()) << "\n"
            << "z_crit," << format_exact(d.z_crit()) << "\n"
            << "lr_upper," << format_exact(d.lr_upper()) << "\n"
            << "lr_lower," << format_exact(d.lr_lower()) << "\n"
            << "n_min," << d.n_min() << "\n"
            << "n_max," << d.n_max() << "\n"
            << "ci_width_at_n_min," << format_exact(w_min) << "\n"
            << "ci_width_at_n_max," << format_exact(w_max) << "\n"
            << "stop_high_z," << format_exact(z_high) << "\n"
            << "stop_high_p," << format_exact(p_high) << "\n"
            << "stop_low_z," << format_exact(z_low) << "\n"
            << "stop_low_p," << format_exact(p_low) << "\n";
        break;
      case Format::Table:
        out << "delta " << sig(d.delta()) << ", z_crit " << sig(d.z_crit()) << ", LR thresholds "
            << sig(d.lr_upper()) << " / " << sig(d.lr_lower()) << "\n"
            << "n_min = " << d.n_min() << "  (CI width " << sig(w_min) << ", limit 2*delta = "
            << sig(2.0 * d.delta()) << ")\n"
            << "n_max = " << d.n_max() << "  (CI width " << sig(w_max) << ", limit delta = "
            << sig(d.delta()) << ")\n"
            << "stop high: LR >= " << sig(d.lr_upper()) << "  <=>  z >= " << sig(z_high)
            << "  <=>  one-sided p <= " << sig(p_high) << "\n"
            << "stop low:  LR <= " << sig(d.lr_lower()) << "  <=>  z <= " << sig(z_low)
            << "  <=>  one-sided p >= " << sig(p_low) << "\n";
        break;
    }
    return kExitOk;
  }
};

// ---- simulate ---------------------------------------------------------------

json summary_json(const SimulationSummary& s) {
  const TrialDesign& d = s.config.design;
  json categories = json::array();
  for (auto c : kAllOutcomeCategories) {
    const CategoryStats& stats = s[c];
    categories.push_back({{"category", std::string(to_string(c))},
                          {"count", stats.count},
                          {"incidence", stats.incidence},
                          {"mean_folded_lr", stats.mean_folded_lr && std::isfinite(*stats.mean_folded_lr)
                                                 ? json(*stats.mean_folded_lr)
                                                 : json(nullptr)}});
  }
  json design = design_json(d);
  design.erase("label");
  return {{"config",
           {{"n_trials", s.n_trials()},
            {"master_seed", s.master_seed()},
            {"effect", s.config.effect_dist.describe()},
            {"design", design}}},
          {"categories", categories},
          {"mean_n", s.mean_n},
          {"misleading_total", s.misleading_total}};
}

struct SimulateCommand {
  DesignFlags flags;
  std::int64_t trials = 10'000;
  std::uint64_t seed = 1;
  double effect_mean = 0.0;
  double effect_sd = 1.0;
  std::optional<double> point_mass;
  unsigned threads = 1;
  Format format = Format::Table;
  std::string output;

  int run(std::ostream& out) const {
    if (trials < 1) throw UsageError("--trials must be at least 1");
    std::optional<EffectDistribution> effect;
    if (point_mass) {
      effect.emplace(PointMassEffect{*point_mass});
    } else {
      effect.emplace(NormalEffect{effect_mean, effect_sd});
    }
    const SimulationConfig config{flags.design(), *effect, trials, seed};
    const SimulationSummary summary = run_batch(config, {threads});
    std::string text;
    switch (format) {
      case Format::Table: text = summary_to_table(summary); break;
      case Format::Csv: text = summary_to_csv(summary); break;
      case Format::Json: text = summary_json(summary).dump(2) + "\n"; break;
    }
    emit(text, output, out);
    return kExitOk;
  }
};

// ---- sweep ------------------------------------------------------------------

struct SweepCommand {
  DesignFlags flags;
  double theta_min = -1.0;
  double theta_max = 2.0;
  double step = 0.25;
  std::int64_t reps = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  Format format = Format::Csv;
  std::string output;

  int run(std::ostream& out) const {
    if (reps < 1) throw UsageError("--reps must be at least 1");
    if (!(step > 0.0)) throw UsageError("--step must be positive");
    if (theta_max < theta_min) throw UsageError("empty grid: --theta-max is below --theta-min");
    const auto grid = make_grid(theta_min, theta_max, step);
    const auto points = sweep_mean_n(grid, flags.design(), reps, seed, {threads});
    std::string text;
    switch (format) {
      case Format::Csv: text = sweep_to_csv(points); break;
      case Format::Json: {
        json rows = json::array();
        for (const auto& p : points) {
          rows.push_back({{"theta_T", p.theta_t},
                          {"mean_n", p.mean_n},
                          {"stop_early_rate", p.stop_early_rate},
                          {"replications", p.replications}});
        }
        text = rows.dump(2) + "\n";
        break;
      }
      case Format::Table: {
        std::ostringstream t;
        char line[96];
        std::snprintf(line, sizeof line, "%10s %10s %16s %12s\n", "theta_T", "mean_n",
                      "stop_early_rate", "replications");
        t << line;
        for (const auto& p : points) {
          std::snprintf(line, sizeof line, "%10s %10s %16s %12lld\n", sig(p.theta_t).c_str(),
                        sig(p.mean_n).c_str(), sig(p.stop_early_rate).c_str(),
                        static_cast<long long>(p.replications));
          t << line;
        }
        text = t.str();
        break;
      }
    }
    emit(text, output, out);
    return kExitOk;
  }
};

// ---- convert ----------------------------------------------------------------

struct ConvertCommand {
  std::optional<double> z;
  std::optional<double> delta_std;
  std::optional<double> estimate;
  std::optional<double> se;
  std::optional<double> delta;
  Format format = Format::Table;

  int run(std::ostream& out) const {
    const bool standardized = z || delta_std;
    const bool raw = estimate || se || delta;
    if (standardized && raw) {
      throw UsageError("use either --z/--delta-std or --estimate/--se/--delta, not both");
    }
    if (!standardized && !raw) {
      throw UsageError("give --z and --delta-std, or --estimate, --se and --delta");
    }
    double z_value = 0.0;
    double d_value = 0.0;
    if (standardized) {
      if (!z || !delta_std) throw UsageError("--z and --delta-std must be given together");
      z_value = *z;
      d_value = *delta_std;
    } else {
      if (!estimate || !se || !delta) {
        throw UsageError("--estimate, --se and --delta must be given together");
      }
      if (!(*se > 0.0)) throw UsageError("--se must be positive");
      z_value = *estimate / *se;
      d_value = *delta / *se;
    }
    // Magnitude from the retrospective form; the sign of z - delta_std gives
    // the direction.
    const LikelihoodRatio magnitude = lr_from_z(StandardizedEffect(z_value), d_value);
    const double distance = z_value - d_value;
    const LikelihoodRatio lr = distance < 0.0 ? magnitude.inverse() : magnitude;
    const double odds = lr.folded().value();
    std::string interpretation;
    if (distance == 0.0) {
      interpretation = "LR = 1: the data do not discriminate between effects above and below delta";
    } else if (distance > 0.0) {
      interpretation = "At even prior odds the posterior odds are " + sig(odds) +
                       ":1 in favour of an effect above delta";
    } else {
      interpretation = "At even prior odds the posterior odds are " + sig(odds) +
                       ":1 against an effect above delta";
    }
    switch (format) {
      case Format::Json: {
        json j = {{"z", z_value}, {"delta_std", d_value}, {"interpretation", interpretation}};
        service::put_lr(j, lr);
        out << j.dump(2) << "\n";
        break;
      }
      case Format::Csv:
        out << "z,delta_std,lr,log_lr\n"
            << format_exact(z_value) << "," << format_exact(d_value) << ","
            << format_exact(lr.value()) << "," << format_exact(lr.log_value()) << "\n";
        break;
      case Format::Table:
        out << "z = " << sig(z_value) << ", delta = " << sig(d_value) << " SE\n"
            << "LR = " << sig(lr.value()) << "  (log LR = " << sig(lr.log_value()) << ")\n"
            << interpretation << "\n";
        break;
    }
    return kExitOk;
  }
};

// ---- monitor ----------------------------------------------------------------

int exit_code_for(TrialStatus status) {
  switch (status) {
    case TrialStatus::StoppedHigh: return kExitStoppedHigh;
    case TrialStatus::StoppedLow: return kExitStoppedLow;
    case TrialStatus::StoppedMaxN: return kExitStoppedMaxN;
    default: return kExitIncomplete;
  }
}

std::optional<double> parse_observation(std::string_view line) {
  while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
  while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
  if (!line.empty() && line.front() == '+') line.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
  if (line.empty() || ec != std::errc() || ptr != line.data() + line.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

struct MonitorCommand {
  DesignFlags flags;
  Format format = Format::Table;

  int run(std::istream& in, std::ostream& out, std::ostream& err) const {
    TrialState state = new_trial(flags.design());
    if (format == Format::Table) {
      out << "n_min " << state.design().n_min() << ", n_max " << state.design().n_max()
          << "; enter one observation per line\n";
    }
    std::int64_t line_no = 0;
    std::int64_t skipped = 0;
    std::string line;
    while (!state.stopped() && std::getline(in, line)) {
      ++line_no;
      const auto value = parse_observation(line);
      if (!value) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++skipped;
        err << "warning: line " << line_no << ": not a finite number, skipped\n";
        continue;
      }
      state = add_observation(std::move(state), *value);
      if (format == Format::Json) {
        out << service::state_to_json(state).dump() << "\n";
      } else {
        const auto ci = confidence_interval(state);
        out << "n=" << state.n() << "  theta_obs=" << sig(state.theta_obs())
            << "  LR=" << sig(state.lr().value()) << "  CI=[" << sig(ci.lower) << ", "
            << sig(ci.upper) << "]  status=" << to_string(state.status()) << "\n";
      }
    }
    if (skipped > 0) err << "warning: skipped " << skipped << " non-numeric line(s)\n";
    if (format == Format::Table) {
      if (state.stopped()) {
        const TrialResult r = finalize(state);
        out << "stopped: " << to_string(r.stop_reason) << " at n=" << r.final_n
            << ", LR=" << sig(r.final_lr.value()) << " (" << to_string(r.evidence_direction)
            << ")\n";
      } else {
        out << "incomplete: " << to_string(state.status()) << " after " << state.n()
            << " observation(s)\n";
      }
    }
    return exit_code_for(state.status());
  }
};

// ---- serve ------------------------------------------------------------------

struct ServeCommand {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "liketrial-data";
  double z_crit = kReferenceZCrit;

  int run(std::ostream& out) const {
    // Signals are consumed by a dedicated thread through sigtimedwait, so
    // shutdown never runs inside an async signal handler.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    sigset_t previous;
    pthread_sigmask(SIG_BLOCK, &signals, &previous);
    struct RestoreMask {
      sigset_t mask;
      ~RestoreMask() { pthread_sigmask(SIG_SETMASK, &mask, nullptr); }
    } restore{previous};

    service::SessionStore store(data_dir);
    service::ApiServer server(store, service::ApiOptions{z_crit});
    const int bound = server.bind(host, port);
    out << "liketrial: serving " << store.size() << " session(s) from " << data_dir << " on http://"
        << host << ":" << bound << std::endl;

    std::atomic<bool> done{false};
    std::jthread watcher([&] {
      const timespec tick{0, 200'000'000};
      while (!done.load()) {
        if (sigtimedwait(&signals, nullptr, &tick) > 0) {
          server.stop();
          return;
        }
      }
    });
    server.run();
    done = true;
    out << "liketrial: stopped" << std::endl;
    return kExitOk;
  }
};

CLI::Option* add_format(CLI::App& cmd, Format& format, const char* default_name) {
  return cmd.add_option("--format", format, "Output format: table, json or csv")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case))
      ->default_str(default_name);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Sequential likelihood-ratio trial design, simulation and monitoring", "liketrial"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "liketrial 0.1.0");

  DesignCommand design;
  auto* design_cmd = app.add_subcommand("design", "Sample sizes and stop thresholds for a design");
  design.flags.add_to(*design_cmd, true, kDefaultZCrit);
  add_format(*design_cmd, design.format, "table");

  SimulateCommand simulate;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "Monte Carlo operating characteristics by outcome category");
  simulate.flags.add_to(*simulate_cmd, false, kReferenceZCrit);
  simulate_cmd->add_option("--trials", simulate.trials, "Number of simulated trials")
      ->capture_default_str();
  simulate_cmd->add_option("--seed", simulate.seed, "Master seed")->capture_default_str();
  auto* mean_opt = simulate_cmd->add_option("--effect-mean", simulate.effect_mean,
                                            "Mean of the true-effect distribution")
                       ->capture_default_str();
  auto* sd_opt = simulate_cmd->add_option("--effect-sd", simulate.effect_sd,
                                          "SD of the true-effect distribution")
                     ->capture_default_str();
  simulate_cmd->add_option("--point-mass", simulate.point_mass, "Fix every true effect at this value")
      ->excludes(mean_opt)
      ->excludes(sd_opt);
  simulate_cmd->add_option("--threads", simulate.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
  simulate_cmd->add_option("--output", simulate.output, "Write to this file instead of stdout");
  add_format(*simulate_cmd, simulate.format, "table");

  SweepCommand sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Mean sample size across true effects (CSV)");
  sweep.flags.add_to(*sweep_cmd, false, kReferenceZCrit);
  sweep_cmd->add_option("--theta-min", sweep.theta_min, "First grid value")->capture_default_str();
  sweep_cmd->add_option("--theta-max", sweep.theta_max, "Last grid value")->capture_default_str();
  sweep_cmd->add_option("--step", sweep.step, "Grid spacing")->capture_default_str();
  sweep_cmd->add_option("--reps", sweep.reps, "Replications per grid value")->capture_default_str();
  sweep_cmd->add_option("--seed", sweep.seed, "Master seed")->capture_default_str();
  sweep_cmd->add_option("--threads", sweep.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
  sweep_cmd->add_option("--output", sweep.output, "Write to this file instead of stdout");
  add_format(*sweep_cmd, sweep.format, "csv");

  ConvertCommand convert;
  auto* convert_cmd =
      app.add_subcommand("convert", "Directional LR from a reported estimate or z statistic");
  convert_cmd->add_option("--z", convert.z, "Standardized effect (estimate / SE)");
  convert_cmd->add_option("--delta-std", convert.delta_std, "Delta in SE units");
  convert_cmd->add_option("--estimate", convert.estimate, "Effect estimate");
  convert_cmd->add_option("--se", convert.se, "Standard error of the estimate");
  convert_cmd->add_option("--delta", convert.delta, "Delta in the units of the estimate");
  add_format(*convert_cmd, convert.format, "table");

  MonitorCommand monitor;
  auto* monitor_cmd = app.add_subcommand(
      "monitor", "Read observations from stdin and apply the stopping rule after each");
  monitor.flags.add_to(*monitor_cmd, true, kReferenceZCrit);
  monitor_cmd->add_option("--format", monitor.format, "Output format: table or json")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Format>{{"table", Format::Table}, {"json", Format::Json}},
          CLI::ignore_case))
      ->default_str("table");
  monitor_cmd->footer(
      "Exit status: 10 StoppedHigh, 11 StoppedLow, 12 StoppedMaxN, 3 input ended first.");

  ServeCommand serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the session HTTP API");
  serve_cmd->add_option("--host", serve.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", serve.port, "TCP port (0 = any free port)")
      ->envname("LIKETRIAL_PORT")
      ->capture_default_str();
  serve_cmd->add_option("--data-dir", serve.data_dir, "Directory for session event logs")
      ->envname("LIKETRIAL_DATA_DIR")
      ->capture_default_str();
  serve_cmd->add_option("--z-crit", serve.z_crit, "z_crit for sessions that omit it")
      ->capture_default_str();

  std::vector<const char*> argv{"liketrial"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*design_cmd) return design.run(out);
    if (*simulate_cmd) return simulate.run(out);
    if (*sweep_cmd) return sweep.run(out);
    if (*convert_cmd) return convert.run(out);
    if (*monitor_cmd) return monitor.run(in, out, err);
    if (*serve_cmd) return serve.run(out);
  } catch (const ValidationError& e) {
    for (const auto& f : e.errors()) {
      std::string flag = f.field;
      std::replace(flag.begin(), flag.end(), '_', '-');
      err << "error: --" << flag << ": " << f.message << "\n";
    }
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace liketrial::cli
