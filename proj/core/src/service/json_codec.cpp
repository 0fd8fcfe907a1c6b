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

#include "liketrial/service/json_codec.hpp"

#include <cmath>

namespace liketrial::service {
using nlohmann::json;

namespace {

json finite_or_null(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

}  // namespace

json design_to_json(const TrialDesign& design) {
  return {{"delta", design.delta()},   {"lr_upper", design.lr_upper()},
          {"lr_lower", design.lr_lower()}, {"z_crit", design.z_crit()},
          {"n_min", design.n_min()},   {"n_max", design.n_max()},
          {"label", design.label()}};
}

DesignParams design_params_from_json(const json& body, double default_z_crit) {
  if (!body.is_object()) {
    throw ValidationError("body", "must be a JSON object");
  }
  std::vector<FieldError> type_errors;
  DesignParams params;
  params.z_crit = default_z_crit;

  auto number = [&](const char* field, bool required) -> std::optional<double> {
    const auto it = body.find(field);
    if (it == body.end() || it->is_null()) {
      if (required) type_errors.push_back({field, "is required"});
      return std::nullopt;
    }
    if (!it->is_number()) {
      type_errors.push_back({field, "must be a number"});
      return std::nullopt;
    }
    return it->get<double>();
  };

  if (auto v = number("delta", true)) params.delta = *v;
  if (auto v = number("lr_upper", false)) params.lr_upper = *v;
  if (auto v = number("lr_lower", false)) params.lr_lower = *v;
  if (auto v = number("z_crit", false)) params.z_crit = *v;
  if (const auto it = body.find("label"); it != body.end() && !it->is_null()) {
    if (it->is_string()) {
      params.label = it->get<std::string>();
    } else {
      type_errors.push_back({"label", "must be a string"});
    }
  }

  auto errors = validate(params);
  // A missing or mistyped field already explains the invariant failure.
  std::erase_if(errors, [&](const FieldError& e) {
    for (const auto& t : type_errors) {
      if (t.field == e.field) return true;
    }
    return false;
  });
  errors.insert(errors.begin(), type_errors.begin(), type_errors.end());
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return params;
}

void put_lr(json& out, const LikelihoodRatio& lr, const std::string& prefix) {
  out[prefix + "log_lr"] = lr.log_value();
  out[prefix + "lr"] = finite_or_null(lr.value());
}

json state_to_json(const TrialState& state) {
  json out = {{"n", state.n()}, {"status", std::string(to_string(state.status()))}};
  if (state.n() > 0) {
    out["theta_obs"] = state.theta_obs();
    out["se"] = state.se();
    const auto ci = confidence_interval(state);
    out["ci_lower"] = ci.lower;
    out["ci_upper"] = ci.upper;
  } else {
    out["theta_obs"] = nullptr;
    out["se"] = nullptr;
    out["ci_lower"] = nullptr;
    out["ci_upper"] = nullptr;
  }
  put_lr(out, state.lr());
  if (state.stopped()) {
    out["stop_reason"] = std::string(to_string(finalize(state).stop_reason));
  } else {
    out["stop_reason"] = nullptr;
  }
  return out;
}

json session_to_json(const SessionRecord& record, bool include_trajectory) {
  json observations = json::array();
  for (const auto& obs : record.observations) {
    observations.push_back(
        {{"seq", obs.seq}, {"value", obs.value}, {"recorded_at", obs.recorded_at}});
  }
  json out = {{"session_id", record.session_id},
              {"version", record.version},
              {"created_at", record.created_at},
              {"design", design_to_json(record.design)},
              {"observations", std::move(observations)},
              {"state", state_to_json(record.derived_state)}};
  if (include_trajectory) {
    json points = json::array();
    for (const auto& p : trajectory(record.design, record.observations)) {
      json point = {{"n", p.n},
                    {"theta_obs", p.theta_obs},
                    {"se", p.se},
                    {"status", std::string(to_string(p.status))}};
      put_lr(point, p.lr);
      points.push_back(std::move(point));
    }
    out["trajectory"] = std::move(points);
  }
  return out;
}

json summary_to_json(const SessionSummary& summary) {
  json out = {{"session_id", summary.session_id}, {"label", summary.label},
              {"created_at", summary.created_at}, {"version", summary.version},
              {"n", summary.n},                   {"status", std::string(to_string(summary.status))}};
  put_lr(out, summary.lr);
  return out;
}

}  // namespace liketrial::service
