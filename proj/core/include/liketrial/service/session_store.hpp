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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "liketrial/design.hpp"
#include "liketrial/trial.hpp"

namespace liketrial::service {

struct Observation {
  std::int64_t seq = 0;
  double value = 0.0;
  std::string recorded_at;

  bool operator==(const Observation&) const = default;
};

/// A live trial. `derived_state` is always the replay of `observations`
/// through the trial engine; the event log on disk is the source of truth.
struct SessionRecord {
  std::string session_id;
  TrialDesign design;
  std::vector<Observation> observations;
  std::int64_t version = 0;
  std::string created_at;
  TrialState derived_state;
};

/// State after observation n, for n = 1..size.
struct TrajectoryPoint {
  std::int64_t n = 0;
  double theta_obs = 0.0;
  double se = 0.0;
  LikelihoodRatio lr;
  TrialStatus status = TrialStatus::Collecting;
};

struct SessionSummary {
  std::string session_id;
  std::string label;
  std::string created_at;
  std::int64_t version = 0;
  std::int64_t n = 0;
  LikelihoodRatio lr;
  TrialStatus status = TrialStatus::Collecting;
};

struct ListQuery {
  std::optional<TrialStatus> status;
  /// Opaque token from a previous SessionPage; empty for the first page.
  std::string page_token;
  std::size_t limit = 50;
};

struct SessionPage {
  std::vector<SessionSummary> sessions;
  /// Empty when there are no further pages.
  std::string next_page_token;
};

class NotFoundError : public std::runtime_error {
 public:
  explicit NotFoundError(std::string_view session_id);
};

class ConflictError : public std::runtime_error {
 public:
  enum class Reason { Stopped, VersionMismatch };

  ConflictError(Reason reason, std::int64_t current_version, TrialStatus status,
                const std::string& message);

  Reason reason() const noexcept { return reason_; }
  std::int64_t current_version() const noexcept { return current_version_; }
  TrialStatus status() const noexcept { return status_; }

 private:
  Reason reason_;
  std::int64_t current_version_;
  TrialStatus status_;
};

/// I/O failure or a corrupt event log.
class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Replays observations through the trial engine from an empty trial.
TrialState replay(const TrialDesign& design, std::span<const Observation> observations);

std::vector<TrajectoryPoint> trajectory(const TrialDesign& design,
                                        std::span<const Observation> observations);

/// `seq,value,theta_obs,se,lr,status,recorded_at`, one row per observation.
std::string render_session_csv(const SessionRecord& record);

/// Durable store of live sessions, one append-only JSON-lines event log per
/// session under `data_dir`. Every accepted mutation is fsync'ed before the
/// call returns. Thread-safe: mutations of one session are serialized, reads
/// and mutations of different sessions run concurrently.
class SessionStore {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  /// Creates `data_dir` if needed and loads every existing session log.
  /// A torn final line (crash mid-append) is discarded; any other malformed
  /// content throws StorageError.
  explicit SessionStore(std::filesystem::path data_dir, Clock clock = {});
  ~SessionStore();

  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  /// Throws ValidationError for an invalid design.
  SessionRecord create_session(const DesignParams& params);

  /// Appends one observation if `expected_version` matches the current
  /// version. Throws NotFoundError, ConflictError, or ValidationError
  /// (non-finite value).
  SessionRecord post_observation(std::string_view session_id, double value,
                                 std::int64_t expected_version);

  SessionRecord get_session(std::string_view session_id) const;

  /// Ordered by (created_at, session_id). Throws std::invalid_argument for a
  /// malformed page token.
  SessionPage list_sessions(const ListQuery& query = {}) const;

  std::string export_session_csv(std::string_view session_id) const;

  std::size_t size() const;
  const std::filesystem::path& data_dir() const noexcept { return data_dir_; }

 private:
  struct Entry;

  Entry& find(std::string_view session_id) const;
  std::string now_iso() const;
  std::string new_session_id();

  std::filesystem::path data_dir_;
  Clock clock_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::unique_ptr<Entry>, std::less<>> sessions_;
  std::mutex id_mutex_;
  std::mt19937_64 id_rng_;
};

/// UTC ISO-8601 with microseconds, e.g. 2026-10-18T06:07:08.123456Z.
std::string format_timestamp(std::chrono::system_clock::time_point tp);

}  // namespace liketrial::service
