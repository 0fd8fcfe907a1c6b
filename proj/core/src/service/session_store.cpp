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

#include "liketrial/service/session_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <utility>

#include "liketrial/report.hpp"
#include "liketrial/service/json_codec.hpp"

namespace liketrial::service {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kLogSuffix = ".jsonl";

class FileDescriptor {
 public:
  explicit FileDescriptor(int fd) : fd_(fd) {}
  ~FileDescriptor() {
    if (fd_ >= 0) ::close(fd_);
  }
  FileDescriptor(FileDescriptor&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  FileDescriptor(const FileDescriptor&) = delete;
  FileDescriptor& operator=(const FileDescriptor&) = delete;
  FileDescriptor& operator=(FileDescriptor&&) = delete;

  int get() const noexcept { return fd_; }

 private:
  int fd_;
};

[[noreturn]] void throw_errno(const std::string& what, const fs::path& path) {
  throw StorageError(what + " " + path.string() + ": " + std::strerror(errno));
}

FileDescriptor open_or_throw(const fs::path& path, int flags) {
  FileDescriptor fd(::open(path.c_str(), flags | O_CLOEXEC, 0644));
  if (fd.get() < 0) throw_errno("cannot open", path);
  return fd;
}

void write_all(int fd, std::string_view data, const fs::path& path) {
  while (!data.empty()) {
    const ssize_t written = ::write(fd, data.data(), data.size());
    if (written < 0) {
      if (errno == EINTR) continue;
      throw_errno("cannot write", path);
    }
    data.remove_prefix(static_cast<std::size_t>(written));
  }
}

void sync_or_throw(int fd, const fs::path& path) {
  if (::fsync(fd) != 0) throw_errno("cannot fsync", path);
}

void sync_directory(const fs::path& dir) {
  FileDescriptor fd = open_or_throw(dir, O_RDONLY | O_DIRECTORY);
  sync_or_throw(fd.get(), dir);
}

std::string to_hex(std::string_view bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xF]);
  }
  return out;
}

std::string from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("page token: odd length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw std::invalid_argument("page token: not hex");
  };
  std::string out;
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<char>(nibble(hex[i]) * 16 + nibble(hex[i + 1])));
  }
  return out;
}

std::string design_line(const std::string& id, const std::string& created_at,
                        const TrialDesign& design) {
  json line = {{"type", "design"},
               {"session_id", id},
               {"created_at", created_at},
               {"design", design_to_json(design)}};
  return line.dump() + "\n";
}

std::string observation_line(const Observation& obs) {
  json line = {{"type", "observation"},
               {"seq", obs.seq},
               {"value", obs.value},
               {"recorded_at", obs.recorded_at}};
  return line.dump() + "\n";
}

}  // namespace

struct SessionStore::Entry {
  explicit Entry(SessionRecord r, fs::path p) : record(std::move(r)), path(std::move(p)) {}

  mutable std::mutex mutex;
  SessionRecord record;
  fs::path path;
};

NotFoundError::NotFoundError(std::string_view session_id)
    : std::runtime_error("session not found: " + std::string(session_id)) {}

ConflictError::ConflictError(Reason reason, std::int64_t current_version, TrialStatus status,
                             const std::string& message)
    : std::runtime_error(message),
      reason_(reason),
      current_version_(current_version),
      status_(status) {}

std::string format_timestamp(std::chrono::system_clock::time_point tp) {
  using namespace std::chrono;
  const auto micros = duration_cast<microseconds>(tp.time_since_epoch()).count();
  auto seconds = static_cast<std::time_t>(micros / 1'000'000);
  auto frac = micros % 1'000'000;
  if (frac < 0) {
    frac += 1'000'000;
    seconds -= 1;
  }
  std::tm tm{};
  ::gmtime_r(&seconds, &tm);
  char buf[40];
  const std::size_t len = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[64];
  std::snprintf(out, sizeof out, "%.*s.%06lldZ", static_cast<int>(len), buf,
                static_cast<long long>(frac));
  return out;
}

TrialState replay(const TrialDesign& design, std::span<const Observation> observations) {
  TrialState state = new_trial(design);
  for (const auto& obs : observations) {
    state = add_observation(std::move(state), obs.value);
  }
  return state;
}

std::vector<TrajectoryPoint> trajectory(const TrialDesign& design,
                                        std::span<const Observation> observations) {
  std::vector<TrajectoryPoint> points;
  points.reserve(observations.size());
  TrialState state = new_trial(design);
  for (const auto& obs : observations) {
    state = add_observation(std::move(state), obs.value);
    points.push_back({state.n(), state.theta_obs(), state.se(), state.lr(), state.status()});
  }
  return points;
}

std::string render_session_csv(const SessionRecord& record) {
  std::ostringstream out;
  out << "seq,value,theta_obs,se,lr,status,recorded_at\n";
  const auto points = trajectory(record.design, record.observations);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& obs = record.observations[i];
    const auto& p = points[i];
    out << obs.seq << "," << format_exact(obs.value) << "," << format_exact(p.theta_obs) << ","
        << format_exact(p.se) << "," << format_exact(p.lr.value()) << "," << to_string(p.status)
        << "," << obs.recorded_at << "\n";
  }
  return out.str();
}

SessionStore::SessionStore(fs::path data_dir, Clock clock)
    : data_dir_(std::move(data_dir)),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::system_clock::now(); })),
      id_rng_(std::random_device{}()) {
  std::error_code ec;
  fs::create_directories(data_dir_, ec);
  if (ec) throw StorageError("cannot create data directory " + data_dir_.string() + ": " + ec.message());

  for (const auto& item : fs::directory_iterator(data_dir_)) {
    if (!item.is_regular_file() || item.path().extension() != kLogSuffix) continue;
    const fs::path& path = item.path();

    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (content.empty()) continue;  // crash between create and first write

    // A crash mid-append leaves a final line without its newline. It was never
    // acknowledged, so drop it and truncate the file back to the last record.
    const auto last_newline = content.rfind('\n');
    const std::size_t complete = last_newline == std::string::npos ? 0 : last_newline + 1;
    if (complete < content.size()) {
      content.resize(complete);
      fs::resize_file(path, complete);
    }
    if (content.empty()) continue;

    std::optional<SessionRecord> record;
    std::istringstream lines(content);
    std::string line;
    std::size_t line_no = 0;
    try {
      while (std::getline(lines, line)) {
        ++line_no;
        const json j = json::parse(line);
        const std::string type = j.at("type").get<std::string>();
        if (line_no == 1) {
          if (type != "design") throw StorageError("first record must be the design");
          const TrialDesign design(design_params_from_json(j.at("design"), kDefaultZCrit));
          record.emplace(SessionRecord{j.at("session_id").get<std::string>(), design, {}, 0,
                                       j.at("created_at").get<std::string>(), new_trial(design)});
          continue;
        }
        if (type != "observation") throw StorageError("unexpected record type " + type);
        Observation obs{j.at("seq").get<std::int64_t>(), j.at("value").get<double>(),
                        j.at("recorded_at").get<std::string>()};
        if (obs.seq != static_cast<std::int64_t>(record->observations.size()) + 1) {
          throw StorageError("non-contiguous seq " + std::to_string(obs.seq));
        }
        record->derived_state = add_observation(std::move(record->derived_state), obs.value);
        record->observations.push_back(std::move(obs));
        record->version += 1;
      }
    } catch (const StorageError& e) {
      throw StorageError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw StorageError(path.string() + ":" + std::to_string(line_no) + ": corrupt record: " +
                         e.what());
    }
    const std::string id = record->session_id;
    if (path.stem() != id) throw StorageError(path.string() + ": session id does not match file name");
    sessions_.emplace(id, std::make_unique<Entry>(std::move(*record), path));
  }
}

SessionStore::~SessionStore() = default;

std::string SessionStore::now_iso() const { return format_timestamp(clock_()); }

std::string SessionStore::new_session_id() {
  std::lock_guard lock(id_mutex_);
  std::string bytes(16, '\0');
  for (std::size_t i = 0; i < bytes.size(); i += 8) {
    const std::uint64_t word = id_rng_();
    std::memcpy(bytes.data() + i, &word, 8);
  }
  return to_hex(bytes);
}

SessionStore::Entry& SessionStore::find(std::string_view session_id) const {
  std::shared_lock lock(map_mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError(session_id);
  return *it->second;
}

SessionRecord SessionStore::create_session(const DesignParams& params) {
  const TrialDesign design(params);
  std::string id = new_session_id();
  const std::string created_at = now_iso();
  const fs::path path = data_dir_ / (id + std::string(kLogSuffix));
  const fs::path tmp = data_dir_ / (id + ".tmp");
  {
    FileDescriptor fd = open_or_throw(tmp, O_WRONLY | O_CREAT | O_TRUNC);
    write_all(fd.get(), design_line(id, created_at, design), tmp);
    sync_or_throw(fd.get(), tmp);
  }
  fs::rename(tmp, path);
  sync_directory(data_dir_);

  SessionRecord record{id, design, {}, 0, created_at, new_trial(design)};
  std::unique_lock lock(map_mutex_);
  sessions_.emplace(id, std::make_unique<Entry>(record, path));
  return record;
}

SessionRecord SessionStore::post_observation(std::string_view session_id, double value,
                                             std::int64_t expected_version) {
  Entry& entry = find(session_id);
  std::lock_guard lock(entry.mutex);
  SessionRecord& record = entry.record;
  if (record.derived_state.stopped()) {
    throw ConflictError(ConflictError::Reason::Stopped, record.version, record.derived_state.status(),
                        "session has stopped (" +
                            std::string(to_string(record.derived_state.status())) +
                            "); no further observations are accepted");
  }
  if (expected_version != record.version) {
    throw ConflictError(ConflictError::Reason::VersionMismatch, record.version,
                        record.derived_state.status(),
                        "expected version " + std::to_string(expected_version) +
                            " but session is at version " + std::to_string(record.version));
  }
  if (!std::isfinite(value)) {
    throw ValidationError("value", "must be a finite number");
  }

  Observation obs{static_cast<std::int64_t>(record.observations.size()) + 1, value, now_iso()};
  TrialState next = add_observation(record.derived_state, value);
  {
    FileDescriptor fd = open_or_throw(entry.path, O_WRONLY | O_APPEND);
    write_all(fd.get(), observation_line(obs), entry.path);
    sync_or_throw(fd.get(), entry.path);
  }
  record.observations.push_back(std::move(obs));
  record.derived_state = std::move(next);
  record.version += 1;
  return record;
}

SessionRecord SessionStore::get_session(std::string_view session_id) const {
  Entry& entry = find(session_id);
  std::lock_guard lock(entry.mutex);
  return entry.record;
}

SessionPage SessionStore::list_sessions(const ListQuery& query) const {
  std::vector<SessionSummary> all;
  {
    std::shared_lock lock(map_mutex_);
    all.reserve(sessions_.size());
    for (const auto& [id, entry] : sessions_) {
      std::lock_guard entry_lock(entry->mutex);
      const SessionRecord& r = entry->record;
      all.push_back({r.session_id, r.design.label(), r.created_at, r.version, r.derived_state.n(),
                     r.derived_state.lr(), r.derived_state.status()});
    }
  }
  const auto key = [](const SessionSummary& s) { return s.created_at + '\t' + s.session_id; };
  std::sort(all.begin(), all.end(),
            [&](const SessionSummary& a, const SessionSummary& b) { return key(a) < key(b); });

  std::string after;
  if (!query.page_token.empty()) {
    after = from_hex(query.page_token);
    if (after.find('\t') == std::string::npos) throw std::invalid_argument("page token: malformed");
  }
  const std::size_t limit = std::clamp<std::size_t>(query.limit, 1, 1000);

  SessionPage page;
  bool more = false;
  for (const auto& s : all) {
    if (!after.empty() && key(s) <= after) continue;
    if (query.status && s.status != *query.status) continue;
    if (page.sessions.size() == limit) {
      more = true;
      break;
    }
    page.sessions.push_back(s);
  }
  if (more) page.next_page_token = to_hex(key(page.sessions.back()));
  return page;
}

std::string SessionStore::export_session_csv(std::string_view session_id) const {
  return render_session_csv(get_session(session_id));
}

std::size_t SessionStore::size() const {
  std::shared_lock lock(map_mutex_);
  return sessions_.size();
}

}  // namespace liketrial::service
