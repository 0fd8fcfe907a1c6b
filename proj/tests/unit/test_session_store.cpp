#include "liketrial/service/session_store.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <latch>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "liketrial/errors.hpp"
#include "temp_dir.hpp"

using namespace liketrial;
using namespace liketrial::service;
using liketrial::testing::TempDir;

namespace {

SessionStore::Clock ticking_clock() {
  auto tick = std::make_shared<std::atomic<long long>>(0);
  return [tick] {
    return std::chrono::system_clock::time_point(std::chrono::seconds(1'790'000'000)) +
           std::chrono::microseconds(tick->fetch_add(1));
  };
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("session_store") {
  TEST_CASE("create_session examples") {
    TempDir dir;
    SessionStore store(dir.path());
    const SessionRecord a = store.create_session(DesignParams::reference());
    CHECK(a.version == 0);
    CHECK(a.observations.empty());
    CHECK(a.derived_state.status() == TrialStatus::Collecting);
    CHECK(a.design.n_min() == 16);
    CHECK(a.design.n_max() == 64);
    const SessionRecord b = store.create_session(DesignParams::reference());
    CHECK(a.session_id != b.session_id);
    CHECK(store.size() == 2);

    DesignParams bad;
    bad.delta = 0.0;
    CHECK_THROWS_AS(store.create_session(bad), ValidationError);
    CHECK(store.size() == 2);
  }

  TEST_CASE("post_observation examples") {
    TempDir dir;
    SessionStore store(dir.path());
    const std::string id = store.create_session(DesignParams::reference()).session_id;
    for (int v = 0; v < 15; ++v) {
      const SessionRecord r = store.post_observation(id, 1.7, v);
      CHECK(r.version == v + 1);
      CHECK(r.derived_state.status() == TrialStatus::Collecting);
    }
    const SessionRecord stopped = store.post_observation(id, 1.7, 15);
    CHECK(stopped.version == 16);
    CHECK(stopped.derived_state.status() == TrialStatus::StoppedHigh);

    try {
      store.post_observation(id, 0.1, 16);
      FAIL("expected ConflictError");
    } catch (const ConflictError& e) {
      CHECK(e.reason() == ConflictError::Reason::Stopped);
      CHECK(e.current_version() == 16);
      CHECK(e.status() == TrialStatus::StoppedHigh);
    }
    CHECK(store.get_session(id).version == 16);
    CHECK_THROWS_AS(store.post_observation("00ff", 0.1, 0), NotFoundError);
  }

  TEST_CASE("stale version and non-finite values leave the session unchanged") {
    TempDir dir;
    SessionStore store(dir.path());
    const std::string id = store.create_session(DesignParams::reference()).session_id;
    store.post_observation(id, 0.3, 0);
    store.post_observation(id, 0.4, 1);
    try {
      store.post_observation(id, 0.5, 1);
      FAIL("expected ConflictError");
    } catch (const ConflictError& e) {
      CHECK(e.reason() == ConflictError::Reason::VersionMismatch);
      CHECK(e.current_version() == 2);
    }
    CHECK_THROWS_AS(store.post_observation(id, std::nan(""), 2), ValidationError);
    CHECK_THROWS_AS(store.post_observation(id, INFINITY, 2), ValidationError);
    const SessionRecord r = store.get_session(id);
    CHECK(r.version == 2);
    CHECK(r.observations.size() == 2);
    CHECK(count_lines(read_file(dir.path() / (id + ".jsonl"))) == 3);
  }

  TEST_CASE("get_session and trajectory") {
    TempDir dir;
    SessionStore store(dir.path());
    const std::string id = store.create_session(DesignParams::reference()).session_id;
    CHECK(trajectory(store.get_session(id).design, store.get_session(id).observations).empty());
    const double xs[] = {0.9, -0.2, 1.4, 0.6, 0.1};
    for (int i = 0; i < 5; ++i) store.post_observation(id, xs[i], i);
    const SessionRecord r = store.get_session(id);
    const auto points = trajectory(r.design, r.observations);
    REQUIRE(points.size() == 5);
    double sum = 0.0;
    for (int i = 0; i < 5; ++i) {
      sum += xs[i];
      const double mean = sum / (i + 1);
      const double se = 1.0 / std::sqrt(static_cast<double>(i + 1));
      CHECK(points[static_cast<std::size_t>(i)].lr == directional_lr(mean, 0.5, se));
      CHECK(points[static_cast<std::size_t>(i)].n == i + 1);
    }
    CHECK_THROWS_AS(store.get_session("abc123"), NotFoundError);
  }

  TEST_CASE("list_sessions filters and paginates") {
    TempDir dir;
    SessionStore store(dir.path(), ticking_clock());
    CHECK(store.list_sessions().sessions.empty());
    CHECK(store.list_sessions().next_page_token.empty());
    std::vector<std::string> ids;
    for (int i = 0; i < 7; ++i) {
      DesignParams p = DesignParams::reference();
      p.label = "s" + std::to_string(i);
      ids.push_back(store.create_session(p).session_id);
    }
    for (int i = 0; i < 16; ++i) store.post_observation(ids[2], 1.7, i);
    for (int i = 0; i < 16; ++i) store.post_observation(ids[5], 1.7, i);

    ListQuery high;
    high.status = TrialStatus::StoppedHigh;
    const SessionPage filtered = store.list_sessions(high);
    REQUIRE(filtered.sessions.size() == 2);
    CHECK(filtered.sessions[0].session_id == ids[2]);
    CHECK(filtered.sessions[1].session_id == ids[5]);

    std::vector<std::string> seen;
    ListQuery q;
    q.limit = 2;
    int pages = 0;
    do {
      const SessionPage page = store.list_sessions(q);
      for (const auto& s : page.sessions) seen.push_back(s.session_id);
      q.page_token = page.next_page_token;
      ++pages;
    } while (!q.page_token.empty());
    CHECK(pages == 4);
    CHECK(seen == ids);

    ListQuery bogus;
    bogus.page_token = "zz";
    CHECK_THROWS_AS(store.list_sessions(bogus), std::invalid_argument);
  }

  TEST_CASE("export csv") {
    TempDir dir;
    SessionStore store(dir.path());
    const std::string id = store.create_session(DesignParams::reference()).session_id;
    CHECK(store.export_session_csv(id) == "seq,value,theta_obs,se,lr,status,recorded_at\n");
    for (int i = 0; i < 4; ++i) store.post_observation(id, 0.25 * i, i);
    const std::string csv = store.export_session_csv(id);
    CHECK(count_lines(csv) == 5);
    CHECK(store.export_session_csv(id) == csv);
    SessionStore reloaded(dir.path());
    CHECK(reloaded.export_session_csv(id) == csv);
    CHECK_THROWS_AS(store.export_session_csv("00"), NotFoundError);
  }

  TEST_CASE("reload reproduces every session exactly") {
    TempDir dir;
    std::vector<SessionRecord> before;
    {
      SessionStore store(dir.path());
      std::mt19937_64 rng(3);
      std::normal_distribution<double> noise(0.4, 1.0);
      for (int s = 0; s < 10; ++s) {
        const std::string id = store.create_session(DesignParams::reference()).session_id;
        for (int i = 0; i < s * 7; ++i) {
          if (store.get_session(id).derived_state.stopped()) break;
          store.post_observation(id, noise(rng), i);
        }
        before.push_back(store.get_session(id));
      }
    }
    SessionStore store(dir.path());
    CHECK(store.size() == before.size());
    for (const auto& r : before) {
      const SessionRecord after = store.get_session(r.session_id);
      CHECK(after.observations == r.observations);
      CHECK(after.derived_state == r.derived_state);
      CHECK(after.version == r.version);
      CHECK(after.created_at == r.created_at);
    }
  }

  TEST_CASE("a torn final line is discarded on reload") {
    TempDir dir;
    std::string id;
    {
      SessionStore store(dir.path());
      id = store.create_session(DesignParams::reference()).session_id;
      store.post_observation(id, 0.2, 0);
      store.post_observation(id, 0.3, 1);
    }
    {
      std::ofstream out(dir.path() / (id + ".jsonl"), std::ios::app | std::ios::binary);
      out << R"({"type":"observation","seq":3,"val)";
    }
    SessionStore store(dir.path());
    const SessionRecord r = store.get_session(id);
    CHECK(r.version == 2);
    CHECK(store.post_observation(id, 0.4, 2).version == 3);
    SessionStore again(dir.path());
    CHECK(again.get_session(id).version == 3);
  }

  TEST_CASE("corrupt content other than a torn tail is an error") {
    TempDir dir;
    {
      std::ofstream out(dir.path() / "abcd.jsonl");
      out << "not json\n";
    }
    CHECK_THROWS_AS(SessionStore(dir.path()), StorageError);
  }

  TEST_CASE("crash safety: acknowledged observations survive SIGKILL") {
    for (int round = 0; round < 4; ++round) {
      TempDir dir;
      int ack_pipe[2];
      REQUIRE(::pipe(ack_pipe) == 0);
      const pid_t child = ::fork();
      REQUIRE(child >= 0);
      if (child == 0) {
        ::close(ack_pipe[0]);
        SessionStore store(dir.path());
        DesignParams p;
        p.delta = 0.01;
        p.z_crit = 2.0;
        const std::string id = store.create_session(p).session_id;
        for (std::int64_t v = 0;; ++v) {
          store.post_observation(id, 0.01, v);
          const std::int64_t acked = v + 1;
          if (::write(ack_pipe[1], &acked, sizeof acked) != sizeof acked) ::_exit(3);
        }
      }
      ::close(ack_pipe[1]);
      std::int64_t last_ack = 0;
      std::int64_t value = 0;
      pollfd first{ack_pipe[0], POLLIN, 0};
      REQUIRE(::poll(&first, 1, 10000) == 1);
      const auto deadline =
          std::chrono::steady_clock::now() + std::chrono::milliseconds(50 + 40 * round);
      while (std::chrono::steady_clock::now() < deadline) {
        pollfd pfd{ack_pipe[0], POLLIN, 0};
        if (::poll(&pfd, 1, 5) > 0 && ::read(ack_pipe[0], &value, sizeof value) == sizeof value) {
          last_ack = value;
        }
      }
      ::kill(child, SIGKILL);
      int status = 0;
      ::waitpid(child, &status, 0);
      CHECK(WIFSIGNALED(status));
      while (::read(ack_pipe[0], &value, sizeof value) == sizeof value) last_ack = value;
      ::close(ack_pipe[0]);

      SessionStore store(dir.path());
      REQUIRE(store.size() == 1);
      const SessionRecord r = store.get_session(store.list_sessions().sessions.front().session_id);
      CAPTURE(last_ack);
      CHECK(r.version >= last_ack);
      CHECK(r.version <= last_ack + 1);
      CHECK(r.derived_state == replay(r.design, r.observations));
      // The store accepts writes after recovery.
      CHECK(store.post_observation(r.session_id, 0.01, r.version).version == r.version + 1);
    }
  }

  TEST_CASE("recomputation identity over 100 random sessions") {
    TempDir dir;
    SessionStore store(dir.path());
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> delta(0.2, 1.5);
    std::uniform_int_distribution<int> length(0, 80);
    std::normal_distribution<double> noise;
    std::vector<std::string> ids;
    for (int s = 0; s < 100; ++s) {
      DesignParams p;
      p.delta = delta(rng);
      const std::string id = store.create_session(p).session_id;
      const double theta = noise(rng);
      const int n = length(rng);
      for (int i = 0; i < n; ++i) {
        const SessionRecord r = store.get_session(id);
        if (r.derived_state.stopped()) break;
        store.post_observation(id, theta + noise(rng), r.version);
      }
      ids.push_back(id);
    }
    SessionStore reloaded(dir.path());
    for (const auto& id : ids) {
      const SessionRecord live = store.get_session(id);
      CHECK(live.derived_state == replay(live.design, live.observations));
      CHECK(reloaded.get_session(id).derived_state == live.derived_state);
    }
  }

  TEST_CASE("optimistic concurrency: exactly one of two racing writers wins") {
    TempDir dir;
    SessionStore store(dir.path());
    DesignParams p;
    p.delta = 0.01;
    const std::string id = store.create_session(p).session_id;
    for (std::int64_t version = 0; version < 200; ++version) {
      std::latch start(2);
      std::atomic<int> wins{0};
      std::atomic<int> conflicts{0};
      auto writer = [&](double value) {
        start.arrive_and_wait();
        try {
          store.post_observation(id, value, version);
          ++wins;
        } catch (const ConflictError& e) {
          if (e.reason() == ConflictError::Reason::VersionMismatch) ++conflicts;
        }
      };
      std::thread a(writer, 0.01);
      std::thread b(writer, 0.02);
      a.join();
      b.join();
      REQUIRE(wins == 1);
      REQUIRE(conflicts == 1);
    }
    CHECK(store.get_session(id).version == 200);
  }

  TEST_CASE("timestamps") {
    using namespace std::chrono;
    CHECK(format_timestamp(system_clock::time_point(seconds(0))) == "1970-01-01T00:00:00.000000Z");
    CHECK(format_timestamp(system_clock::time_point(microseconds(1'790'000'000'123'456))) ==
          "2026-09-21T14:13:20.123456Z");
  }
}
