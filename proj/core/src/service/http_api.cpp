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

#include "liketrial/service/http_api.hpp"

#include <charconv>
#include <stdexcept>

#include "httplib.h"
#include "liketrial/service/json_codec.hpp"

namespace liketrial::service {
using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void reply_error(httplib::Response& res, int status, const std::string& code,
                 const std::string& message, json extra = json::object()) {
  extra["error"] = code;
  extra["message"] = message;
  reply(res, status, extra);
}

void reply_validation(httplib::Response& res, const ValidationError& e) {
  json fields = json::array();
  for (const auto& f : e.errors()) {
    fields.push_back({{"field", f.field}, {"message", f.message}});
  }
  reply_error(res, 422, "validation", e.what(), {{"fields", fields}});
}

// Maps store exceptions onto HTTP statuses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const NotFoundError& e) {
    reply_error(res, 404, "not_found", e.what());
  } catch (const ConflictError& e) {
    const bool stopped = e.reason() == ConflictError::Reason::Stopped;
    reply_error(res, 409, stopped ? "session_stopped" : "version_conflict", e.what(),
                {{"current_version", e.current_version()},
                 {"status", std::string(to_string(e.status()))}});
  } catch (const ValidationError& e) {
    reply_validation(res, e);
  } catch (const json::exception& e) {
    reply_error(res, 400, "bad_request", std::string("malformed JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    reply_error(res, 400, "bad_request", e.what());
  } catch (const std::exception& e) {
    reply_error(res, 500, "internal", e.what());
  }
}

}  // namespace

struct ApiServer::Impl {
  Impl(SessionStore& s, ApiOptions o) : store(s), options(o) {
    // SO_REUSEADDR only: httplib's default SO_REUSEPORT would let a second
    // server share an occupied port instead of failing.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    routes();
  }

  void routes() {
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, {{"status", "ok"}});
    });

    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = json::parse(req.body);
        const SessionRecord record =
            store.create_session(design_params_from_json(body, options.default_z_crit));
        res.set_header("Location", "/sessions/" + record.session_id);
        reply(res, 201, session_to_json(record, true));
      });
    });

    server.Get("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        ListQuery query;
        if (req.has_param("status")) {
          const std::string text = req.get_param_value("status");
          query.status = parse_trial_status(text);
          if (!query.status) throw std::invalid_argument("unknown status filter '" + text + "'");
        }
        if (req.has_param("page_token")) query.page_token = req.get_param_value("page_token");
        if (req.has_param("limit")) {
          const std::string text = req.get_param_value("limit");
          std::size_t limit = 0;
          const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), limit);
          if (ec != std::errc() || ptr != text.data() + text.size() || limit == 0) {
            throw std::invalid_argument("limit must be a positive integer");
          }
          query.limit = limit;
        }
        const SessionPage page = store.list_sessions(query);
        json items = json::array();
        for (const auto& s : page.sessions) items.push_back(summary_to_json(s));
        reply(res, 200,
              {{"sessions", items},
               {"next_page_token",
                page.next_page_token.empty() ? json(nullptr) : json(page.next_page_token)}});
      });
    });

    server.Get(R"(/sessions/([0-9a-f]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                   reply(res, 200, session_to_json(store.get_session(req.matches[1].str()), true));
                 });
               });

    server.Post(R"(/sessions/([0-9a-f]+)/observations)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                    const json body = json::parse(req.body);
                    std::vector<FieldError> errors;
                    if (!body.is_object()) throw ValidationError("body", "must be a JSON object");
                    if (!body.contains("value") || !body["value"].is_number()) {
                      errors.push_back({"value", "must be a finite number"});
                    }
                    if (!body.contains("expected_version") ||
                        !body["expected_version"].is_number_integer()) {
                      errors.push_back({"expected_version", "must be an integer"});
                    }
                    if (!errors.empty()) throw ValidationError(std::move(errors));
                    const SessionRecord record = store.post_observation(
                        req.matches[1].str(), body["value"].get<double>(),
                        body["expected_version"].get<std::int64_t>());
                    reply(res, 200, session_to_json(record, false));
                  });
                });

    server.Get(R"(/sessions/([0-9a-f]+)/export\.csv)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                   res.status = 200;
                   res.set_content(store.export_session_csv(req.matches[1].str()), "text/csv");
                 });
               });
  }

  SessionStore& store;
  ApiOptions options;
  httplib::Server server;
  bool bound = false;
};

ApiServer::ApiServer(SessionStore& store, ApiOptions options)
    : impl_(std::make_unique<Impl>(store, options)) {}

ApiServer::~ApiServer() = default;

int ApiServer::bind(const std::string& host, int port) {
  int bound_port = -1;
  if (port == 0) {
    bound_port = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound_port = port;
  }
  if (bound_port < 0) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port) +
                             " (address in use or unavailable)");
  }
  impl_->bound = true;
  return bound_port;
}

void ApiServer::run() {
  if (!impl_->bound) throw std::logic_error("ApiServer::run called before bind");
  impl_->server.listen_after_bind();
}

void ApiServer::stop() { impl_->server.stop(); }

void ApiServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace liketrial::service
