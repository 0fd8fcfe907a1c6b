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

#include <memory>
#include <string>

#include "liketrial/design.hpp"
#include "liketrial/service/session_store.hpp"

namespace liketrial::service {

struct ApiOptions {
  /// z_crit applied when a create request omits it.
  double default_z_crit = kReferenceZCrit;
};

/// HTTP+JSON front end over a SessionStore.
///
///   GET  /health
///   POST /sessions                           {delta, lr_upper?, lr_lower?, z_crit?, label?}
///   GET  /sessions?status=&page_token=&limit=
///   GET  /sessions/{id}                      record plus LR trajectory
///   POST /sessions/{id}/observations         {value, expected_version}
///   GET  /sessions/{id}/export.csv
///
/// Errors are JSON {error, message, ...}: 400 malformed request, 404 unknown
/// session, 409 stopped session or version conflict, 422 validation.
class ApiServer {
 public:
  explicit ApiServer(SessionStore& store, ApiOptions options = {});
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the bound
  /// port. Throws std::runtime_error if the address is unavailable.
  int bind(const std::string& host, int port);

  /// Serves until stop() is called. Requires a successful bind().
  void run();

  /// Thread-safe; makes run() return.
  void stop();

  /// Blocks until the server accepts connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace liketrial::service
