// Copyright 2026 The spare Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPARE_GATEWAY_HPP_
#define SPARE_GATEWAY_HPP_

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "spare/firewall.hpp"

namespace httplib {
class Server;
}

namespace spare {

struct ServiceConfig {
  std::string listen_address = "127.0.0.1:8080";  // port 0 binds ephemerally
  FirewallConfig firewall;
  std::filesystem::path snapshot_path;  // empty disables persistence
  std::int64_t snapshot_interval_seconds = 30;

  /// Throws ConfigError when any field is out of range.
  void validate() const;

  std::string host() const;
  int port() const;
};

/// HTTP front of the firewall.
///
///   GET  /resource?id=<token>&resubmit=<bool>   200 accept / 403 reject
///   GET  /admin/devices                         per-device ledger summary
///   POST /admin/devices/<id>/reset              204, clears counters
///
/// Request URLs go through the same extract-then-validate path as the
/// simulation engine, so a verdict over HTTP equals the in-process verdict
/// for the same URL at the same clock reading. Client mistakes never map to
/// 5xx. The ledger is snapshotted periodically and on shutdown, and loaded
/// back on construction, so a restart keeps its counters.
class Gateway {
 public:
  using Clock = std::function<std::int64_t()>;

  /// `clock` defaults to the system UTC clock; tests inject a scripted one.
  explicit Gateway(ServiceConfig cfg, Clock clock = {});
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Binds and serves on a background thread. Throws ConfigError when the
  /// address cannot be bound.
  void start();

  /// Stops serving and snapshots the ledger. Idempotent.
  void stop();

  /// Port actually bound; meaningful after start().
  int port() const { return bound_port_; }

  Firewall& firewall() { return *firewall_; }

 private:
  void setup_routes();
  void snapshot_now();

  ServiceConfig cfg_;
  Clock clock_;
  std::unique_ptr<Firewall> firewall_;
  std::unique_ptr<httplib::Server> server_;
  std::thread serve_thread_;
  std::thread snapshot_thread_;
  std::mutex stop_mu_;
  std::condition_variable stop_cv_;
  bool stopping_ = false;
  bool started_ = false;
  int bound_port_ = 0;
};

}  // namespace spare

#endif  // SPARE_GATEWAY_HPP_
