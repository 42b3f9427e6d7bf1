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

#include "spare/gateway.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "spare/errors.hpp"

namespace spare {

namespace {

using nlohmann::json;

void set_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

void ServiceConfig::validate() const {
  if (listen_address.find(':') == std::string::npos) {
    throw ConfigError("listen_address must be host:port");
  }
  int p = port();
  if (p < 0 || p > 65535) throw ConfigError("listen port out of range");
  if (host().empty()) throw ConfigError("listen host must not be empty");
  if (snapshot_interval_seconds < 1) {
    throw ConfigError("snapshot_interval_seconds must be positive");
  }
  firewall.validate();
}

std::string ServiceConfig::host() const {
  return listen_address.substr(0, listen_address.rfind(':'));
}

int ServiceConfig::port() const {
  std::string p = listen_address.substr(listen_address.rfind(':') + 1);
  try {
    return std::stoi(p);
  } catch (const std::exception&) {
    throw ConfigError("listen_address port is not a number");
  }
}

Gateway::Gateway(ServiceConfig cfg, Clock clock)
    : cfg_(std::move(cfg)),
      clock_(clock ? std::move(clock)
                   : [] { return static_cast<std::int64_t>(std::time(nullptr)); }) {
  cfg_.validate();
  firewall_ = std::make_unique<Firewall>(cfg_.firewall);
  if (!cfg_.snapshot_path.empty() && std::filesystem::exists(cfg_.snapshot_path)) {
    std::ifstream in(cfg_.snapshot_path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot: " + cfg_.snapshot_path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    firewall_->load_snapshot(buf.str());
  }
  server_ = std::make_unique<httplib::Server>();
  setup_routes();
}

Gateway::~Gateway() { stop(); }

void Gateway::setup_routes() {
  server_->Get("/resource", [this](const httplib::Request& req, httplib::Response& res) {
    Verdict v = judge_url(*firewall_, req.target, clock_());
    if (v.accepted()) {
      set_json(res, 200, json{{"verdict", "accept"}});
    } else {
      set_json(res, 403, json{{"verdict", "reject"}, {"reason", to_string(v.reason)}});
    }
  });

  server_->Get("/admin/devices",
               [this](const httplib::Request&, httplib::Response& res) {
                 json devices = json::object();
                 for (const auto& [id, s] : firewall_->device_summaries()) {
                   // Devices an admin reset (or that never got a request
                   // accepted) are dormant; list active or blocked ones.
                   if (s.requests_today == 0 && !s.blocked_until) continue;
                   json entry;
                   entry["count_today"] = s.requests_today;
                   entry["last_request_time"] =
                       s.last_request_time ? json(*s.last_request_time) : json(nullptr);
                   entry["blocked_until"] =
                       s.blocked_until ? json(*s.blocked_until) : json(nullptr);
                   devices[id] = std::move(entry);
                 }
                 set_json(res, 200, json{{"devices", std::move(devices)}});
               });

  server_->Post(R"(/admin/devices/([^/]+)/reset)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  firewall_->reset_device(req.matches[1]);
                  res.status = 204;
                });
}

void Gateway::start() {
  if (started_) return;
  int port = cfg_.port();
  if (port == 0) {
    bound_port_ = server_->bind_to_any_port(cfg_.host());
    if (bound_port_ <= 0) throw ConfigError("cannot bind " + cfg_.listen_address);
  } else {
    if (!server_->bind_to_port(cfg_.host(), port)) {
      throw ConfigError("cannot bind " + cfg_.listen_address);
    }
    bound_port_ = port;
  }
  serve_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  started_ = true;

  if (!cfg_.snapshot_path.empty()) {
    snapshot_thread_ = std::thread([this] {
      std::unique_lock<std::mutex> lock(stop_mu_);
      while (!stopping_) {
        bool stop_requested = stop_cv_.wait_for(
            lock, std::chrono::seconds(cfg_.snapshot_interval_seconds),
            [this] { return stopping_; });
        if (stop_requested) break;
        lock.unlock();
        snapshot_now();
        lock.lock();
      }
    });
  }
}

void Gateway::stop() {
  {
    std::lock_guard<std::mutex> lock(stop_mu_);
    stopping_ = true;
  }
  stop_cv_.notify_all();
  if (snapshot_thread_.joinable()) snapshot_thread_.join();
  if (started_) {
    server_->stop();
  }
  if (serve_thread_.joinable()) serve_thread_.join();
  if (started_ && !cfg_.snapshot_path.empty()) snapshot_now();
  started_ = false;
}

void Gateway::snapshot_now() {
  firewall_->advance_time(clock_());
  std::string bytes = firewall_->snapshot();
  std::filesystem::path tmp = cfg_.snapshot_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write snapshot: " + tmp.string());
    out << bytes;
    if (!out.flush()) throw IoError("failed writing snapshot: " + tmp.string());
  }
  std::filesystem::rename(tmp, cfg_.snapshot_path);
}

}  // namespace spare
