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

#include "spare/firewall.hpp"

#include <nlohmann/json.hpp>

#include "spare/errors.hpp"
#include "spare/time_util.hpp"

namespace spare {

namespace {

using nlohmann::json;

constexpr int kSnapshotVersion = 1;

struct ReasonName {
  Reason reason;
  const char* name;
};

constexpr ReasonName kReasonNames[] = {
    {Reason::Ok, "Ok"},
    {Reason::MissingToken, "MissingToken"},
    {Reason::TokenUndecodable, "TokenUndecodable"},
    {Reason::TokenUndecryptable, "TokenUndecryptable"},
    {Reason::MalformedPayload, "MalformedPayload"},
    {Reason::StaleToken, "StaleToken"},
    {Reason::FutureToken, "FutureToken"},
    {Reason::DuplicateToken, "DuplicateToken"},
    {Reason::DeviceBlocked, "DeviceBlocked"},
    {Reason::SimultaneousAbuse, "SimultaneousAbuse"},
    {Reason::ThresholdExceeded, "ThresholdExceeded"},
};

void roll_day(DeviceState& d, std::int64_t now) {
  std::int64_t day = day_number(now);
  if (day != d.day_bucket) {
    d.day_bucket = day;
    d.requests_today = 0;
  }
  if (d.blocked_until && *d.blocked_until <= now) d.blocked_until.reset();
}

void prune_seen(DeviceState& d, std::int64_t now, std::int64_t window) {
  std::int64_t cutoff = now - 2 * window;
  d.seen_token_times.erase(d.seen_token_times.begin(),
                           d.seen_token_times.lower_bound(cutoff));
}

void prune_arrivals(DeviceState& d, std::int64_t now, std::int64_t window) {
  while (!d.recent_arrivals.empty() && d.recent_arrivals.front() <= now - window) {
    d.recent_arrivals.pop_front();
  }
}

std::int64_t require_int(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) {
    throw CorruptSnapshot(std::string("snapshot missing integer field: ") + key);
  }
  return it->get<std::int64_t>();
}

std::optional<std::int64_t> optional_int(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) return std::nullopt;
  if (!it->is_number_integer()) {
    throw CorruptSnapshot(std::string("snapshot field is not an integer: ") + key);
  }
  return it->get<std::int64_t>();
}

}  // namespace

void FirewallConfig::validate() const {
  if (time_window_seconds <= 0) throw ConfigError("time_window_seconds must be positive");
  if (daily_threshold < 1) throw ConfigError("daily_threshold must be at least 1");
  if (future_skew_seconds < 0) throw ConfigError("future_skew_seconds must be >= 0");
  if (simultaneity.enabled) {
    if (simultaneity.window_seconds <= 0) {
      throw ConfigError("simultaneity window_seconds must be positive");
    }
    if (simultaneity.min_count < 2) {
      throw ConfigError("simultaneity min_count must be at least 2");
    }
  }
  if (cooldown_policy == CooldownPolicy::fixed_duration && cooldown_seconds <= 0) {
    throw ConfigError("cooldown_seconds must be positive for fixed_duration");
  }
}

const char* to_string(Reason r) {
  for (const auto& entry : kReasonNames) {
    if (entry.reason == r) return entry.name;
  }
  return "Unknown";
}

std::optional<Reason> reason_from_string(std::string_view name) {
  for (const auto& entry : kReasonNames) {
    if (name == entry.name) return entry.reason;
  }
  return std::nullopt;
}

Firewall::Firewall(FirewallConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

DeviceState& Firewall::touch_device(const std::string& device_id, std::int64_t now) {
  auto [it, inserted] = devices_.try_emplace(device_id);
  DeviceState& d = it->second;
  if (inserted) d.day_bucket = day_number(now);
  roll_day(d, now);
  prune_seen(d, now, cfg_.time_window_seconds);
  prune_arrivals(d, now, cfg_.simultaneity.window_seconds);
  return d;
}

void Firewall::block_device(DeviceState& d, std::int64_t now) {
  if (cfg_.cooldown_policy == CooldownPolicy::calendar_day_reset) {
    d.blocked_until = next_utc_midnight(now);
  } else {
    d.blocked_until = now + cfg_.cooldown_seconds;
  }
}

Verdict Firewall::validate(const std::optional<Token>& token, bool resubmit,
                           std::int64_t now) {
  std::lock_guard<std::mutex> lock(mu_);
  return validate_locked(token, resubmit, now);
}

Verdict Firewall::validate_locked(const std::optional<Token>& token, bool resubmit,
                                  std::int64_t now) {
  if (!token || token->value.empty()) return {Reason::MissingToken};

  OpenResult opened = open_token(*token, cfg_.keys);
  if (!opened.payload) {
    switch (opened.error) {
      case OpenError::undecodable:
        return {Reason::TokenUndecodable};
      case OpenError::undecryptable:
        return {Reason::TokenUndecryptable};
      case OpenError::malformed:
        return {Reason::MalformedPayload};
    }
  }

  const std::int64_t t = opened.payload->timestamp_utc;
  const bool device_checks = cfg_.mode == Mode::timestamp_device;
  DeviceState& d = touch_device(opened.payload->device_id, now);

  if (device_checks && d.blocked_until && now < *d.blocked_until) {
    return {Reason::DeviceBlocked};
  }

  if (device_checks && !resubmit && d.seen_token_times.count(t) != 0) {
    return {Reason::DuplicateToken};
  }

  if (!resubmit) {
    if (t - now > cfg_.future_skew_seconds) return {Reason::FutureToken};
    if (now - t > cfg_.time_window_seconds) return {Reason::StaleToken};
  } else {
    // A resubmitted URL is fresh as long as the session stayed alive: the
    // device must have been heard from within the last T seconds.
    if (!d.last_request_time || now - *d.last_request_time > cfg_.time_window_seconds) {
      return {Reason::StaleToken};
    }
  }

  if (device_checks && cfg_.simultaneity.enabled) {
    // recent_arrivals is already pruned to the trailing window; this
    // request is the +1.
    if (static_cast<int>(d.recent_arrivals.size()) + 1 >= cfg_.simultaneity.min_count) {
      d.recent_arrivals.push_back(now);
      d.last_request_time = now;
      block_device(d, now);
      return {Reason::SimultaneousAbuse};
    }
  }

  if (device_checks && d.requests_today >= cfg_.daily_threshold) {
    d.recent_arrivals.push_back(now);
    d.last_request_time = now;
    block_device(d, now);
    return {Reason::ThresholdExceeded};
  }

  d.requests_today += 1;
  d.seen_token_times.insert(t);
  d.last_request_time = now;
  d.recent_arrivals.push_back(now);
  return {Reason::Ok};
}

void Firewall::advance_time(std::int64_t now) {
  std::lock_guard<std::mutex> lock(mu_);
  for (auto& [id, d] : devices_) {
    roll_day(d, now);
    prune_seen(d, now, cfg_.time_window_seconds);
    prune_arrivals(d, now, cfg_.simultaneity.window_seconds);
  }
}

void Firewall::reset_device(const std::string& device_id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = devices_.find(device_id);
  if (it == devices_.end()) return;
  it->second.requests_today = 0;
  it->second.blocked_until.reset();
  it->second.recent_arrivals.clear();
}

std::string Firewall::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  json devices = json::object();
  for (const auto& [id, d] : devices_) {
    json entry;
    entry["day_bucket"] = d.day_bucket;
    entry["requests_today"] = d.requests_today;
    if (d.last_request_time) entry["last_request_time"] = *d.last_request_time;
    if (d.blocked_until) entry["blocked_until"] = *d.blocked_until;
    entry["seen_token_times"] =
        std::vector<std::int64_t>(d.seen_token_times.begin(), d.seen_token_times.end());
    entry["recent_arrivals"] =
        std::vector<std::int64_t>(d.recent_arrivals.begin(), d.recent_arrivals.end());
    devices[id] = std::move(entry);
  }
  json doc;
  doc["version"] = kSnapshotVersion;
  doc["devices"] = std::move(devices);
  return doc.dump();
}

void Firewall::load_snapshot(const std::string& bytes) {
  json doc = json::parse(bytes, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw CorruptSnapshot("snapshot is not valid JSON");
  }
  if (require_int(doc, "version") != kSnapshotVersion) {
    throw CorruptSnapshot("unsupported snapshot version");
  }
  auto devices_it = doc.find("devices");
  if (devices_it == doc.end() || !devices_it->is_object()) {
    throw CorruptSnapshot("snapshot has no devices object");
  }

  std::map<std::string, DeviceState> restored;
  for (auto it = devices_it->begin(); it != devices_it->end(); ++it) {
    const json& entry = it.value();
    if (!entry.is_object()) throw CorruptSnapshot("device entry is not an object");
    DeviceState d;
    d.day_bucket = require_int(entry, "day_bucket");
    std::int64_t count = require_int(entry, "requests_today");
    if (count < 0) throw CorruptSnapshot("negative request counter");
    d.requests_today = static_cast<int>(count);
    d.last_request_time = optional_int(entry, "last_request_time");
    d.blocked_until = optional_int(entry, "blocked_until");

    auto seen_it = entry.find("seen_token_times");
    auto arr_it = entry.find("recent_arrivals");
    if (seen_it == entry.end() || !seen_it->is_array() || arr_it == entry.end() ||
        !arr_it->is_array()) {
      throw CorruptSnapshot("device entry missing token or arrival arrays");
    }
    for (const json& v : *seen_it) {
      if (!v.is_number_integer()) throw CorruptSnapshot("seen token is not an integer");
      d.seen_token_times.insert(v.get<std::int64_t>());
    }
    for (const json& v : *arr_it) {
      if (!v.is_number_integer()) throw CorruptSnapshot("arrival is not an integer");
      d.recent_arrivals.push_back(v.get<std::int64_t>());
    }
    restored.emplace(it.key(), std::move(d));
  }

  std::lock_guard<std::mutex> lock(mu_);
  devices_ = std::move(restored);
}

std::map<std::string, DeviceSummary> Firewall::device_summaries() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::map<std::string, DeviceSummary> out;
  for (const auto& [id, d] : devices_) {
    out[id] = DeviceSummary{d.day_bucket, d.requests_today, d.last_request_time,
                            d.blocked_until};
  }
  return out;
}

Verdict judge_url(Firewall& fw, std::string_view url, std::int64_t now) {
  ExtractedQuery q = extract_token(url);
  return fw.validate(q.token, q.resubmit, now);
}

}  // namespace spare
