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

#ifndef SPARE_FIREWALL_HPP_
#define SPARE_FIREWALL_HPP_

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "spare/token_codec.hpp"

namespace spare {

// The firewall sits in front of the resource and judges every request by its
// token alone. In timestamp_device mode it enforces the full rule chain; in
// timestamp_only mode it enforces just token integrity and freshness, which
// is the configuration a replay pool defeats.

enum class Mode {
  timestamp_only,
  timestamp_device,
};

enum class CooldownPolicy {
  calendar_day_reset,  // blocks lift at the next UTC midnight
  fixed_duration,      // blocks lift after cooldown_seconds
};

struct SimultaneityRule {
  bool enabled = false;
  std::int64_t window_seconds = 5;  // trailing window W
  int min_count = 3;                // arrivals K that trip the rule
};

struct FirewallConfig {
  Mode mode = Mode::timestamp_device;
  std::int64_t time_window_seconds = 3600;  // freshness window T
  int daily_threshold = 30;                 // per-device daily cap R
  std::int64_t future_skew_seconds = 60;    // tolerated clock skew
  SimultaneityRule simultaneity;
  CooldownPolicy cooldown_policy = CooldownPolicy::calendar_day_reset;
  std::int64_t cooldown_seconds = 86400;  // used by fixed_duration only
  KeyMaterial keys;

  /// Throws ConfigError when any parameter is out of range.
  void validate() const;
};

enum class Reason {
  Ok,
  MissingToken,
  TokenUndecodable,
  TokenUndecryptable,
  MalformedPayload,
  StaleToken,
  FutureToken,
  DuplicateToken,
  DeviceBlocked,
  SimultaneousAbuse,
  ThresholdExceeded,
};

const char* to_string(Reason r);
std::optional<Reason> reason_from_string(std::string_view name);

struct Verdict {
  Reason reason = Reason::Ok;

  bool accepted() const { return reason == Reason::Ok; }
  friend bool operator==(const Verdict& a, const Verdict& b) {
    return a.reason == b.reason;
  }
};

/// Per-device ledger entry. All times are epoch seconds UTC.
struct DeviceState {
  std::int64_t day_bucket = 0;      // UTC day the counter belongs to
  int requests_today = 0;           // accepted requests in day_bucket
  std::optional<std::int64_t> last_request_time;
  std::optional<std::int64_t> blocked_until;
  std::set<std::int64_t> seen_token_times;   // token timestamps, kept for 2T
  std::deque<std::int64_t> recent_arrivals;  // for the simultaneity rule
};

struct DeviceSummary {
  std::int64_t day_bucket = 0;
  int requests_today = 0;
  std::optional<std::int64_t> last_request_time;
  std::optional<std::int64_t> blocked_until;
};

class Firewall {
 public:
  explicit Firewall(FirewallConfig cfg);

  /// Judges one request. `token` is absent when the URL carried no id
  /// parameter. `now` is the arrival time by the server clock. Calls with
  /// non-decreasing `now` model a live server; the ledger rolls day buckets
  /// lazily either way.
  Verdict validate(const std::optional<Token>& token, bool resubmit, std::int64_t now);

  /// Housekeeping sweep: rolls day buckets, lifts expired blocks, evicts
  /// seen tokens older than 2T, prunes stale arrival records.
  void advance_time(std::int64_t now);

  /// Clears the daily counter, any block, and arrival history for one
  /// device. Seen tokens and the session timestamp survive, so replayed
  /// tokens stay rejected after an admin reset.
  void reset_device(const std::string& device_id);

  /// Serializes the ledger to a versioned JSON document. Byte-stable:
  /// loading a snapshot and snapshotting again yields identical bytes.
  std::string snapshot() const;

  /// Replaces the ledger with the snapshot contents. Throws CorruptSnapshot
  /// when the bytes are not a well-formed version-1 snapshot; the ledger is
  /// left untouched in that case.
  void load_snapshot(const std::string& bytes);

  std::map<std::string, DeviceSummary> device_summaries() const;
  const FirewallConfig& config() const { return cfg_; }

 private:
  Verdict validate_locked(const std::optional<Token>& token, bool resubmit,
                          std::int64_t now);
  DeviceState& touch_device(const std::string& device_id, std::int64_t now);
  void block_device(DeviceState& d, std::int64_t now);

  mutable std::mutex mu_;
  FirewallConfig cfg_;
  std::map<std::string, DeviceState> devices_;
};

/// Full request path for one URL: extract the query, then validate.
/// The HTTP gateway and the CLI both judge URLs through this function, so
/// transport can add no policy of its own.
Verdict judge_url(Firewall& fw, std::string_view url, std::int64_t now);

}  // namespace spare

#endif  // SPARE_FIREWALL_HPP_
