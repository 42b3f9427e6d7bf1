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

#ifndef SPARE_WORKLOAD_HPP_
#define SPARE_WORKLOAD_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spare/rng.hpp"
#include "spare/token_codec.hpp"

namespace spare {

// One simulated day of browsing. Each user sends a uniform-random number of
// requests in [req_min, req_max]; request seconds follow an hour-of-day
// profile shaped like typical daytime traffic, with a minimum gap between
// any two requests from the same device.

/// Relative hourly weights, midnight first. Normalized before use.
std::array<double, 24> default_hourly_weights();

struct WorkloadSpec {
  enum class Kind { benign, malicious };

  Kind kind = Kind::benign;
  int n_users = 0;
  int n_devices = 0;  // malicious only: size of the attacker's device pool
  int req_min = 25;
  int req_max = 45;
  std::array<double, 24> hourly_weights = default_hourly_weights();
  std::string day = "2024-03-09";  // UTC date the requests land on
  std::int64_t min_gap_seconds = 10;
  std::uint64_t seed = 0;

  /// Throws ConfigError when any field is out of range.
  void validate() const;

  /// Epoch second at which the configured day starts.
  std::int64_t day_start() const;

  friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

struct RequestEvent {
  std::string user_id;
  std::string device_id;  // ground truth, never shown to the firewall
  std::int64_t send_time = 0;
  std::optional<Token> token;  // minted for benign traffic, empty for demand
  bool resubmit = false;
  int request_index = 1;  // 1-based ordinal within the user's day

  friend bool operator==(const RequestEvent&, const RequestEvent&) = default;
};

struct Dataset {
  WorkloadSpec spec;
  std::vector<RequestEvent> events;  // sorted by (send_time, user_id, index)
};

/// Draws n distinct request seconds for one user: hour by the weight table,
/// second uniform within the hour, resampling any draw that lands within
/// min_gap_seconds of an already chosen time. Throws InfeasibleSpec when the
/// constraints cannot fit (n * min_gap exceeding the active seconds, or
/// resampling exhausting its attempt budget). Returned times are sorted.
std::vector<std::int64_t> sample_request_times(int n, const WorkloadSpec& spec,
                                               SplitMix64& rng);

/// Benign day: user i browses from their own device and every request
/// carries a token minted at its send time. Deterministic in spec.seed.
Dataset gen_benign(const WorkloadSpec& spec, const KeyMaterial& keys);

/// Malicious day: the same traffic shape, but no tokens. Each user is
/// pinned to pool device i % n_devices; the adversary decides at serve time
/// what token, if any, the request carries.
Dataset gen_malicious_demand(const WorkloadSpec& spec);

/// Writes the events as CSV plus a "<path>.meta.json" sidecar holding the
/// spec. Throws IoError when the file cannot be written.
void write_dataset(const Dataset& ds, const std::filesystem::path& path);

/// Inverse of write_dataset. Throws IoError on unreadable files and
/// SchemaError on header or field mismatches.
Dataset read_dataset(const std::filesystem::path& path);

std::string benign_device_id(int user_index);
std::string benign_user_id(int user_index);
std::string malicious_user_id(int user_index);

/// Pool device names are shared with the adversary model: harvester i mints
/// from the same device that demand generation pins its users to.
std::string attacker_device_id(int device_index);

}  // namespace spare

#endif  // SPARE_WORKLOAD_HPP_
