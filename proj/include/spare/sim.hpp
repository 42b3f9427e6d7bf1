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

#ifndef SPARE_SIM_HPP_
#define SPARE_SIM_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spare/adversary.hpp"
#include "spare/firewall.hpp"
#include "spare/workload.hpp"

namespace spare {

// One simulated day, replayed deterministically: benign and malicious
// request streams are merged in time order and fed through one firewall,
// with the adversary's harvest ticks interleaved at their scheduled times.
// Every derived random stream hangs off the scenario seed, so the same
// scenario produces the same records byte for byte.

struct Scenario {
  std::string name;  // preset name, or free-form label
  std::uint64_t seed = 1;
  std::optional<WorkloadSpec> benign;
  std::optional<WorkloadSpec> malicious;
  std::optional<AdversarySpec> adversary;
  FirewallConfig firewall;

  /// Throws ConfigError on contradictions: an adversary without a malicious
  /// workload to serve, mismatched workload days, harvest cadence that is
  /// not finer than the freshness window, invalid member specs. A malicious
  /// workload without an adversary is legal and models the bare-URL attack.
  void validate() const;
};

struct SimulationRecord {
  RequestEvent event;  // token and device as actually sent on the wire
  bool is_malicious = false;
  Verdict verdict;
};

struct UserOutcome {
  int total = 0;
  int accepted = 0;
  std::optional<int> first_error_index;  // 1-based ordinal of first reject
  bool is_malicious = false;
};

struct SimulationReport {
  Scenario scenario;
  std::int64_t requests = 0;
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  double failed_fraction = 0.0;
  std::map<std::string, std::int64_t> rejects_by_reason;
  std::map<std::string, std::int64_t> accepted_per_device;
  std::map<std::string, UserOutcome> per_user;
};

struct SimulationResult {
  SimulationReport report;
  std::vector<SimulationRecord> records;
};

/// Runs one scenario end to end. The firewall never sees is_malicious or
/// any other ground-truth field; it judges tokens and arrival times only.
SimulationResult run_scenario(const Scenario& sc);

/// Loads "<fixtures_dir>/<name>.json" and runs it.
SimulationResult run_preset(const std::string& name,
                            const std::filesystem::path& fixtures_dir);

/// Replays a previously written dataset through a fresh firewall. For a
/// dataset whose tokens were materialized at generation time this matches
/// run_scenario on the generating scenario verdict for verdict.
SimulationResult replay_dataset(const std::filesystem::path& dataset_path,
                                const FirewallConfig& cfg);

/// Aggregates records into a report. Exposed for replays and tests.
SimulationReport build_report(const Scenario& sc,
                              const std::vector<SimulationRecord>& records);

void write_report_json(const SimulationReport& report, const std::filesystem::path& path);
void write_records_csv(const std::vector<SimulationRecord>& records,
                       const std::filesystem::path& path);

}  // namespace spare

#endif  // SPARE_SIM_HPP_
