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

#include "spare/sim.hpp"

#include <algorithm>
#include <fstream>

#include "spare/config.hpp"
#include "spare/errors.hpp"
#include "spare/rng.hpp"
#include "spare/time_util.hpp"

namespace spare {

namespace {

bool uses_harvest_ticks(Strategy s) {
  return s == Strategy::random_pool || s == Strategy::round_robin;
}

struct LabeledEvent {
  RequestEvent event;
  bool is_malicious = false;
};

bool event_before(const RequestEvent& a, const RequestEvent& b) {
  if (a.send_time != b.send_time) return a.send_time < b.send_time;
  if (a.user_id != b.user_id) return a.user_id < b.user_id;
  return a.request_index < b.request_index;
}

}  // namespace

void Scenario::validate() const {
  firewall.validate();
  if (!benign && !malicious) {
    throw ConfigError("scenario needs a benign or malicious workload");
  }
  if (benign) {
    benign->validate();
    if (benign->kind != WorkloadSpec::Kind::benign) {
      throw ConfigError("scenario benign workload must have kind benign");
    }
  }
  if (malicious) {
    malicious->validate();
    if (malicious->kind != WorkloadSpec::Kind::malicious) {
      throw ConfigError("scenario malicious workload must have kind malicious");
    }
  }
  if (adversary) {
    // An adversary with nobody to serve is a configuration mistake. The
    // converse is legal: a malicious workload without an adversary block is
    // the bare-URL attack, where requests carry no token at all.
    if (!malicious) throw ConfigError("adversary configured without malicious workload");
    adversary->validate();
    if (uses_harvest_ticks(adversary->strategy) &&
        adversary->harvest_interval_seconds >= firewall.time_window_seconds) {
      throw ConfigError("harvest interval must be finer than the freshness window");
    }
    if (adversary->strategy != Strategy::static_url &&
        adversary->strategy != Strategy::single_token &&
        adversary->n_harvesters != malicious->n_devices) {
      throw ConfigError("pool strategies need one harvester per pool device");
    }
  }
  if (benign && malicious && benign->day != malicious->day) {
    throw ConfigError("benign and malicious workloads must share the same day");
  }
}

SimulationResult run_scenario(const Scenario& sc) {
  sc.validate();

  // The scenario seed drives every stream: workload sub-seeds are derived
  // from it, so the echoed scenario in the report regenerates the exact
  // datasets standalone.
  Scenario ran = sc;
  std::vector<LabeledEvent> events;
  if (ran.benign) {
    ran.benign->seed = SplitMix64::mix(ran.seed, fnv1a64("benign"));
    Dataset ds = gen_benign(*ran.benign, ran.firewall.keys);
    for (RequestEvent& ev : ds.events) events.push_back({std::move(ev), false});
  }
  if (ran.malicious) {
    ran.malicious->seed = SplitMix64::mix(ran.seed, fnv1a64("malicious"));
    Dataset ds = gen_malicious_demand(*ran.malicious);
    for (RequestEvent& ev : ds.events) events.push_back({std::move(ev), true});
  }
  std::sort(events.begin(), events.end(),
            [](const LabeledEvent& a, const LabeledEvent& b) {
              return event_before(a.event, b.event);
            });

  Firewall firewall(ran.firewall);
  TokenStore store;
  SplitMix64 serve_rng = SplitMix64::for_stream(ran.seed, "adversary");

  const Strategy strategy =
      ran.adversary ? ran.adversary->strategy : Strategy::static_url;
  bool harvesting = ran.adversary && uses_harvest_ticks(strategy);
  std::int64_t next_tick = ran.malicious ? ran.malicious->day_start() : 0;
  bool single_seeded = false;

  SimulationResult result;
  result.records.reserve(events.size());
  for (LabeledEvent& le : events) {
    RequestEvent& ev = le.event;
    while (harvesting && next_tick <= ev.send_time) {
      store.harvest_tick(next_tick, *ran.adversary, ran.firewall.keys);
      next_tick += ran.adversary->harvest_interval_seconds;
    }
    firewall.advance_time(ev.send_time);

    if (le.is_malicious && ran.adversary) {
      if (strategy == Strategy::single_token && !single_seeded) {
        store.preseed_single(ev.send_time, ran.firewall.keys);
        single_seeded = true;
      }
      std::optional<ServedToken> served = store.serve(*ran.adversary, serve_rng);
      if (served) {
        ev.token = served->token;
        ev.device_id = served->source_device;
      } else {
        ev.token.reset();
      }
    }

    Verdict verdict = firewall.validate(ev.token, ev.resubmit, ev.send_time);
    result.records.push_back({std::move(ev), le.is_malicious, verdict});
  }

  result.report = build_report(ran, result.records);
  return result;
}

SimulationResult run_preset(const std::string& name,
                            const std::filesystem::path& fixtures_dir) {
  Scenario sc = load_scenario_file(fixtures_dir / (name + ".json"));
  if (sc.name.empty()) sc.name = name;
  return run_scenario(sc);
}

SimulationResult replay_dataset(const std::filesystem::path& dataset_path,
                                const FirewallConfig& cfg) {
  Dataset ds = read_dataset(dataset_path);
  bool is_malicious = ds.spec.kind == WorkloadSpec::Kind::malicious;

  Firewall firewall(cfg);
  SimulationResult result;
  result.records.reserve(ds.events.size());
  for (const RequestEvent& ev : ds.events) {
    firewall.advance_time(ev.send_time);
    Verdict verdict = firewall.validate(ev.token, ev.resubmit, ev.send_time);
    result.records.push_back({ev, is_malicious, verdict});
  }

  Scenario echo;
  echo.name = "replay:" + dataset_path.filename().string();
  echo.seed = ds.spec.seed;
  echo.firewall = cfg;
  if (is_malicious) {
    echo.malicious = ds.spec;
  } else {
    echo.benign = ds.spec;
  }
  result.report = build_report(echo, result.records);
  return result;
}

SimulationReport build_report(const Scenario& sc,
                              const std::vector<SimulationRecord>& records) {
  SimulationReport report;
  report.scenario = sc;
  report.requests = static_cast<std::int64_t>(records.size());
  for (const SimulationRecord& rec : records) {
    UserOutcome& user = report.per_user[rec.event.user_id];
    user.total += 1;
    user.is_malicious = rec.is_malicious;
    if (rec.verdict.accepted()) {
      report.accepted += 1;
      user.accepted += 1;
      report.accepted_per_device[rec.event.device_id] += 1;
    } else {
      report.rejected += 1;
      report.rejects_by_reason[to_string(rec.verdict.reason)] += 1;
      if (!user.first_error_index) user.first_error_index = rec.event.request_index;
    }
  }
  report.failed_fraction =
      report.requests > 0
          ? static_cast<double>(report.rejected) / static_cast<double>(report.requests)
          : 0.0;
  return report;
}

void write_report_json(const SimulationReport& report,
                       const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["scenario"] = scenario_to_json(report.scenario);
  doc["totals"] = {
      {"requests", report.requests},
      {"accepted", report.accepted},
      {"rejected", report.rejected},
      {"failed_fraction", report.failed_fraction},
  };
  doc["rejects_by_reason"] = report.rejects_by_reason;
  doc["accepted_per_device"] = report.accepted_per_device;
  nlohmann::json users = nlohmann::json::object();
  for (const auto& [id, u] : report.per_user) {
    nlohmann::json entry;
    entry["total"] = u.total;
    entry["accepted"] = u.accepted;
    entry["first_error_index"] =
        u.first_error_index ? nlohmann::json(*u.first_error_index)
                            : nlohmann::json(nullptr);
    entry["is_malicious"] = u.is_malicious;
    users[id] = std::move(entry);
  }
  doc["per_user"] = std::move(users);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open report file for writing: " + path.string());
  out << doc.dump(2) << '\n';
  if (!out.flush()) throw IoError("failed writing report file: " + path.string());
}

void write_records_csv(const std::vector<SimulationRecord>& records,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open record log for writing: " + path.string());
  out << "send_time,user_id,device_id,is_malicious,decision,reason,request_index\n";
  for (const SimulationRecord& rec : records) {
    out << rec.event.send_time << ',' << rec.event.user_id << ',' << rec.event.device_id
        << ',' << (rec.is_malicious ? "true" : "false") << ','
        << (rec.verdict.accepted() ? "accept" : "reject") << ','
        << to_string(rec.verdict.reason) << ',' << rec.event.request_index << '\n';
  }
  if (!out.flush()) throw IoError("failed writing record log: " + path.string());
}

}  // namespace spare
