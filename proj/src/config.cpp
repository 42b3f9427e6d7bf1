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

#include "spare/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "spare/errors.hpp"

namespace spare {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = std::any_of(allowed.begin(), allowed.end(),
                             [&](const char* k) { return it.key() == k; });
    if (!known) {
      throw ConfigError(std::string(what) + " has unknown key: " + it.key());
    }
  }
}

template <typename T>
T get_field(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field has wrong type: ") + key);
  }
}

template <typename T>
T require_field(const json& j, const char* key, const char* what) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(std::string(what) + " is missing required key: " + key);
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field has wrong type: ") + key);
  }
}

std::string hex_encode(const std::array<unsigned char, 16>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(32);
  for (unsigned char b : bytes) {
    out += digits[b >> 4];
    out += digits[b & 0xf];
  }
  return out;
}

bool all_zero(const std::array<unsigned char, 16>& bytes) {
  return std::all_of(bytes.begin(), bytes.end(), [](unsigned char b) { return b == 0; });
}

void require_key_material(const KeyMaterial& keys, const std::string& where) {
  if (all_zero(keys.key) && all_zero(keys.iv)) {
    throw ConfigError("no key material configured in " + where +
                      " (set key_hex/iv_hex or SPARE_KEY_HEX/SPARE_IV_HEX)");
  }
}

}  // namespace

json workload_spec_to_json(const WorkloadSpec& spec) {
  json j;
  j["kind"] = spec.kind == WorkloadSpec::Kind::benign ? "benign" : "malicious";
  j["n_users"] = spec.n_users;
  if (spec.kind == WorkloadSpec::Kind::malicious) j["n_devices"] = spec.n_devices;
  j["req_min"] = spec.req_min;
  j["req_max"] = spec.req_max;
  j["hourly_weights"] = spec.hourly_weights;
  j["day"] = spec.day;
  j["min_gap_seconds"] = spec.min_gap_seconds;
  j["seed"] = spec.seed;
  return j;
}

WorkloadSpec workload_spec_from_json(const json& j) {
  check_keys(j,
             {"kind", "n_users", "n_devices", "req_min", "req_max", "hourly_weights",
              "day", "min_gap_seconds", "seed"},
             "workload spec");
  WorkloadSpec spec;
  std::string kind = require_field<std::string>(j, "kind", "workload spec");
  if (kind == "benign") {
    spec.kind = WorkloadSpec::Kind::benign;
  } else if (kind == "malicious") {
    spec.kind = WorkloadSpec::Kind::malicious;
  } else {
    throw ConfigError("workload kind must be benign or malicious");
  }
  spec.n_users = require_field<int>(j, "n_users", "workload spec");
  spec.n_devices = get_field<int>(j, "n_devices", 0);
  spec.req_min = get_field<int>(j, "req_min", spec.req_min);
  spec.req_max = get_field<int>(j, "req_max", spec.req_max);
  if (auto it = j.find("hourly_weights"); it != j.end()) {
    if (!it->is_array() || it->size() != 24) {
      throw ConfigError("hourly_weights must be an array of 24 numbers");
    }
    for (std::size_t h = 0; h < 24; ++h) {
      if (!(*it)[h].is_number()) {
        throw ConfigError("hourly_weights must be an array of 24 numbers");
      }
      spec.hourly_weights[h] = (*it)[h].get<double>();
    }
  }
  spec.day = get_field<std::string>(j, "day", spec.day);
  spec.min_gap_seconds = get_field<std::int64_t>(j, "min_gap_seconds", spec.min_gap_seconds);
  spec.seed = get_field<std::uint64_t>(j, "seed", spec.seed);

  // Weights are stored normalized; configs may give any non-negative scale.
  // Already-normalized input passes through untouched so write/read round
  // trips reproduce the exact doubles.
  double total = 0.0;
  for (double w : spec.hourly_weights) {
    if (!(w >= 0.0)) throw ConfigError("hourly weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError("hourly weights must not all be zero");
  if (std::abs(total - 1.0) > 1e-9) {
    for (double& w : spec.hourly_weights) w /= total;
  }

  spec.validate();
  return spec;
}

WorkloadSpec workload_spec_from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("workload spec sidecar is not valid JSON");
  return workload_spec_from_json(j);
}

json firewall_config_to_json(const FirewallConfig& cfg) {
  json j;
  j["mode"] = cfg.mode == Mode::timestamp_only ? "timestamp_only" : "timestamp_device";
  j["time_window_seconds"] = cfg.time_window_seconds;
  j["daily_threshold"] = cfg.daily_threshold;
  j["future_skew_seconds"] = cfg.future_skew_seconds;
  j["simultaneity"] = {
      {"enabled", cfg.simultaneity.enabled},
      {"window_seconds", cfg.simultaneity.window_seconds},
      {"min_count", cfg.simultaneity.min_count},
  };
  j["cooldown_policy"] = cfg.cooldown_policy == CooldownPolicy::calendar_day_reset
                             ? "calendar_day_reset"
                             : "fixed_duration";
  j["cooldown_seconds"] = cfg.cooldown_seconds;
  j["key_hex"] = hex_encode(cfg.keys.key);
  j["iv_hex"] = hex_encode(cfg.keys.iv);
  return j;
}

FirewallConfig firewall_config_from_json(const json& j) {
  check_keys(j,
             {"mode", "time_window_seconds", "daily_threshold", "future_skew_seconds",
              "simultaneity", "cooldown_policy", "cooldown_seconds", "key_hex", "iv_hex"},
             "firewall config");
  FirewallConfig cfg;
  std::string mode = get_field<std::string>(j, "mode", "timestamp_device");
  if (mode == "timestamp_only") {
    cfg.mode = Mode::timestamp_only;
  } else if (mode == "timestamp_device") {
    cfg.mode = Mode::timestamp_device;
  } else {
    throw ConfigError("firewall mode must be timestamp_only or timestamp_device");
  }
  cfg.time_window_seconds =
      get_field<std::int64_t>(j, "time_window_seconds", cfg.time_window_seconds);
  cfg.daily_threshold = get_field<int>(j, "daily_threshold", cfg.daily_threshold);
  cfg.future_skew_seconds =
      get_field<std::int64_t>(j, "future_skew_seconds", cfg.future_skew_seconds);
  if (auto it = j.find("simultaneity"); it != j.end()) {
    check_keys(*it, {"enabled", "window_seconds", "min_count"}, "simultaneity rule");
    cfg.simultaneity.enabled = get_field<bool>(*it, "enabled", false);
    cfg.simultaneity.window_seconds =
        get_field<std::int64_t>(*it, "window_seconds", cfg.simultaneity.window_seconds);
    cfg.simultaneity.min_count =
        get_field<int>(*it, "min_count", cfg.simultaneity.min_count);
  }
  std::string cooldown = get_field<std::string>(j, "cooldown_policy", "calendar_day_reset");
  if (cooldown == "calendar_day_reset") {
    cfg.cooldown_policy = CooldownPolicy::calendar_day_reset;
  } else if (cooldown == "fixed_duration") {
    cfg.cooldown_policy = CooldownPolicy::fixed_duration;
  } else {
    throw ConfigError("cooldown_policy must be calendar_day_reset or fixed_duration");
  }
  cfg.cooldown_seconds = get_field<std::int64_t>(j, "cooldown_seconds", cfg.cooldown_seconds);

  std::string key_hex = get_field<std::string>(j, "key_hex", "");
  std::string iv_hex = get_field<std::string>(j, "iv_hex", "");
  if (key_hex.empty() != iv_hex.empty()) {
    throw ConfigError("key_hex and iv_hex must be given together");
  }
  if (!key_hex.empty()) {
    try {
      cfg.keys = KeyMaterial::from_hex(key_hex, iv_hex);
    } catch (const InvalidPayload& e) {
      throw ConfigError(std::string("bad key material: ") + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

json adversary_spec_to_json(const AdversarySpec& spec) {
  json j;
  j["strategy"] = to_string(spec.strategy);
  j["n_harvesters"] = spec.n_harvesters;
  j["harvest_interval_seconds"] = spec.harvest_interval_seconds;
  j["delete_after_use"] = spec.delete_after_use;
  return j;
}

AdversarySpec adversary_spec_from_json(const json& j) {
  check_keys(j, {"strategy", "n_harvesters", "harvest_interval_seconds", "delete_after_use"},
             "adversary spec");
  AdversarySpec spec;
  std::string strategy = require_field<std::string>(j, "strategy", "adversary spec");
  auto parsed = strategy_from_string(strategy);
  if (!parsed) throw ConfigError("unknown adversary strategy: " + strategy);
  spec.strategy = *parsed;
  spec.n_harvesters = get_field<int>(j, "n_harvesters", spec.n_harvesters);
  spec.harvest_interval_seconds = get_field<std::int64_t>(j, "harvest_interval_seconds",
                                                          spec.harvest_interval_seconds);
  spec.delete_after_use = get_field<bool>(j, "delete_after_use", spec.delete_after_use);
  spec.validate();
  return spec;
}

json scenario_to_json(const Scenario& sc) {
  json j;
  if (!sc.name.empty()) j["name"] = sc.name;
  j["seed"] = sc.seed;
  if (sc.benign) j["benign"] = workload_spec_to_json(*sc.benign);
  if (sc.malicious) j["malicious"] = workload_spec_to_json(*sc.malicious);
  if (sc.adversary) j["adversary"] = adversary_spec_to_json(*sc.adversary);
  j["firewall"] = firewall_config_to_json(sc.firewall);
  return j;
}

Scenario scenario_from_json(const json& j) {
  check_keys(j, {"name", "seed", "benign", "malicious", "adversary", "firewall"},
             "scenario");
  Scenario sc;
  sc.name = get_field<std::string>(j, "name", "");
  sc.seed = get_field<std::uint64_t>(j, "seed", sc.seed);
  if (auto it = j.find("benign"); it != j.end()) {
    sc.benign = workload_spec_from_json(*it);
  }
  if (auto it = j.find("malicious"); it != j.end()) {
    sc.malicious = workload_spec_from_json(*it);
  }
  if (auto it = j.find("adversary"); it != j.end()) {
    sc.adversary = adversary_spec_from_json(*it);
  }
  auto fw = j.find("firewall");
  if (fw == j.end()) throw ConfigError("scenario is missing required key: firewall");
  sc.firewall = firewall_config_from_json(*fw);
  sc.validate();
  return sc;
}

json service_config_to_json(const ServiceConfig& cfg) {
  json j;
  j["listen_address"] = cfg.listen_address;
  j["firewall"] = firewall_config_to_json(cfg.firewall);
  j["snapshot_path"] = cfg.snapshot_path.string();
  j["snapshot_interval_seconds"] = cfg.snapshot_interval_seconds;
  return j;
}

ServiceConfig service_config_from_json(const json& j) {
  check_keys(j, {"listen_address", "firewall", "snapshot_path", "snapshot_interval_seconds"},
             "service config");
  ServiceConfig cfg;
  cfg.listen_address = get_field<std::string>(j, "listen_address", cfg.listen_address);
  auto fw = j.find("firewall");
  if (fw == j.end()) throw ConfigError("service config is missing required key: firewall");
  cfg.firewall = firewall_config_from_json(*fw);
  cfg.snapshot_path = get_field<std::string>(j, "snapshot_path", "");
  cfg.snapshot_interval_seconds = get_field<std::int64_t>(j, "snapshot_interval_seconds",
                                                          cfg.snapshot_interval_seconds);
  cfg.validate();
  return cfg;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) {
    throw ConfigError("config file is not valid JSON: " + path.string());
  }
  return j;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  Scenario sc = scenario_from_json(load_json_file(path));
  apply_env_key_overrides(sc.firewall.keys);
  require_key_material(sc.firewall.keys, path.string());
  return sc;
}

ServiceConfig load_service_config_file(const std::filesystem::path& path) {
  ServiceConfig cfg = service_config_from_json(load_json_file(path));
  apply_env_key_overrides(cfg.firewall.keys);
  require_key_material(cfg.firewall.keys, path.string());
  return cfg;
}

void apply_env_key_overrides(KeyMaterial& keys) {
  const char* key_hex = std::getenv("SPARE_KEY_HEX");
  const char* iv_hex = std::getenv("SPARE_IV_HEX");
  if (!key_hex && !iv_hex) return;
  if (!key_hex || !iv_hex) {
    throw ConfigError("SPARE_KEY_HEX and SPARE_IV_HEX must be set together");
  }
  try {
    keys = KeyMaterial::from_hex(key_hex, iv_hex);
  } catch (const InvalidPayload& e) {
    throw ConfigError(std::string("bad key material in environment: ") + e.what());
  }
}

}  // namespace spare
