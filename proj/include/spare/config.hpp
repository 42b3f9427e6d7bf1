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

#ifndef SPARE_CONFIG_HPP_
#define SPARE_CONFIG_HPP_

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "spare/gateway.hpp"
#include "spare/sim.hpp"

namespace spare {

// JSON configuration for every runnable thing: workload specs, firewall,
// adversary, whole scenarios, and the HTTP service. Unknown keys are
// rejected so a typo cannot silently fall back to a default. Key material is
// given as key_hex and iv_hex; SPARE_KEY_HEX and SPARE_IV_HEX environment
// variables override both file values when set.

nlohmann::json workload_spec_to_json(const WorkloadSpec& spec);
WorkloadSpec workload_spec_from_json(const nlohmann::json& j);
WorkloadSpec workload_spec_from_json_text(const std::string& text);

nlohmann::json firewall_config_to_json(const FirewallConfig& cfg);
FirewallConfig firewall_config_from_json(const nlohmann::json& j);

nlohmann::json adversary_spec_to_json(const AdversarySpec& spec);
AdversarySpec adversary_spec_from_json(const nlohmann::json& j);

nlohmann::json scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json service_config_to_json(const ServiceConfig& cfg);
ServiceConfig service_config_from_json(const nlohmann::json& j);

/// Throws IoError if unreadable, ConfigError if not valid JSON.
nlohmann::json load_json_file(const std::filesystem::path& path);

Scenario load_scenario_file(const std::filesystem::path& path);
ServiceConfig load_service_config_file(const std::filesystem::path& path);

/// Applies SPARE_KEY_HEX / SPARE_IV_HEX when present in the environment.
void apply_env_key_overrides(KeyMaterial& keys);

}  // namespace spare

#endif  // SPARE_CONFIG_HPP_
