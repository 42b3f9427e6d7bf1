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

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "spare/analytics.hpp"
#include "spare/config.hpp"
#include "spare/errors.hpp"
#include "spare/gateway.hpp"
#include "spare/sim.hpp"
#include "spare/time_util.hpp"

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_interrupted{false};

void handle_signal(int) { g_interrupted = true; }

/// Presets resolve to fixture config files. A bare name searches the usual
/// places; anything with a path separator or .json suffix is used as-is.
fs::path resolve_preset(const std::string& name) {
  if (name.find('/') != std::string::npos || name.ends_with(".json")) {
    return name;
  }
  std::vector<fs::path> candidates = {
      fs::path("fixtures") / (name + ".json"),
      fs::path("../fixtures") / (name + ".json"),
  };
  std::error_code ec;
  fs::path exe = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    candidates.push_back(exe.parent_path() / "../../fixtures" / (name + ".json"));
  }
  for (const fs::path& p : candidates) {
    if (fs::exists(p)) return p;
  }
  throw spare::ConfigError("preset not found: " + name);
}

struct SimulateFlags {
  std::string config;
  std::string preset;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> users;
  std::optional<int> devices;
  std::optional<int> threshold;
  std::optional<std::string> mode;
  std::optional<std::string> strategy;
};

spare::Scenario load_simulate_scenario(const SimulateFlags& flags) {
  if (flags.config.empty() == flags.preset.empty()) {
    throw spare::ConfigError("simulate needs exactly one of --config or --preset");
  }
  fs::path path =
      flags.config.empty() ? resolve_preset(flags.preset) : fs::path(flags.config);
  spare::Scenario sc = spare::load_scenario_file(path);
  if (sc.name.empty() && !flags.preset.empty()) sc.name = flags.preset;

  if (flags.seed) sc.seed = *flags.seed;
  if (flags.users) {
    if (sc.malicious) sc.malicious->n_users = *flags.users;
    if (sc.benign) sc.benign->n_users = *flags.users;
  }
  if (flags.devices) {
    if (!sc.malicious) {
      throw spare::ConfigError("--devices needs a malicious workload");
    }
    sc.malicious->n_devices = *flags.devices;
    if (sc.adversary) sc.adversary->n_harvesters = *flags.devices;
  }
  if (flags.threshold) sc.firewall.daily_threshold = *flags.threshold;
  if (flags.mode) {
    if (*flags.mode == "timestamp_only") {
      sc.firewall.mode = spare::Mode::timestamp_only;
    } else if (*flags.mode == "timestamp_device") {
      sc.firewall.mode = spare::Mode::timestamp_device;
    } else {
      throw spare::ConfigError("--mode must be timestamp_only or timestamp_device");
    }
  }
  if (flags.strategy) {
    auto s = spare::strategy_from_string(*flags.strategy);
    if (!s) throw spare::ConfigError("unknown --strategy: " + *flags.strategy);
    if (!sc.adversary) throw spare::ConfigError("--strategy needs an adversary");
    sc.adversary->strategy = *s;
  }
  sc.validate();
  return sc;
}

void print_summary(const spare::SimulationReport& report) {
  std::printf("requests=%lld accepted=%lld rejected=%lld failed=%.2f%%\n",
              static_cast<long long>(report.requests),
              static_cast<long long>(report.accepted),
              static_cast<long long>(report.rejected), report.failed_fraction * 100.0);
  for (const auto& [reason, count] : report.rejects_by_reason) {
    std::printf("  reject %-18s %lld\n", reason.c_str(), static_cast<long long>(count));
  }
}

int cmd_gen(const std::string& config, const std::string& out,
            std::optional<std::uint64_t> seed) {
  nlohmann::json j = spare::load_json_file(config);
  // Benign generation mints tokens, so the workload file may carry
  // key_hex/iv_hex alongside the spec fields.
  std::string key_hex;
  std::string iv_hex;
  if (auto it = j.find("key_hex"); it != j.end()) {
    key_hex = it->get<std::string>();
    j.erase(it);
  }
  if (auto it = j.find("iv_hex"); it != j.end()) {
    iv_hex = it->get<std::string>();
    j.erase(it);
  }
  spare::WorkloadSpec spec = spare::workload_spec_from_json(j);
  if (seed) spec.seed = *seed;

  spare::Dataset ds;
  if (spec.kind == spare::WorkloadSpec::Kind::benign) {
    spare::KeyMaterial keys;
    if (!key_hex.empty() || !iv_hex.empty()) {
      keys = spare::KeyMaterial::from_hex(key_hex, iv_hex);
    }
    spare::apply_env_key_overrides(keys);
    ds = spare::gen_benign(spec, keys);
  } else {
    ds = spare::gen_malicious_demand(spec);
  }
  spare::write_dataset(ds, out);
  std::printf("wrote %zu events to %s\n", ds.events.size(), out.c_str());
  return 0;
}

int cmd_simulate(const SimulateFlags& flags) {
  spare::Scenario sc = load_simulate_scenario(flags);
  spare::SimulationResult res = spare::run_scenario(sc);
  if (!flags.out.empty()) {
    fs::create_directories(flags.out);
    spare::write_report_json(res.report, fs::path(flags.out) / "report.json");
    spare::write_records_csv(res.records, fs::path(flags.out) / "records.csv");
  }
  print_summary(res.report);
  return 0;
}

int cmd_sweep(const std::string& config, const std::string& out,
              std::vector<int> users, std::vector<int> devices,
              std::vector<int> thresholds, std::optional<std::uint64_t> seed) {
  spare::Scenario base = spare::load_scenario_file(config);
  if (seed) base.seed = *seed;
  if (users.empty()) users = {100, 200, 300};
  if (devices.empty()) devices = {10, 20, 30};
  if (thresholds.empty()) thresholds = {30, 35, 40};
  std::vector<spare::GridRow> rows = spare::sweep_grid(users, devices, thresholds, base);
  if (out.empty()) {
    std::printf("users,devices,threshold,total,successful,failed\n");
    for (const spare::GridRow& r : rows) {
      std::printf("%d,%d,%d,%lld,%lld,%lld\n", r.users, r.devices, r.threshold,
                  static_cast<long long>(r.total), static_cast<long long>(r.successful),
                  static_cast<long long>(r.failed));
    }
  } else {
    spare::write_grid_csv(rows, out);
    std::printf("wrote %zu grid rows to %s\n", rows.size(), out.c_str());
  }
  return 0;
}

int cmd_fit(const std::string& input, const std::string& model_name) {
  auto model = spare::model_from_string(model_name);
  if (!model) throw spare::ConfigError("--model must be linear or poly2");
  std::vector<spare::GridRow> rows = spare::read_grid_csv(input);
  spare::RegressionFit fit = *model == spare::Model::linear ? spare::fit_linear(rows)
                                                            : spare::fit_poly2(rows);
  static const char* kTerms[] = {"1",   "U",   "D",   "T",  "U^2",
                                 "U*D", "U*T", "D^2", "D*T", "T^2"};
  std::printf("model=%s rows=%zu\n", spare::to_string(fit.model), rows.size());
  for (std::size_t i = 0; i < fit.coefficients.size(); ++i) {
    std::printf("  beta[%s] = %+.6f\n", kTerms[i], fit.coefficients[i]);
  }
  std::printf("r_squared = %.6f\n", fit.r_squared);
  return 0;
}

int cmd_serve(const std::string& config) {
  spare::ServiceConfig cfg = spare::load_service_config_file(config);
  spare::Gateway gateway(cfg);
  gateway.start();
  std::printf("listening on %s:%d (Ctrl-C to stop)\n", cfg.host().c_str(),
              gateway.port());
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (!g_interrupted) {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
  }
  gateway.stop();
  std::printf("stopped\n");
  return 0;
}

spare::FirewallConfig firewall_from_any_config(const std::string& path) {
  nlohmann::json j = spare::load_json_file(path);
  spare::FirewallConfig cfg;
  if (j.contains("firewall")) {
    cfg = spare::firewall_config_from_json(j["firewall"]);
  } else {
    cfg = spare::firewall_config_from_json(j);
  }
  spare::apply_env_key_overrides(cfg.keys);
  return cfg;
}

int cmd_mint(const std::string& config, const std::string& device,
             std::optional<std::int64_t> at) {
  spare::FirewallConfig cfg = firewall_from_any_config(config);
  std::int64_t t = at ? *at : static_cast<std::int64_t>(std::time(nullptr));
  spare::Token token = spare::mint_token(spare::TokenPayload{t, device}, cfg.keys);
  std::printf("%s\n",
              spare::embed_token("http://localhost/resource", token, false).c_str());
  return 0;
}

int cmd_validate(const std::string& config, const std::string& url,
                 std::optional<std::int64_t> at) {
  spare::FirewallConfig cfg = firewall_from_any_config(config);
  spare::Firewall firewall(cfg);
  std::int64_t t = at ? *at : static_cast<std::int64_t>(std::time(nullptr));
  spare::Verdict v = spare::judge_url(firewall, url, t);
  if (v.accepted()) {
    std::printf("accept\n");
  } else {
    std::printf("reject %s\n", spare::to_string(v.reason));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "spare: token firewall simulator and gateway.\n"
      "Every subcommand is deterministic given its config file and seed;\n"
      "rerunning with the same inputs reproduces the same outputs byte for "
      "byte."};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string input;
  std::string preset;
  std::string model = "linear";
  std::string device;
  std::string url;
  SimulateFlags sim_flags;
  std::vector<int> users_set;
  std::vector<int> devices_set;
  std::vector<int> thresholds_set;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> at;

  CLI::App* gen = app.add_subcommand("gen", "Generate a dataset from a workload config");
  gen->add_option("--config", config, "workload spec JSON")->required();
  gen->add_option("--out", out, "dataset CSV path")->required();
  gen->add_option("--seed", seed, "override the config seed");

  CLI::App* simulate = app.add_subcommand("simulate", "Run a scenario or preset");
  simulate->add_option("--config", sim_flags.config, "scenario JSON");
  simulate->add_option("--preset", sim_flags.preset, "preset name under fixtures/");
  simulate->add_option("--out", sim_flags.out, "directory for report.json + records.csv");
  simulate->add_option("--seed", sim_flags.seed, "override the scenario seed");
  simulate->add_option("--users", sim_flags.users, "override workload n_users");
  simulate->add_option("--devices", sim_flags.devices, "override attack pool size");
  simulate->add_option("--threshold", sim_flags.threshold, "override daily threshold R");
  simulate->add_option("--mode", sim_flags.mode,
                       "firewall mode: timestamp_only or timestamp_device");
  simulate->add_option("--strategy", sim_flags.strategy, "override adversary strategy");

  CLI::App* sweep = app.add_subcommand("sweep", "Run the (users x devices x threshold) grid");
  sweep->add_option("--config", config, "base scenario JSON")->required();
  sweep->add_option("--out", out, "grid CSV path (default: stdout)");
  sweep->add_option("--users", users_set, "user counts (default 100,200,300)")
      ->delimiter(',');
  sweep->add_option("--devices", devices_set, "device counts (default 10,20,30)")
      ->delimiter(',');
  sweep->add_option("--threshold", thresholds_set, "thresholds (default 30,35,40)")
      ->delimiter(',');
  sweep->add_option("--seed", seed, "override the base scenario seed");

  CLI::App* fit = app.add_subcommand("fit", "Fit a regression to a grid CSV");
  fit->add_option("--input", input, "grid CSV (e.g. fixtures/table3.csv)")->required();
  fit->add_option("--model", model, "linear or poly2")
      ->check(CLI::IsMember({"linear", "poly2"}));

  CLI::App* serve = app.add_subcommand("serve", "Run the HTTP gateway");
  serve->add_option("--config", config, "service config JSON")->required();

  CLI::App* mint = app.add_subcommand("mint", "Mint a tokened URL for a device");
  mint->add_option("device_id", device, "device identifier")->required();
  mint->add_option("--config", config, "config holding key material")->required();
  mint->add_option("--at", at, "mint time as unix seconds (default: now)");

  CLI::App* validate = app.add_subcommand("validate", "Judge one URL against a config");
  validate->add_option("url", url, "request URL")->required();
  validate->add_option("--config", config, "config holding the firewall rules")
      ->required();
  validate->add_option("--at", at, "validation time as unix seconds (default: now)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen(config, out, seed);
    if (simulate->parsed()) return cmd_simulate(sim_flags);
    if (sweep->parsed()) {
      return cmd_sweep(config, out, users_set, devices_set, thresholds_set, seed);
    }
    if (fit->parsed()) return cmd_fit(input, model);
    if (serve->parsed()) return cmd_serve(config);
    if (mint->parsed()) return cmd_mint(config, device, at);
    if (validate->parsed()) return cmd_validate(config, url, at);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
