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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "spare/errors.hpp"
#include "spare/time_util.hpp"
#include "spare/token_codec.hpp"
#include "spare/workload.hpp"

using namespace spare;

namespace {

constexpr std::int64_t kDay0 = 1709942400;  // 2024-03-09T00:00:00Z

KeyMaterial demo_keys() {
  return KeyMaterial::from_hex("000102030405060708090a0b0c0d0e0f",
                               "101112131415161718191a1b1c1d1e1f");
}

WorkloadSpec benign_spec(int n_users, std::uint64_t seed) {
  WorkloadSpec spec;
  spec.kind = WorkloadSpec::Kind::benign;
  spec.n_users = n_users;
  spec.seed = seed;
  return spec;
}

WorkloadSpec malicious_spec(int n_users, int n_devices, std::uint64_t seed) {
  WorkloadSpec spec;
  spec.kind = WorkloadSpec::Kind::malicious;
  spec.n_users = n_users;
  spec.n_devices = n_devices;
  spec.seed = seed;
  return spec;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("default hourly weights are a normalized daytime profile") {
  const auto w = default_hourly_weights();
  double total = 0.0;
  for (double v : w) {
    CHECK(v > 0.0);
    total += v;
  }
  CHECK(std::abs(total - 1.0) <= 1e-9);
  // Mid-morning beats the small hours.
  CHECK(w[10] > w[3]);
  CHECK(w[11] > w[0]);
}

TEST_CASE("spec validation rejects out-of-range fields") {
  CHECK_NOTHROW(benign_spec(10, 1).validate());

  WorkloadSpec s = benign_spec(0, 1);
  CHECK_THROWS_AS(s.validate(), ConfigError);

  s = benign_spec(10, 1);
  s.req_min = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);

  s = benign_spec(10, 1);
  s.req_min = 10;
  s.req_max = 9;
  CHECK_THROWS_AS(s.validate(), ConfigError);

  s = benign_spec(10, 1);
  s.hourly_weights[3] = -0.1;
  CHECK_THROWS_AS(s.validate(), ConfigError);

  s = benign_spec(10, 1);
  s.hourly_weights[3] += 0.5;  // no longer sums to 1
  CHECK_THROWS_AS(s.validate(), ConfigError);

  s = benign_spec(10, 1);
  s.min_gap_seconds = -1;
  CHECK_THROWS_AS(s.validate(), ConfigError);

  s = benign_spec(10, 1);
  s.n_devices = 3;
  CHECK_THROWS_AS(s.validate(), ConfigError);

  CHECK_THROWS_AS(malicious_spec(10, 0, 1).validate(), ConfigError);
  CHECK_THROWS_AS(malicious_spec(10, 11, 1).validate(), ConfigError);
  CHECK_NOTHROW(malicious_spec(10, 10, 1).validate());

  for (const char* day : {"2024-13-01", "2024-02-30", "2023-02-29", "24-1-1",
                          "2024/03/09", "20240309", ""}) {
    s = benign_spec(10, 1);
    s.day = day;
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }

  s = benign_spec(10, 1);
  s.day = "2024-02-29";  // leap day is real
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("day_start anchors the configured utc date") {
  WorkloadSpec s = benign_spec(1, 1);
  CHECK(s.day_start() == kDay0);
  s.day = "1970-01-01";
  CHECK(s.day_start() == 0);
  s.day = "2024-03-10";
  CHECK(s.day_start() == kDay0 + kSecondsPerDay);
}

TEST_CASE("request times respect the hour profile, the gap, and the day bounds") {
  WorkloadSpec spec = benign_spec(1, 9);

  SUBCASE("degenerate profile pins every request into one hour") {
    spec.hourly_weights.fill(0.0);
    spec.hourly_weights[9] = 1.0;
    SplitMix64 rng(123);
    const auto times = sample_request_times(40, spec, rng);
    REQUIRE(times.size() == 40);
    for (std::size_t i = 0; i < times.size(); ++i) {
      CHECK(times[i] >= kDay0 + 9 * kSecondsPerHour);
      CHECK(times[i] < kDay0 + 10 * kSecondsPerHour);
      if (i > 0) CHECK(times[i] - times[i - 1] >= spec.min_gap_seconds);
    }
  }

  SUBCASE("default profile stays inside the day and keeps the gap") {
    SplitMix64 rng(5);
    const auto times = sample_request_times(45, spec, rng);
    for (std::size_t i = 0; i < times.size(); ++i) {
      CHECK(times[i] >= kDay0);
      CHECK(times[i] < kDay0 + kSecondsPerDay);
      if (i > 0) CHECK(times[i] - times[i - 1] >= spec.min_gap_seconds);
    }
  }

  SUBCASE("an impossible packing is detected up front") {
    spec.hourly_weights.fill(0.0);
    spec.hourly_weights[9] = 1.0;
    spec.min_gap_seconds = 60;
    SplitMix64 rng(1);
    CHECK_THROWS_AS(sample_request_times(100, spec, rng), InfeasibleSpec);
    CHECK_THROWS_AS(sample_request_times(4000, spec, rng), InfeasibleSpec);
  }
}

TEST_CASE("benign generation shapes one day of tokened traffic") {
  WorkloadSpec spec = benign_spec(30, 2024);
  const Dataset ds = gen_benign(spec, demo_keys());

  std::map<std::string, std::vector<const RequestEvent*>> by_user;
  for (const RequestEvent& ev : ds.events) by_user[ev.user_id].push_back(&ev);
  CHECK(by_user.size() == 30);

  std::set<std::string> devices;
  for (auto& [user, events] : by_user) {
    const std::size_t n = events.size();
    CHECK(n >= 25);
    CHECK(n <= 45);
    devices.insert(events.front()->device_id);
    for (std::size_t k = 0; k < n; ++k) {
      const RequestEvent& ev = *events[k];
      CHECK(ev.device_id == events.front()->device_id);
      CHECK_FALSE(ev.resubmit);
      REQUIRE(ev.token.has_value());
      const OpenResult r = open_token(*ev.token, demo_keys());
      REQUIRE(r.payload.has_value());
      CHECK(r.payload->timestamp_utc == ev.send_time);
      CHECK(r.payload->device_id == ev.device_id);
    }
  }
  // One private device per user.
  CHECK(devices.size() == 30);

  // Events are globally time-sorted and per-user indices follow time order.
  for (std::size_t i = 1; i < ds.events.size(); ++i) {
    CHECK(ds.events[i - 1].send_time <= ds.events[i].send_time);
  }
  for (auto& [user, events] : by_user) {
    for (std::size_t k = 0; k < events.size(); ++k) {
      CHECK(events[k]->request_index == static_cast<int>(k) + 1);
      if (k > 0) CHECK(events[k]->send_time > events[k - 1]->send_time);
    }
  }
}

TEST_CASE("generation is deterministic in the seed") {
  WorkloadSpec spec = benign_spec(10, 77);
  const Dataset a = gen_benign(spec, demo_keys());
  const Dataset b = gen_benign(spec, demo_keys());
  CHECK(a.events == b.events);

  spec.seed = 78;
  const Dataset c = gen_benign(spec, demo_keys());
  CHECK_FALSE(a.events == c.events);
}

TEST_CASE("a pinned request count is honored exactly") {
  WorkloadSpec spec = benign_spec(5, 3);
  spec.req_min = 30;
  spec.req_max = 30;
  const Dataset ds = gen_benign(spec, demo_keys());
  std::map<std::string, int> counts;
  for (const RequestEvent& ev : ds.events) counts[ev.user_id] += 1;
  for (auto& [user, n] : counts) CHECK(n == 30);
}

TEST_CASE("request volume and hour shape match the spec at scale") {
  WorkloadSpec spec = benign_spec(300, 2025);
  const Dataset ds = gen_benign(spec, demo_keys());

  const double mean =
      static_cast<double>(ds.events.size()) / static_cast<double>(spec.n_users);
  CHECK(mean == doctest::Approx(35.0).epsilon(0.02));

  std::array<double, 24> histogram{};
  for (const RequestEvent& ev : ds.events) {
    histogram[static_cast<std::size_t>(hour_of_day(ev.send_time))] += 1.0;
  }
  const auto weights = default_hourly_weights();
  for (int h = 0; h < 24; ++h) {
    const double got = histogram[static_cast<std::size_t>(h)] /
                       static_cast<double>(ds.events.size());
    CHECK(std::abs(got - weights[static_cast<std::size_t>(h)]) < 0.02);
  }
}

TEST_CASE("malicious demand is pinned round-robin onto the device pool") {
  const Dataset ds = gen_malicious_demand(malicious_spec(12, 5, 6));

  std::map<std::string, std::string> user_device;
  for (const RequestEvent& ev : ds.events) {
    CHECK_FALSE(ev.token.has_value());
    user_device[ev.user_id] = ev.device_id;
  }
  CHECK(user_device.size() == 12);
  CHECK(user_device.at("muser0") == "ATKdev0");
  CHECK(user_device.at("muser4") == "ATKdev4");
  CHECK(user_device.at("muser5") == "ATKdev0");
  CHECK(user_device.at("muser11") == "ATKdev1");
}

TEST_CASE("generators refuse a spec of the wrong kind") {
  CHECK_THROWS_AS(gen_benign(malicious_spec(5, 2, 1), demo_keys()), ConfigError);
  CHECK_THROWS_AS(gen_malicious_demand(benign_spec(5, 1)), ConfigError);
}

TEST_CASE("datasets round trip through csv with their sidecar spec") {
  const WorkloadSpec spec = benign_spec(8, 99);
  const Dataset ds = gen_benign(spec, demo_keys());

  const auto path = temp_file("spare_test_dataset.csv");
  write_dataset(ds, path);
  const Dataset back = read_dataset(path);
  CHECK(back.spec == ds.spec);
  CHECK(back.events == ds.events);

  const Dataset mal = gen_malicious_demand(malicious_spec(6, 2, 5));
  write_dataset(mal, path);
  const Dataset mal_back = read_dataset(path);
  CHECK(mal_back.spec == mal.spec);
  CHECK(mal_back.events == mal.events);
}

TEST_CASE("same seed writes byte-identical dataset files") {
  const WorkloadSpec spec = benign_spec(8, 99);
  const auto p1 = temp_file("spare_test_ds_a.csv");
  const auto p2 = temp_file("spare_test_ds_b.csv");
  write_dataset(gen_benign(spec, demo_keys()), p1);
  write_dataset(gen_benign(spec, demo_keys()), p2);

  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  CHECK(slurp(p1) == slurp(p2));

  auto meta = [](std::filesystem::path p) {
    p += ".meta.json";
    return p;
  };
  CHECK(slurp(meta(p1)) == slurp(meta(p2)));
}

TEST_CASE("reader rejects malformed dataset files") {
  const auto path = temp_file("spare_test_bad.csv");
  const auto meta = temp_file("spare_test_bad.csv.meta.json");

  SUBCASE("missing sidecar") {
    std::ofstream(path) << "user_id,device_id,send_time,request_index,token,resubmit\n";
    std::filesystem::remove(meta);
    CHECK_THROWS_AS(read_dataset(path), IoError);
  }

  std::ofstream(meta) << R"({"kind":"benign","n_users":1,"day":"2024-03-09"})";

  SUBCASE("wrong header") {
    std::ofstream(path) << "a,b,c\n";
    CHECK_THROWS_AS(read_dataset(path), SchemaError);
  }
  SUBCASE("wrong field count") {
    std::ofstream(path) << "user_id,device_id,send_time,request_index,token,resubmit\n"
                        << "u,d,1,1,tok\n";
    CHECK_THROWS_AS(read_dataset(path), SchemaError);
  }
  SUBCASE("non-numeric time") {
    std::ofstream(path) << "user_id,device_id,send_time,request_index,token,resubmit\n"
                        << "u,d,noon,1,tok,false\n";
    CHECK_THROWS_AS(read_dataset(path), SchemaError);
  }
  SUBCASE("bad resubmit flag") {
    std::ofstream(path) << "user_id,device_id,send_time,request_index,token,resubmit\n"
                        << "u,d,1,1,tok,maybe\n";
    CHECK_THROWS_AS(read_dataset(path), SchemaError);
  }
  SUBCASE("missing file") {
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_dataset(path), IoError);
  }
}
