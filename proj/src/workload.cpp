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

#include "spare/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "spare/config.hpp"
#include "spare/errors.hpp"
#include "spare/time_util.hpp"

namespace spare {

namespace {

constexpr int kMaxPlacementAttempts = 10000;
constexpr char kDatasetHeader[] = "user_id,device_id,send_time,request_index,token,resubmit";

void sort_events(std::vector<RequestEvent>& events) {
  std::sort(events.begin(), events.end(),
            [](const RequestEvent& a, const RequestEvent& b) {
              if (a.send_time != b.send_time) return a.send_time < b.send_time;
              if (a.user_id != b.user_id) return a.user_id < b.user_id;
              return a.request_index < b.request_index;
            });
}

int pick_hour(const std::array<double, 24>& weights, double total, SplitMix64& rng) {
  double u = rng.next_double() * total;
  double cum = 0.0;
  for (int h = 0; h < 24; ++h) {
    cum += weights[h];
    if (u < cum) return h;
  }
  // Only reachable through floating point rounding at the very top of the
  // range; land in the last positive-weight hour.
  for (int h = 23; h >= 0; --h) {
    if (weights[h] > 0) return h;
  }
  return 23;
}

int draw_request_count(const WorkloadSpec& spec, SplitMix64& rng) {
  auto span = static_cast<std::uint64_t>(spec.req_max - spec.req_min + 1);
  return spec.req_min + static_cast<int>(rng.bounded(span));
}

std::int64_t parse_int_field(std::string_view s, const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw SchemaError(std::string("dataset field is not an integer: ") + what);
  }
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

std::array<double, 24> default_hourly_weights() {
  // Minimal overnight, morning ramp to a 9-11 AM peak, evening decline.
  std::array<double, 24> w = {1.0, 0.7, 0.5, 0.4, 0.5, 1.0, 2.5, 4.5, 6.5, 8.0, 8.0, 7.5,
                              6.5, 6.0, 5.5, 5.5, 6.0, 6.5, 6.0, 5.0, 4.0, 3.0, 2.0, 1.4};
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return w;
}

void WorkloadSpec::validate() const {
  if (n_users < 1) throw ConfigError("n_users must be at least 1");
  if (req_min < 1 || req_max < req_min) {
    throw ConfigError("request count range requires 1 <= req_min <= req_max");
  }
  double total = 0.0;
  for (double w : hourly_weights) {
    if (!(w >= 0.0)) throw ConfigError("hourly weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("hourly weights must be normalized to sum 1");
  }
  if (min_gap_seconds < 0) throw ConfigError("min_gap_seconds must be >= 0");
  if (!parse_utc_date(day)) throw ConfigError("day must be a valid YYYY-MM-DD date");
  if (kind == Kind::malicious) {
    if (n_devices < 1 || n_devices > n_users) {
      throw ConfigError("malicious workload requires 1 <= n_devices <= n_users");
    }
  } else if (n_devices != 0) {
    throw ConfigError("benign workload must leave n_devices at 0");
  }
}

std::int64_t WorkloadSpec::day_start() const {
  auto start = parse_utc_date(day);
  if (!start) throw ConfigError("day must be a valid YYYY-MM-DD date");
  return *start;
}

std::vector<std::int64_t> sample_request_times(int n, const WorkloadSpec& spec,
                                               SplitMix64& rng) {
  double total = 0.0;
  std::int64_t active_seconds = 0;
  for (double w : spec.hourly_weights) {
    total += w;
    if (w > 0) active_seconds += kSecondsPerHour;
  }
  if (n > active_seconds ||
      static_cast<std::int64_t>(n) * spec.min_gap_seconds > active_seconds) {
    throw InfeasibleSpec("requested times cannot fit the active hours");
  }

  const std::int64_t day0 = spec.day_start();
  std::set<std::int64_t> chosen;
  for (int i = 0; i < n; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
      int hour = pick_hour(spec.hourly_weights, total, rng);
      std::int64_t t = day0 + hour * kSecondsPerHour +
                       static_cast<std::int64_t>(rng.bounded(kSecondsPerHour));
      if (chosen.count(t) != 0) continue;
      auto next = chosen.lower_bound(t);
      if (next != chosen.end() && *next - t < spec.min_gap_seconds) continue;
      if (next != chosen.begin() && t - *std::prev(next) < spec.min_gap_seconds) continue;
      chosen.insert(t);
      placed = true;
      break;
    }
    if (!placed) {
      throw InfeasibleSpec("resampling budget exhausted while spacing requests");
    }
  }
  return {chosen.begin(), chosen.end()};
}

Dataset gen_benign(const WorkloadSpec& spec, const KeyMaterial& keys) {
  spec.validate();
  if (spec.kind != WorkloadSpec::Kind::benign) {
    throw ConfigError("gen_benign requires a benign workload spec");
  }
  Dataset ds;
  ds.spec = spec;
  for (int i = 0; i < spec.n_users; ++i) {
    std::string user = benign_user_id(i);
    std::string device = benign_device_id(i);
    SplitMix64 rng = SplitMix64::for_stream(spec.seed, user);
    int count = draw_request_count(spec, rng);
    std::vector<std::int64_t> times = sample_request_times(count, spec, rng);
    for (std::size_t k = 0; k < times.size(); ++k) {
      RequestEvent ev;
      ev.user_id = user;
      ev.device_id = device;
      ev.send_time = times[k];
      ev.token = mint_token(TokenPayload{times[k], device}, keys);
      ev.request_index = static_cast<int>(k) + 1;
      ds.events.push_back(std::move(ev));
    }
  }
  sort_events(ds.events);
  return ds;
}

Dataset gen_malicious_demand(const WorkloadSpec& spec) {
  spec.validate();
  if (spec.kind != WorkloadSpec::Kind::malicious) {
    throw ConfigError("gen_malicious_demand requires a malicious workload spec");
  }
  Dataset ds;
  ds.spec = spec;
  for (int i = 0; i < spec.n_users; ++i) {
    std::string user = malicious_user_id(i);
    std::string device = attacker_device_id(i % spec.n_devices);
    SplitMix64 rng = SplitMix64::for_stream(spec.seed, user);
    int count = draw_request_count(spec, rng);
    std::vector<std::int64_t> times = sample_request_times(count, spec, rng);
    for (std::size_t k = 0; k < times.size(); ++k) {
      RequestEvent ev;
      ev.user_id = user;
      ev.device_id = device;
      ev.send_time = times[k];
      ev.request_index = static_cast<int>(k) + 1;
      ds.events.push_back(std::move(ev));
    }
  }
  sort_events(ds.events);
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open dataset file for writing: " + path.string());
  out << kDatasetHeader << '\n';
  for (const RequestEvent& ev : ds.events) {
    out << ev.user_id << ',' << ev.device_id << ',' << ev.send_time << ','
        << ev.request_index << ',' << (ev.token ? ev.token->value : "") << ','
        << (ev.resubmit ? "true" : "false") << '\n';
  }
  if (!out.flush()) throw IoError("failed writing dataset file: " + path.string());

  std::filesystem::path meta = path;
  meta += ".meta.json";
  std::ofstream mout(meta, std::ios::binary);
  if (!mout) throw IoError("cannot open sidecar file for writing: " + meta.string());
  mout << workload_spec_to_json(ds.spec).dump(2) << '\n';
  if (!mout.flush()) throw IoError("failed writing sidecar file: " + meta.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file: " + path.string());

  std::filesystem::path meta = path;
  meta += ".meta.json";
  std::ifstream min(meta, std::ios::binary);
  if (!min) throw IoError("cannot open sidecar file: " + meta.string());
  std::stringstream meta_buf;
  meta_buf << min.rdbuf();

  Dataset ds;
  ds.spec = workload_spec_from_json_text(meta_buf.str());

  std::string line;
  if (!std::getline(in, line) || line != kDatasetHeader) {
    throw SchemaError("dataset header mismatch in " + path.string());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> fields = split_fields(line);
    if (fields.size() != 6) {
      throw SchemaError("dataset row does not have 6 fields in " + path.string());
    }
    RequestEvent ev;
    ev.user_id = std::string(fields[0]);
    ev.device_id = std::string(fields[1]);
    ev.send_time = parse_int_field(fields[2], "send_time");
    ev.request_index = static_cast<int>(parse_int_field(fields[3], "request_index"));
    if (!fields[4].empty()) ev.token = Token{std::string(fields[4])};
    if (fields[5] == "true") {
      ev.resubmit = true;
    } else if (fields[5] == "false") {
      ev.resubmit = false;
    } else {
      throw SchemaError("dataset resubmit field must be true or false");
    }
    ds.events.push_back(std::move(ev));
  }
  return ds;
}

std::string benign_user_id(int user_index) { return "user" + std::to_string(user_index); }

std::string benign_device_id(int user_index) {
  return "PWAdev" + std::to_string(user_index);
}

std::string malicious_user_id(int user_index) {
  return "muser" + std::to_string(user_index);
}

std::string attacker_device_id(int device_index) {
  return "ATKdev" + std::to_string(device_index);
}

}  // namespace spare
