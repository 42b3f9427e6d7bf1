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

#ifndef SPARE_ADVERSARY_HPP_
#define SPARE_ADVERSARY_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spare/rng.hpp"
#include "spare/token_codec.hpp"

namespace spare {

// The adversary runs the real app on a pool of devices, scrapes the tokened
// URLs those devices are issued, and serves them to subscribers. Strategies
// differ in how the central store picks what to hand out, which is exactly
// what separates the attack tiers.

enum class Strategy {
  static_url,    // serve the bare URL, no token at all
  single_token,  // serve one harvested token to everyone, forever
  random_pool,   // uniform over the whole store, duplicates and stale included
  round_robin,   // cycle devices, always the freshest unused token per device
};

const char* to_string(Strategy s);
std::optional<Strategy> strategy_from_string(std::string_view name);

struct AdversarySpec {
  Strategy strategy = Strategy::round_robin;
  int n_harvesters = 5;
  std::int64_t harvest_interval_seconds = 60;
  bool delete_after_use = true;  // round_robin: drop a token once served

  /// Throws ConfigError when any field is out of range.
  void validate() const;
};

struct StoreEntry {
  Token token;
  std::int64_t minted_at = 0;
  std::string source_device;
  bool used = false;
};

struct ServedToken {
  Token token;
  std::int64_t minted_at = 0;
  std::string source_device;
};

struct StoreStats {
  std::map<std::string, std::int64_t> minted_per_source;
  std::map<std::string, std::int64_t> used_per_source;
  std::array<std::int64_t, 24> mints_per_hour{};  // by UTC hour of mint time
  std::int64_t live_entries = 0;                  // minted minus deleted
};

/// The attacker's central URL database.
class TokenStore {
 public:
  /// Mints one token per harvester at time `now`: harvester h contributes
  /// (now, attacker_device_id(h)).
  void harvest_tick(std::int64_t now, const AdversarySpec& spec, const KeyMaterial& keys);

  /// Seeds exactly one token, for the single_token strategy.
  void preseed_single(std::int64_t now, const KeyMaterial& keys);

  /// Picks what the subscriber gets. static_url returns nullopt. Pool
  /// strategies throw StoreEmpty when nothing is available. Serving is
  /// deterministic given the rng state.
  std::optional<ServedToken> serve(const AdversarySpec& spec, SplitMix64& rng);

  StoreStats stats() const;

  /// Writes "token,minted_at,source_device,used" rows for every live entry.
  void dump_csv(const std::filesystem::path& path) const;

  std::int64_t live_size() const;

 private:
  void append_entry(std::int64_t now, int source, const KeyMaterial& keys);

  std::vector<StoreEntry> entries_;  // append order, minted_at ascending
  std::vector<char> deleted_;        // parallel to entries_
  std::map<int, std::vector<std::size_t>> available_;  // per source, oldest first
  int rr_cursor_ = 0;
  std::int64_t live_count_ = 0;
};

}  // namespace spare

#endif  // SPARE_ADVERSARY_HPP_
