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

#include "spare/adversary.hpp"

#include <fstream>

#include "spare/errors.hpp"
#include "spare/time_util.hpp"
#include "spare/workload.hpp"

namespace spare {

namespace {

struct StrategyName {
  Strategy strategy;
  const char* name;
};

constexpr StrategyName kStrategyNames[] = {
    {Strategy::static_url, "static_url"},
    {Strategy::single_token, "single_token"},
    {Strategy::random_pool, "random_pool"},
    {Strategy::round_robin, "round_robin"},
};

}  // namespace

const char* to_string(Strategy s) {
  for (const auto& entry : kStrategyNames) {
    if (entry.strategy == s) return entry.name;
  }
  return "unknown";
}

std::optional<Strategy> strategy_from_string(std::string_view name) {
  for (const auto& entry : kStrategyNames) {
    if (name == entry.name) return entry.strategy;
  }
  return std::nullopt;
}

void AdversarySpec::validate() const {
  if (n_harvesters < 1) throw ConfigError("n_harvesters must be at least 1");
  if (harvest_interval_seconds < 1) {
    throw ConfigError("harvest_interval_seconds must be positive");
  }
}

void TokenStore::append_entry(std::int64_t now, int source, const KeyMaterial& keys) {
  StoreEntry e;
  e.minted_at = now;
  e.source_device = attacker_device_id(source);
  e.token = mint_token(TokenPayload{now, e.source_device}, keys);
  available_[source].push_back(entries_.size());
  entries_.push_back(std::move(e));
  deleted_.push_back(0);
  ++live_count_;
}

void TokenStore::harvest_tick(std::int64_t now, const AdversarySpec& spec,
                              const KeyMaterial& keys) {
  for (int h = 0; h < spec.n_harvesters; ++h) {
    append_entry(now, h, keys);
  }
}

void TokenStore::preseed_single(std::int64_t now, const KeyMaterial& keys) {
  append_entry(now, 0, keys);
}

std::optional<ServedToken> TokenStore::serve(const AdversarySpec& spec, SplitMix64& rng) {
  switch (spec.strategy) {
    case Strategy::static_url:
      return std::nullopt;

    case Strategy::single_token: {
      if (entries_.empty()) throw StoreEmpty("single_token store has no token");
      StoreEntry& e = entries_.front();
      e.used = true;
      return ServedToken{e.token, e.minted_at, e.source_device};
    }

    case Strategy::random_pool: {
      if (entries_.empty()) throw StoreEmpty("random_pool store is empty");
      StoreEntry& e = entries_[rng.bounded(entries_.size())];
      e.used = true;
      return ServedToken{e.token, e.minted_at, e.source_device};
    }

    case Strategy::round_robin: {
      for (int k = 0; k < spec.n_harvesters; ++k) {
        int source = (rr_cursor_ + k) % spec.n_harvesters;
        auto it = available_.find(source);
        if (it == available_.end() || it->second.empty()) continue;
        std::size_t idx = it->second.back();  // freshest unused for this device
        it->second.pop_back();
        StoreEntry& e = entries_[idx];
        e.used = true;
        if (spec.delete_after_use) {
          deleted_[idx] = 1;
          --live_count_;
        }
        rr_cursor_ = (source + 1) % spec.n_harvesters;
        return ServedToken{e.token, e.minted_at, e.source_device};
      }
      throw StoreEmpty("round_robin store has no unused token");
    }
  }
  throw StoreEmpty("unreachable");
}

StoreStats TokenStore::stats() const {
  StoreStats s;
  s.live_entries = live_count_;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const StoreEntry& e = entries_[i];
    s.minted_per_source[e.source_device] += 1;
    if (e.used) s.used_per_source[e.source_device] += 1;
    s.mints_per_hour[static_cast<std::size_t>(hour_of_day(e.minted_at))] += 1;
  }
  return s;
}

void TokenStore::dump_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open store dump for writing: " + path.string());
  out << "token,minted_at,source_device,used\n";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (deleted_[i]) continue;
    const StoreEntry& e = entries_[i];
    out << e.token.value << ',' << e.minted_at << ',' << e.source_device << ','
        << (e.used ? "true" : "false") << '\n';
  }
  if (!out.flush()) throw IoError("failed writing store dump: " + path.string());
}

std::int64_t TokenStore::live_size() const { return live_count_; }

}  // namespace spare
