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

#ifndef SPARE_RNG_HPP_
#define SPARE_RNG_HPP_

#include <cstdint>
#include <string_view>

namespace spare {

/// FNV-1a 64-bit hash, used to derive stable stream labels from strings.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// SplitMix64 generator. Chosen for portability: the sequence for a given
/// seed is identical on every platform and toolchain, which keeps datasets
/// and simulations reproducible byte for byte.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, n). Lemire's multiply-shift with rejection,
  /// so the result is unbiased for every n.
  std::uint64_t bounded(std::uint64_t n) {
    unsigned __int128 m =
        static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(n);
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(n);
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Mixes two words into a new seed via one SplitMix64 step each.
  static constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    SplitMix64 g(a);
    g.state_ ^= b;
    std::uint64_t first = g.next();
    return first ^ g.next();
  }

  /// Independent substream for (seed, label), e.g. one stream per user id.
  static SplitMix64 for_stream(std::uint64_t seed, std::string_view label) {
    return SplitMix64(mix(seed, fnv1a64(label)));
  }

 private:
  std::uint64_t state_;
};

}  // namespace spare

#endif  // SPARE_RNG_HPP_
