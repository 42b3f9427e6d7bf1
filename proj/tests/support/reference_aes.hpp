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

#ifndef SPARE_TESTS_SUPPORT_REFERENCE_AES_HPP_
#define SPARE_TESTS_SUPPORT_REFERENCE_AES_HPP_

// Self-contained AES-128-CBC encryptor written from the FIPS-197 spec,
// independent of the production crypto backend. Test oracle only: the suite
// checks it against the NIST SP 800-38A vectors, then checks the production
// path against it on random inputs.

#include <array>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace refaes {

inline std::uint8_t gmul(std::uint8_t a, std::uint8_t b) {
  std::uint8_t p = 0;
  while (b) {
    if (b & 1) p ^= a;
    const bool hi = (a & 0x80) != 0;
    a = static_cast<std::uint8_t>(a << 1);
    if (hi) a ^= 0x1b;
    b >>= 1;
  }
  return p;
}

inline const std::array<std::uint8_t, 256>& sbox() {
  static const std::array<std::uint8_t, 256> table = [] {
    std::array<std::uint8_t, 256> inv{};
    for (int a = 1; a < 256; ++a) {
      for (int b = 1; b < 256; ++b) {
        if (gmul(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)) == 1) {
          inv[static_cast<std::size_t>(a)] = static_cast<std::uint8_t>(b);
          break;
        }
      }
    }
    std::array<std::uint8_t, 256> s{};
    for (int i = 0; i < 256; ++i) {
      std::uint8_t x = inv[static_cast<std::size_t>(i)];
      std::uint8_t y = x;
      for (int k = 0; k < 4; ++k) {
        y = static_cast<std::uint8_t>((y << 1) | (y >> 7));
        x ^= y;
      }
      s[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(x ^ 0x63);
    }
    return s;
  }();
  return table;
}

inline std::array<std::uint8_t, 176> expand_key(const std::uint8_t key[16]) {
  const auto& s = sbox();
  std::array<std::uint8_t, 176> rk{};
  std::memcpy(rk.data(), key, 16);
  std::uint8_t rcon = 1;
  for (std::size_t i = 16; i < 176; i += 4) {
    std::uint8_t t[4] = {rk[i - 4], rk[i - 3], rk[i - 2], rk[i - 1]};
    if (i % 16 == 0) {
      const std::uint8_t first = t[0];
      t[0] = static_cast<std::uint8_t>(s[t[1]] ^ rcon);
      t[1] = s[t[2]];
      t[2] = s[t[3]];
      t[3] = s[first];
      rcon = gmul(rcon, 2);
    }
    for (std::size_t k = 0; k < 4; ++k) rk[i + k] = static_cast<std::uint8_t>(rk[i - 16 + k] ^ t[k]);
  }
  return rk;
}

inline void encrypt_block(std::uint8_t state[16], const std::array<std::uint8_t, 176>& rk) {
  const auto& s = sbox();
  auto add_round_key = [&](int round) {
    for (int i = 0; i < 16; ++i) state[i] ^= rk[static_cast<std::size_t>(round * 16 + i)];
  };
  auto sub_bytes = [&] {
    for (int i = 0; i < 16; ++i) state[i] = s[state[i]];
  };
  auto shift_rows = [&] {
    std::uint8_t t[16];
    for (int c = 0; c < 4; ++c) {
      for (int r = 0; r < 4; ++r) t[r + 4 * c] = state[r + 4 * ((c + r) % 4)];
    }
    std::memcpy(state, t, 16);
  };
  auto mix_columns = [&] {
    for (int c = 0; c < 4; ++c) {
      std::uint8_t* col = state + 4 * c;
      const std::uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
      col[0] = static_cast<std::uint8_t>(gmul(a0, 2) ^ gmul(a1, 3) ^ a2 ^ a3);
      col[1] = static_cast<std::uint8_t>(a0 ^ gmul(a1, 2) ^ gmul(a2, 3) ^ a3);
      col[2] = static_cast<std::uint8_t>(a0 ^ a1 ^ gmul(a2, 2) ^ gmul(a3, 3));
      col[3] = static_cast<std::uint8_t>(gmul(a0, 3) ^ a1 ^ a2 ^ gmul(a3, 2));
    }
  };

  add_round_key(0);
  for (int round = 1; round <= 9; ++round) {
    sub_bytes();
    shift_rows();
    mix_columns();
    add_round_key(round);
  }
  sub_bytes();
  shift_rows();
  add_round_key(10);
}

/// CBC encryption. With pad=true applies PKCS#7; with pad=false the input
/// length must already be a multiple of 16.
inline std::vector<std::uint8_t> cbc_encrypt(std::vector<std::uint8_t> plain,
                                             const std::uint8_t key[16],
                                             const std::uint8_t iv[16], bool pad) {
  if (pad) {
    const std::size_t n = 16 - plain.size() % 16;
    plain.insert(plain.end(), n, static_cast<std::uint8_t>(n));
  } else if (plain.size() % 16 != 0) {
    throw std::invalid_argument("unpadded input must be a block multiple");
  }
  const auto rk = expand_key(key);
  std::uint8_t prev[16];
  std::memcpy(prev, iv, 16);
  std::vector<std::uint8_t> out(plain.size());
  for (std::size_t off = 0; off < plain.size(); off += 16) {
    std::uint8_t block[16];
    for (int i = 0; i < 16; ++i) block[i] = static_cast<std::uint8_t>(plain[off + i] ^ prev[i]);
    encrypt_block(block, rk);
    std::memcpy(out.data() + off, block, 16);
    std::memcpy(prev, block, 16);
  }
  return out;
}

}  // namespace refaes

#endif  // SPARE_TESTS_SUPPORT_REFERENCE_AES_HPP_
