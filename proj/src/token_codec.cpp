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

#include "spare/token_codec.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <memory>
#include <stdexcept>

#include "spare/errors.hpp"

namespace spare {

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

constexpr std::size_t kBlockSize = 16;

bool device_char_ok(char c) {
  return c > 0x20 && c < 0x7f && c != '@';
}

bool device_id_valid(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    if (!device_char_ok(c)) return false;
  }
  return true;
}

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

CipherCtx make_ctx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
  if (!ctx) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
  return ctx;
}

}  // namespace

bool payload_valid(const TokenPayload& p) {
  return p.timestamp_utc >= 0 && device_id_valid(p.device_id);
}

KeyMaterial KeyMaterial::from_hex(std::string_view key_hex, std::string_view iv_hex) {
  auto parse16 = [](std::string_view hex, std::array<unsigned char, 16>& out) {
    if (hex.size() != 32) throw InvalidPayload("key material must be 32 hex chars");
    for (std::size_t i = 0; i < 16; ++i) {
      int hi = hex_nibble(hex[2 * i]);
      int lo = hex_nibble(hex[2 * i + 1]);
      if (hi < 0 || lo < 0) throw InvalidPayload("key material has non-hex characters");
      out[i] = static_cast<unsigned char>(hi << 4 | lo);
    }
  };
  KeyMaterial km;
  parse16(key_hex, km.key);
  parse16(iv_hex, km.iv);
  return km;
}

std::string format_payload(const TokenPayload& p) {
  if (!payload_valid(p)) throw InvalidPayload("payload violates token format");
  return std::to_string(p.timestamp_utc) + "@" + p.device_id;
}

std::optional<TokenPayload> parse_payload(std::string_view text) {
  std::size_t at = text.find('@');
  if (at == std::string_view::npos) return std::nullopt;
  if (text.find('@', at + 1) != std::string_view::npos) return std::nullopt;

  std::string_view ts_part = text.substr(0, at);
  std::string_view dev_part = text.substr(at + 1);
  if (ts_part.empty() || ts_part.size() > 19) return std::nullopt;
  for (char c : ts_part) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  std::int64_t ts = 0;
  auto [ptr, ec] = std::from_chars(ts_part.data(), ts_part.data() + ts_part.size(), ts);
  if (ec != std::errc() || ptr != ts_part.data() + ts_part.size()) return std::nullopt;
  if (!device_id_valid(dev_part)) return std::nullopt;
  return TokenPayload{ts, std::string(dev_part)};
}

std::vector<unsigned char> aes128_cbc_encrypt(const std::vector<unsigned char>& plain,
                                              const KeyMaterial& km) {
  CipherCtx ctx = make_ctx();
  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_cbc(), nullptr, km.key.data(),
                         km.iv.data()) != 1) {
    throw std::runtime_error("EVP_EncryptInit_ex failed");
  }
  std::vector<unsigned char> out(plain.size() + kBlockSize);
  int n1 = 0;
  int n2 = 0;
  if (EVP_EncryptUpdate(ctx.get(), out.data(), &n1, plain.data(),
                        static_cast<int>(plain.size())) != 1 ||
      EVP_EncryptFinal_ex(ctx.get(), out.data() + n1, &n2) != 1) {
    throw std::runtime_error("AES-CBC encryption failed");
  }
  out.resize(static_cast<std::size_t>(n1) + static_cast<std::size_t>(n2));
  return out;
}

std::optional<std::vector<unsigned char>> aes128_cbc_decrypt(
    const std::vector<unsigned char>& cipher, const KeyMaterial& km) {
  if (cipher.empty() || cipher.size() % kBlockSize != 0) return std::nullopt;
  CipherCtx ctx = make_ctx();
  if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_cbc(), nullptr, km.key.data(),
                         km.iv.data()) != 1) {
    throw std::runtime_error("EVP_DecryptInit_ex failed");
  }
  std::vector<unsigned char> out(cipher.size() + kBlockSize);
  int n1 = 0;
  int n2 = 0;
  if (EVP_DecryptUpdate(ctx.get(), out.data(), &n1, cipher.data(),
                        static_cast<int>(cipher.size())) != 1) {
    return std::nullopt;
  }
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + n1, &n2) != 1) {
    return std::nullopt;  // bad padding: not produced under this key/iv
  }
  out.resize(static_cast<std::size_t>(n1) + static_cast<std::size_t>(n2));
  return out;
}

Token mint_token(const TokenPayload& p, const KeyMaterial& km) {
  std::string text = format_payload(p);
  std::vector<unsigned char> plain(text.begin(), text.end());
  return Token{base64url_encode(aes128_cbc_encrypt(plain, km))};
}

OpenResult open_token(const Token& t, const KeyMaterial& km) {
  OpenResult r;
  auto cipher = base64url_decode(t.value);
  if (!cipher || cipher->empty() || cipher->size() % kBlockSize != 0) {
    r.error = OpenError::undecodable;
    return r;
  }
  auto plain = aes128_cbc_decrypt(*cipher, km);
  if (!plain) {
    r.error = OpenError::undecryptable;
    return r;
  }
  auto payload = parse_payload(std::string_view(
      reinterpret_cast<const char*>(plain->data()), plain->size()));
  if (!payload) {
    r.error = OpenError::malformed;
    return r;
  }
  r.payload = std::move(payload);
  return r;
}

std::string embed_token(std::string_view base_url, const Token& t, bool resubmit) {
  if (base_url.find('?') != std::string_view::npos) {
    throw std::invalid_argument("base URL already has a query string");
  }
  std::string url(base_url);
  url += "?id=";
  url += t.value;
  url += "&resubmit=";
  url += resubmit ? "true" : "false";
  return url;
}

ExtractedQuery extract_token(std::string_view url) {
  ExtractedQuery q;
  std::size_t qpos = url.find('?');
  if (qpos == std::string_view::npos) return q;
  std::string_view query = url.substr(qpos + 1);

  bool have_id = false;
  while (!query.empty()) {
    std::size_t amp = query.find('&');
    std::string_view pair = query.substr(0, amp);
    query = (amp == std::string_view::npos) ? std::string_view{} : query.substr(amp + 1);

    std::size_t eq = pair.find('=');
    std::string_view key = pair.substr(0, eq);
    std::string_view value = (eq == std::string_view::npos) ? std::string_view{}
                                                            : pair.substr(eq + 1);
    if (key == "id" && !have_id) {
      q.token = Token{std::string(value)};
      have_id = true;
    } else if (key == "resubmit") {
      q.resubmit = (value == "true");
    }
  }
  return q;
}

std::string base64url_encode(const std::vector<unsigned char>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    unsigned v = bytes[i] << 16 | bytes[i + 1] << 8 | bytes[i + 2];
    out += kB64Alphabet[v >> 18];
    out += kB64Alphabet[(v >> 12) & 0x3f];
    out += kB64Alphabet[(v >> 6) & 0x3f];
    out += kB64Alphabet[v & 0x3f];
  }
  std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    unsigned v = bytes[i] << 16;
    out += kB64Alphabet[v >> 18];
    out += kB64Alphabet[(v >> 12) & 0x3f];
  } else if (rest == 2) {
    unsigned v = bytes[i] << 16 | bytes[i + 1] << 8;
    out += kB64Alphabet[v >> 18];
    out += kB64Alphabet[(v >> 12) & 0x3f];
    out += kB64Alphabet[(v >> 6) & 0x3f];
  }
  return out;
}

std::optional<std::vector<unsigned char>> base64url_decode(std::string_view text) {
  static const auto kReverse = [] {
    std::array<signed char, 256> table{};
    table.fill(-1);
    for (int i = 0; i < 64; ++i) {
      table[static_cast<unsigned char>(kB64Alphabet[i])] = static_cast<signed char>(i);
    }
    return table;
  }();

  if (text.size() % 4 == 1) return std::nullopt;
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3 + 2);

  unsigned buffer = 0;
  int bits = 0;
  for (char c : text) {
    signed char v = kReverse[static_cast<unsigned char>(c)];
    if (v < 0) return std::nullopt;
    buffer = buffer << 6 | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>(buffer >> bits & 0xff));
    }
  }
  return out;
}

}  // namespace spare
