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

#ifndef SPARE_TOKEN_CODEC_HPP_
#define SPARE_TOKEN_CODEC_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spare {

// A token is the AES-128-CBC encryption of "<timestamp>@<device_id>" under a
// key and IV shared by the app and the firewall, carried in the query string
// as URL-safe base64 without padding. The ciphertext is opaque to clients;
// the firewall decrypts it to recover when and where the URL was minted.

struct TokenPayload {
  std::int64_t timestamp_utc = 0;
  std::string device_id;

  friend bool operator==(const TokenPayload&, const TokenPayload&) = default;
};

/// True when the payload satisfies the wire format: timestamp >= 0 and
/// device_id is 1..64 printable ASCII characters with no '@' or whitespace.
bool payload_valid(const TokenPayload& p);

struct Token {
  std::string value;  // base64url ciphertext, no padding

  friend bool operator==(const Token& a, const Token& b) { return a.value == b.value; }
};

struct KeyMaterial {
  std::array<unsigned char, 16> key{};
  std::array<unsigned char, 16> iv{};

  /// Parses two 32-character hex strings. Throws InvalidPayload on bad hex.
  static KeyMaterial from_hex(std::string_view key_hex, std::string_view iv_hex);
};

/// Renders "<timestamp>@<device_id>". Throws InvalidPayload if invalid.
std::string format_payload(const TokenPayload& p);

/// Inverse of format_payload. Rejects anything format_payload cannot emit:
/// missing or repeated '@', non-digit or negative timestamps, bad device ids.
std::optional<TokenPayload> parse_payload(std::string_view text);

/// Encrypts the payload into a wire token. Throws InvalidPayload if invalid.
Token mint_token(const TokenPayload& p, const KeyMaterial& km);

enum class OpenError {
  undecodable,     // not valid base64url or not a whole number of blocks
  undecryptable,   // decryption or padding check failed
  malformed,       // decrypted text is not a valid payload
};

struct OpenResult {
  std::optional<TokenPayload> payload;
  OpenError error = OpenError::undecodable;  // meaningful only when !payload
};

/// Decrypts and parses a wire token. Never throws on bad input.
OpenResult open_token(const Token& t, const KeyMaterial& km);

/// Appends "?id=<token>&resubmit=<bool>" to a base URL that has no query
/// string yet. Throws std::invalid_argument if it already has one.
std::string embed_token(std::string_view base_url, const Token& t, bool resubmit);

struct ExtractedQuery {
  std::optional<Token> token;
  bool resubmit = false;
};

/// Pulls the id and resubmit parameters back out of a URL. A missing id
/// yields an empty token; a missing or non-"true" resubmit yields false.
ExtractedQuery extract_token(std::string_view url);

/// URL-safe base64 without padding ('-' and '_', no '=').
std::string base64url_encode(const std::vector<unsigned char>& bytes);

/// Returns nullopt on characters outside the alphabet or impossible lengths.
std::optional<std::vector<unsigned char>> base64url_decode(std::string_view text);

/// Raw AES-128-CBC with PKCS#7 padding. Exposed so callers can check wire
/// properties such as ciphertext length; mint_token/open_token wrap these.
std::vector<unsigned char> aes128_cbc_encrypt(const std::vector<unsigned char>& plain,
                                              const KeyMaterial& km);
std::optional<std::vector<unsigned char>> aes128_cbc_decrypt(
    const std::vector<unsigned char>& cipher, const KeyMaterial& km);

}  // namespace spare

#endif  // SPARE_TOKEN_CODEC_HPP_
