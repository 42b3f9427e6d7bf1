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

#ifndef SPARE_TIME_UTIL_HPP_
#define SPARE_TIME_UTIL_HPP_

#include <cstdint>
#include <optional>
#include <string_view>

namespace spare {

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kSecondsPerHour = 3600;

/// Floor division, correct for negative numerators.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/// UTC day number of an epoch timestamp (days since 1970-01-01).
constexpr std::int64_t day_number(std::int64_t ts) {
  return floor_div(ts, kSecondsPerDay);
}

/// First instant of the UTC day after `now`.
constexpr std::int64_t next_utc_midnight(std::int64_t now) {
  return (day_number(now) + 1) * kSecondsPerDay;
}

/// UTC hour of day, 0..23.
constexpr int hour_of_day(std::int64_t ts) {
  std::int64_t sec = ts - day_number(ts) * kSecondsPerDay;
  return static_cast<int>(sec / kSecondsPerHour);
}

/// Days from 1970-01-01 to the given proleptic Gregorian civil date.
/// Howard Hinnant's algorithm; valid for the full int range.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

/// Parses "YYYY-MM-DD" into the epoch second at which that UTC day starts.
/// Returns nullopt for anything that is not a valid calendar date.
std::optional<std::int64_t> parse_utc_date(std::string_view s);

/// Formats the UTC day containing `ts` as "YYYY-MM-DD".
std::string format_utc_date(std::int64_t ts);

}  // namespace spare

#endif  // SPARE_TIME_UTIL_HPP_
