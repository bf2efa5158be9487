// Copyright 2026 The ranklab Authors
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

#include "ranklab/timeparse.hpp"

#include <cstdio>
#include <stdexcept>

namespace ranklab {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

int days_in_month(int year, int month) {
  static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return kDays[month - 1];
}

[[noreturn]] void fail(std::string_view text) {
  throw std::invalid_argument("invalid ISO-8601 timestamp: '" + std::string(text) + "'");
}

}  // namespace

std::int64_t days_from_civil(int year, int month, int day) {
  year -= month <= 2;
  const int era = (year >= 0 ? year : year - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(year - era * 400);
  const unsigned doy =
      (153u * static_cast<unsigned>(month + (month > 2 ? -3 : 9)) + 2u) / 5u +
      static_cast<unsigned>(day) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t days, int& year, int& month, int& day) {
  days += 719468;
  const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  year = static_cast<int>(y + (month <= 2));
}

int day_of_week(std::int64_t epoch_days) {
  // 1970-01-01 was a Thursday.
  return static_cast<int>(((epoch_days + 3) % 7 + 7) % 7);
}

std::int64_t parse_iso8601(std::string_view text) {
  // Minimal layout: YYYY-MM-DDTHH:MM:SS plus a zone designator.
  if (text.size() < 20) fail(text);
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':') {
    fail(text);
  }
  const std::string_view ys = text.substr(0, 4), mos = text.substr(5, 2),
                         ds = text.substr(8, 2), hs = text.substr(11, 2),
                         mis = text.substr(14, 2), ss = text.substr(17, 2);
  if (!all_digits(ys) || !all_digits(mos) || !all_digits(ds) || !all_digits(hs) ||
      !all_digits(mis) || !all_digits(ss)) {
    fail(text);
  }
  const int year = to_int(ys), month = to_int(mos), day = to_int(ds);
  const int hour = to_int(hs), minute = to_int(mis), second = to_int(ss);
  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) ||
      hour > 23 || minute > 59 || second > 59) {
    fail(text);
  }

  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == start) fail(text);
  }
  if (pos >= text.size()) fail(text);

  int offset_minutes = 0;
  const char zone = text[pos];
  if (zone == 'Z') {
    if (pos + 1 != text.size()) fail(text);
  } else if (zone == '+' || zone == '-') {
    std::string_view rest = text.substr(pos + 1);
    int oh = 0, om = 0;
    if (rest.size() == 5 && rest[2] == ':' && all_digits(rest.substr(0, 2)) &&
        all_digits(rest.substr(3, 2))) {
      oh = to_int(rest.substr(0, 2));
      om = to_int(rest.substr(3, 2));
    } else if (rest.size() == 4 && all_digits(rest)) {
      oh = to_int(rest.substr(0, 2));
      om = to_int(rest.substr(2, 2));
    } else {
      fail(text);
    }
    if (oh > 23 || om > 59) fail(text);
    offset_minutes = oh * 60 + om;
    if (zone == '-') offset_minutes = -offset_minutes;
  } else {
    fail(text);
  }

  const std::int64_t days = days_from_civil(year, month, day);
  const std::int64_t local = days * 86400 + hour * 3600 + minute * 60 + second;
  return local - static_cast<std::int64_t>(offset_minutes) * 60;
}

std::string format_iso8601_utc(std::int64_t epoch_seconds) {
  std::int64_t days = epoch_seconds / 86400;
  std::int64_t rem = epoch_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  int year = 0, month = 0, day = 0;
  civil_from_days(days, year, month, day);
  const int hour = static_cast<int>(rem / 3600);
  const int minute = static_cast<int>((rem % 3600) / 60);
  const int second = static_cast<int>(rem % 60);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", year, month, day,
                hour, minute, second);
  return buf;
}

}  // namespace ranklab
