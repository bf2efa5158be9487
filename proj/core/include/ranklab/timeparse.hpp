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

#ifndef RANKLAB_TIMEPARSE_HPP_
#define RANKLAB_TIMEPARSE_HPP_

#include <cstdint>
#include <string>
#include <string_view>

namespace ranklab {

// Parses "YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM|+HHMM|-HHMM)" into seconds
// since the Unix epoch. Fractional seconds are truncated. The zone designator
// is mandatory; records without an explicit offset are rejected.
std::int64_t parse_iso8601(std::string_view text);

std::string format_iso8601_utc(std::int64_t epoch_seconds);

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int year, int month, int day);
void civil_from_days(std::int64_t days, int& year, int& month, int& day);

// 0 = Monday ... 6 = Sunday.
int day_of_week(std::int64_t epoch_days);

}  // namespace ranklab

#endif  // RANKLAB_TIMEPARSE_HPP_
