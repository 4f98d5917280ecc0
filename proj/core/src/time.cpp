// Copyright 2026 The spmdw Authors
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

#include "spmdw/time.hpp"

#include <charconv>
#include <cstdio>

#include "spmdw/error.hpp"

namespace spmdw {

namespace {

bool read_uint(std::string_view text, size_t pos, size_t width, int& out) {
  if (pos + width > text.size()) return false;
  for (size_t i = pos; i < pos + width; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + width, out);
  return ec == std::errc{};
}

[[noreturn]] void bad_timestamp(std::string_view text) {
  throw Error(ErrorCode::InvalidArgument,
              "malformed timestamp '" + std::string(text) + "'");
}

}  // namespace

Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour,
                         int minute, int second) {
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                     std::chrono::day{day}};
  if (!ymd.ok()) {
    throw Error(ErrorCode::InvalidArgument, "invalid calendar date");
  }
  return sys_days{ymd} + hours{hour} + minutes{minute} + seconds{second};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  auto day_point = floor<days>(t);
  year_month_day ymd{day_point};
  hh_mm_ss hms{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (text.size() != 10 && text.size() != 20) bad_timestamp(text);
  if (!read_uint(text, 0, 4, y) || text[4] != '-' || !read_uint(text, 5, 2, mo) ||
      text[7] != '-' || !read_uint(text, 8, 2, d)) {
    bad_timestamp(text);
  }
  if (text.size() == 20) {
    if (text[10] != 'T' || !read_uint(text, 11, 2, h) || text[13] != ':' ||
        !read_uint(text, 14, 2, mi) || text[16] != ':' ||
        !read_uint(text, 17, 2, s) || text[19] != 'Z') {
      bad_timestamp(text);
    }
    if (h > 23 || mi > 59 || s > 59) bad_timestamp(text);
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31) bad_timestamp(text);
  try {
    return make_timestamp(y, static_cast<unsigned>(mo), static_cast<unsigned>(d),
                          h, mi, s);
  } catch (const Error&) {
    bad_timestamp(text);
  }
}

}  // namespace spmdw
