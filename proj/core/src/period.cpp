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

#include "spmdw/period.hpp"

#include <charconv>

#include "spmdw/error.hpp"

namespace spmdw {

namespace {

[[noreturn]] void malformed(std::string_view key) {
  throw Error(ErrorCode::MalformedPeriodKey,
              "malformed period key '" + std::string(key) + "'");
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

int to_int(std::string_view s) {
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

int type_rank(PeriodType t) {
  // Coarser first when two periods start on the same day.
  switch (t) {
    case PeriodType::Year: return 0;
    case PeriodType::Quarter: return 1;
    case PeriodType::Month: return 2;
  }
  return 3;
}

}  // namespace

std::string_view to_string(PeriodType type) {
  switch (type) {
    case PeriodType::Month: return "MONTH";
    case PeriodType::Quarter: return "QUARTER";
    case PeriodType::Year: return "YEAR";
  }
  return "MONTH";
}

PeriodType parse_period_type(std::string_view text) {
  if (text == "MONTH") return PeriodType::Month;
  if (text == "QUARTER") return PeriodType::Quarter;
  if (text == "YEAR") return PeriodType::Year;
  throw Error(ErrorCode::InvalidArgument,
              "unknown period type '" + std::string(text) + "'");
}

Period Period::month(int year, int month) {
  if (year < 1 || year > 9999 || month < 1 || month > 12) {
    throw Error(ErrorCode::MalformedPeriodKey, "month out of range");
  }
  return Period(PeriodType::Month, year, month);
}

Period Period::quarter(int year, int quarter) {
  if (year < 1 || year > 9999 || quarter < 1 || quarter > 4) {
    throw Error(ErrorCode::MalformedPeriodKey, "quarter out of range");
  }
  return Period(PeriodType::Quarter, year, quarter);
}

Period Period::year(int year) {
  if (year < 1 || year > 9999) {
    throw Error(ErrorCode::MalformedPeriodKey, "year out of range");
  }
  return Period(PeriodType::Year, year, 0);
}

std::string Period::key() const {
  char buf[16];
  switch (type_) {
    case PeriodType::Month:
      std::snprintf(buf, sizeof(buf), "%04d-%02d", year_, index_);
      break;
    case PeriodType::Quarter:
      std::snprintf(buf, sizeof(buf), "%04d-Q%d", year_, index_);
      break;
    case PeriodType::Year:
      std::snprintf(buf, sizeof(buf), "%04d", year_);
      break;
  }
  return buf;
}

std::chrono::sys_days Period::first_day() const {
  using namespace std::chrono;
  unsigned first_month = 1;
  if (type_ == PeriodType::Month) first_month = static_cast<unsigned>(index_);
  if (type_ == PeriodType::Quarter) first_month = static_cast<unsigned>(3 * (index_ - 1) + 1);
  return sys_days{std::chrono::year{year_} / std::chrono::month{first_month} / 1};
}

std::chrono::sys_days Period::last_day() const {
  using namespace std::chrono;
  unsigned last_month = 12;
  if (type_ == PeriodType::Month) last_month = static_cast<unsigned>(index_);
  if (type_ == PeriodType::Quarter) last_month = static_cast<unsigned>(3 * index_);
  return sys_days{std::chrono::year{year_} / std::chrono::month{last_month} / last};
}

bool Period::contains(const Period& other) const {
  return first_day() <= other.first_day() && other.last_day() <= last_day();
}

std::strong_ordering operator<=>(const Period& a, const Period& b) {
  if (auto c = a.first_day() <=> b.first_day(); c != 0) return c;
  return type_rank(a.type_) <=> type_rank(b.type_);
}

Period parse_period(std::string_view key) {
  if (key.size() == 4 && all_digits(key)) {
    return Period::year(to_int(key));
  }
  if (key.size() == 7 && key[4] == '-' && all_digits(key.substr(0, 4))) {
    int year = to_int(key.substr(0, 4));
    if (key[5] == 'Q') {
      if (!all_digits(key.substr(6, 1))) malformed(key);
      int q = to_int(key.substr(6, 1));
      if (q < 1 || q > 4) malformed(key);
      return Period::quarter(year, q);
    }
    if (!all_digits(key.substr(5, 2))) malformed(key);
    int m = to_int(key.substr(5, 2));
    if (m < 1 || m > 12) malformed(key);
    return Period::month(year, m);
  }
  malformed(key);
}

std::vector<Period> period_children(const Period& p) {
  std::vector<Period> out;
  if (p.type() == PeriodType::Year) {
    for (int m = 1; m <= 12; ++m) out.push_back(Period::month(p.year(), m));
  } else if (p.type() == PeriodType::Quarter) {
    for (int m = 3 * (p.index() - 1) + 1; m <= 3 * p.index(); ++m) {
      out.push_back(Period::month(p.year(), m));
    }
  }
  return out;
}

std::vector<Period> periods_at_grain(const Period& p, PeriodType grain) {
  if (grain == p.type()) return {p};
  if (grain == PeriodType::Month) return period_children(p);
  if (grain == PeriodType::Quarter && p.type() == PeriodType::Year) {
    return {Period::quarter(p.year(), 1), Period::quarter(p.year(), 2),
            Period::quarter(p.year(), 3), Period::quarter(p.year(), 4)};
  }
  return {};
}

Period enclosing_period(const Period& p, PeriodType grain) {
  switch (grain) {
    case PeriodType::Year:
      return Period::year(p.year());
    case PeriodType::Quarter:
      if (p.type() == PeriodType::Year) break;
      if (p.type() == PeriodType::Quarter) return p;
      return Period::quarter(p.year(), (p.index() - 1) / 3 + 1);
    case PeriodType::Month:
      if (p.type() == PeriodType::Month) return p;
      break;
  }
  throw Error(ErrorCode::PeriodTypeMismatch,
              "period " + p.key() + " has no enclosing " +
                  std::string(to_string(grain)));
}

std::vector<Period> preceding_periods(const Period& p, int count) {
  std::vector<Period> out;
  int year = p.year();
  int index = p.index();
  for (int i = 0; i < count; ++i) {
    switch (p.type()) {
      case PeriodType::Month:
        if (--index == 0) {
          index = 12;
          --year;
        }
        break;
      case PeriodType::Quarter:
        if (--index == 0) {
          index = 4;
          --year;
        }
        break;
      case PeriodType::Year:
        --year;
        break;
    }
    if (year < 1) break;
    switch (p.type()) {
      case PeriodType::Month: out.push_back(Period::month(year, index)); break;
      case PeriodType::Quarter: out.push_back(Period::quarter(year, index)); break;
      case PeriodType::Year: out.push_back(Period::year(year)); break;
    }
  }
  return {out.rbegin(), out.rend()};
}

}  // namespace spmdw
