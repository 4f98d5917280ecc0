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

#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace spmdw {

enum class PeriodType { Month, Quarter, Year };

std::string_view to_string(PeriodType type);
PeriodType parse_period_type(std::string_view text);

/// A Gregorian reporting period. `index` is the month (1-12) for MONTH, the
/// quarter (1-4) for QUARTER and 0 for YEAR.
class Period {
 public:
  Period() = default;

  static Period month(int year, int month);
  static Period quarter(int year, int quarter);
  static Period year(int year);

  PeriodType type() const noexcept { return type_; }
  int year() const noexcept { return year_; }
  int index() const noexcept { return index_; }

  /// Canonical key: `YYYY-MM`, `YYYY-Qn` or `YYYY`.
  std::string key() const;

  std::chrono::sys_days first_day() const;
  std::chrono::sys_days last_day() const;

  /// True when `other` lies entirely inside this period.
  bool contains(const Period& other) const;

  /// Chronological order by start, coarser periods first on ties.
  friend std::strong_ordering operator<=>(const Period& a, const Period& b);
  friend bool operator==(const Period& a, const Period& b) = default;

 private:
  Period(PeriodType type, int year, int index)
      : type_(type), year_(year), index_(index) {}

  PeriodType type_ = PeriodType::Month;
  int year_ = 1970;
  int index_ = 1;
};

/// Throws Error(MalformedPeriodKey).
Period parse_period(std::string_view key);

/// YEAR -> its 12 months, QUARTER -> its 3 months, MONTH -> [].
std::vector<Period> period_children(const Period& p);

/// The sub-periods of `p` at `grain`, chronological. Returns {p} when the grain
/// equals p's type and [] when `grain` is coarser than p.
std::vector<Period> periods_at_grain(const Period& p, PeriodType grain);

/// The enclosing period of `p` at a coarser-or-equal grain.
Period enclosing_period(const Period& p, PeriodType grain);

/// Same-type periods strictly before `p`, most recent last.
std::vector<Period> preceding_periods(const Period& p, int count);

}  // namespace spmdw
