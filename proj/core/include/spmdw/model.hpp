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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spmdw/period.hpp"
#include "spmdw/time.hpp"

namespace spmdw {

enum class OrgLevel { Province = 1, AdminCity = 2, District = 3, Subdistrict = 4 };

enum class ValueType { NonNegativeInteger, Decimal, Percent };

enum class Aggregation { Sum, Average };

enum class Status { Draft, Submitted, Verified, Validated, Published, Rejected };

enum class Role { EnumeratorPic, SubofficeManager, DepartmentManager, Admin };

/// The twelve minimum-service-standard health categories.
enum class SpmCategory {
  AntenatalCare,
  DeliveryCare,
  NewbornCare,
  UnderFiveCare,
  SchoolAge,
  ProductiveAge,
  Elderly,
  Hypertension,
  Diabetes,
  SevereMentalDisorder,
  Tuberculosis,
  HivRisk,
};

inline constexpr int kSpmCategoryCount = 12;

std::string_view to_string(OrgLevel v);
std::string_view to_string(ValueType v);
std::string_view to_string(Aggregation v);
std::string_view to_string(Status v);
std::string_view to_string(Role v);
std::string_view to_string(SpmCategory v);

// Each parser throws Error(InvalidArgument) on an unknown name.
OrgLevel parse_org_level(std::string_view text);
ValueType parse_value_type(std::string_view text);
Aggregation parse_aggregation(std::string_view text);
Status parse_status(std::string_view text);
Role parse_role(std::string_view text);
SpmCategory parse_spm_category(std::string_view text);

/// Position of a status along DRAFT -> PUBLISHED. REJECTED ranks with DRAFT:
/// a rejected form is back in the entering unit's hands.
int status_rank(Status s);

/// True when `s` passes a `floor` filter such as min_status.
inline bool meets_floor(Status s, Status floor) {
  return status_rank(s) >= status_rank(floor);
}

struct OrgUnit {
  std::string id;
  std::string name;
  OrgLevel level = OrgLevel::Province;
  std::optional<std::string> parent_id;
};

struct Program {
  std::string id;
  std::string name;
};

struct ValueRange {
  double min = 0;
  double max = 0;
};

struct DataElement {
  std::string id;
  std::string name;
  ValueType value_type = ValueType::NonNegativeInteger;
  std::optional<ValueRange> range;
  std::string owner_program_id;
  Aggregation aggregation = Aggregation::Sum;

  /// The declared range, or [0,100] for a PERCENT element without one.
  std::optional<ValueRange> effective_range() const;
};

struct DataSet {
  std::string id;
  std::string name;
  PeriodType period_type = PeriodType::Month;
  std::vector<std::string> element_ids;  // sorted, unique
  OrgLevel entry_level = OrgLevel::Subdistrict;
  int deadline_days = 0;

  bool contains(std::string_view element_id) const;
};

struct Indicator {
  std::string id;
  std::string name;
  std::string numerator_element_id;
  std::string denominator_element_id;
  double factor = 100.0;
  SpmCategory spm_category = SpmCategory::AntenatalCare;
  bool placeholder = false;  // definition not yet agreed with the program
};

struct User {
  std::string id;
  std::string name;
  Role role = Role::EnumeratorPic;
  std::vector<std::string> scope_org_unit_ids;
  std::vector<std::string> scope_dataset_ids;  // empty: every dataset
  std::string credential;                      // pbkdf2 record, may be empty

  bool dataset_in_scope(std::string_view dataset_id) const;
};

/// One live fact at (element, org unit, period).
struct DataValue {
  std::string element_id;
  std::string org_unit_id;
  Period period;
  double value = 0;
  Status status = Status::Draft;
  std::int64_t version = 0;
  std::string entered_by;
  std::string justification;  // empty when none was given
  Timestamp updated_at{};

  friend bool operator==(const DataValue&, const DataValue&) = default;
};

}  // namespace spmdw
