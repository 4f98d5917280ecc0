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

#include "spmdw/model.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "spmdw/error.hpp"

namespace spmdw {

namespace {

template <typename E, size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<OrgLevel, 4> kOrgLevels{{
    {OrgLevel::Province, "PROVINCE"},
    {OrgLevel::AdminCity, "ADMIN_CITY"},
    {OrgLevel::District, "DISTRICT"},
    {OrgLevel::Subdistrict, "SUBDISTRICT"},
}};

constexpr NameTable<ValueType, 3> kValueTypes{{
    {ValueType::NonNegativeInteger, "NON_NEGATIVE_INTEGER"},
    {ValueType::Decimal, "DECIMAL"},
    {ValueType::Percent, "PERCENT"},
}};

constexpr NameTable<Aggregation, 2> kAggregations{{
    {Aggregation::Sum, "SUM"},
    {Aggregation::Average, "AVERAGE"},
}};

constexpr NameTable<Status, 6> kStatuses{{
    {Status::Draft, "DRAFT"},
    {Status::Submitted, "SUBMITTED"},
    {Status::Verified, "VERIFIED"},
    {Status::Validated, "VALIDATED"},
    {Status::Published, "PUBLISHED"},
    {Status::Rejected, "REJECTED"},
}};

constexpr NameTable<Role, 4> kRoles{{
    {Role::EnumeratorPic, "ENUMERATOR_PIC"},
    {Role::SubofficeManager, "SUBOFFICE_MANAGER"},
    {Role::DepartmentManager, "DEPARTMENT_MANAGER"},
    {Role::Admin, "ADMIN"},
}};

constexpr NameTable<SpmCategory, kSpmCategoryCount> kSpmCategories{{
    {SpmCategory::AntenatalCare, "ANTENATAL_CARE"},
    {SpmCategory::DeliveryCare, "DELIVERY_CARE"},
    {SpmCategory::NewbornCare, "NEWBORN_CARE"},
    {SpmCategory::UnderFiveCare, "UNDER_FIVE_CARE"},
    {SpmCategory::SchoolAge, "SCHOOL_AGE"},
    {SpmCategory::ProductiveAge, "PRODUCTIVE_AGE"},
    {SpmCategory::Elderly, "ELDERLY"},
    {SpmCategory::Hypertension, "HYPERTENSION"},
    {SpmCategory::Diabetes, "DIABETES"},
    {SpmCategory::SevereMentalDisorder, "SEVERE_MENTAL_DISORDER"},
    {SpmCategory::Tuberculosis, "TUBERCULOSIS"},
    {SpmCategory::HivRisk, "HIV_RISK"},
}};

template <typename E, size_t N>
std::string_view name_of(const NameTable<E, N>& table, E value) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "UNKNOWN";
}

template <typename E, size_t N>
E parse_name(const NameTable<E, N>& table, std::string_view text,
             std::string_view what) {
  for (const auto& [v, name] : table) {
    if (name == text) return v;
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown " + std::string(what) + " '" + std::string(text) + "'");
}

}  // namespace

std::string_view to_string(OrgLevel v) { return name_of(kOrgLevels, v); }
std::string_view to_string(ValueType v) { return name_of(kValueTypes, v); }
std::string_view to_string(Aggregation v) { return name_of(kAggregations, v); }
std::string_view to_string(Status v) { return name_of(kStatuses, v); }
std::string_view to_string(Role v) { return name_of(kRoles, v); }
std::string_view to_string(SpmCategory v) { return name_of(kSpmCategories, v); }

OrgLevel parse_org_level(std::string_view t) { return parse_name(kOrgLevels, t, "org level"); }
ValueType parse_value_type(std::string_view t) { return parse_name(kValueTypes, t, "value type"); }
Aggregation parse_aggregation(std::string_view t) { return parse_name(kAggregations, t, "aggregation"); }
Status parse_status(std::string_view t) { return parse_name(kStatuses, t, "status"); }
Role parse_role(std::string_view t) { return parse_name(kRoles, t, "role"); }
SpmCategory parse_spm_category(std::string_view t) {
  return parse_name(kSpmCategories, t, "SPM category");
}

int status_rank(Status s) {
  switch (s) {
    case Status::Draft:
    case Status::Rejected:
      return 0;
    case Status::Submitted: return 1;
    case Status::Verified: return 2;
    case Status::Validated: return 3;
    case Status::Published: return 4;
  }
  return 0;
}

std::optional<ValueRange> DataElement::effective_range() const {
  if (range) return range;
  if (value_type == ValueType::Percent) return ValueRange{0, 100};
  return std::nullopt;
}

bool DataSet::contains(std::string_view element_id) const {
  return std::binary_search(element_ids.begin(), element_ids.end(), element_id);
}

bool User::dataset_in_scope(std::string_view dataset_id) const {
  return scope_dataset_ids.empty() ||
         std::find(scope_dataset_ids.begin(), scope_dataset_ids.end(),
                   dataset_id) != scope_dataset_ids.end();
}

}  // namespace spmdw
