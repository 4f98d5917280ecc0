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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "spmdw/metadata.hpp"
#include "spmdw/store.hpp"

namespace spmdw {

enum class QueryDimension { OrgUnit, Period, Element, Indicator };

std::string_view to_string(QueryDimension d);
QueryDimension parse_query_dimension(std::string_view text);

/// A pivot request. Rows and columns are two distinct axes out of org unit,
/// period and data (element or indicator); `filters` pins the third.
struct AnalyticsQuery {
  QueryDimension rows = QueryDimension::OrgUnit;
  QueryDimension columns = QueryDimension::Period;
  std::vector<std::string> row_items;     // empty: every element/indicator/unit
  std::vector<std::string> column_items;  // (periods must be listed)
  std::map<QueryDimension, std::string> filters;
  Status min_status = Status::Verified;
  /// Follow each listed org unit with its direct children.
  bool expand_children = false;
};

struct TableCell {
  std::optional<double> value;
  std::int64_t provenance = 0;
  std::optional<Status> status_floor;
  std::string note;  // why a cell is empty, when it is an error rather than no data
};

struct AnalyticsTable {
  AnalyticsQuery query;  // normalised: items resolved and ordered
  std::vector<std::string> row_keys;
  std::vector<std::string> column_keys;
  std::vector<std::vector<TableCell>> cells;  // [row][column]
};

/// Throws InvalidQuery for an ill-formed query and Unknown* for items that
/// do not exist. `unit_scope`, when given, is the caller's visible units;
/// an empty org item list then expands to those units only.
AnalyticsTable run_analytics(const Metadata& md, const StoreState& store,
                             const AnalyticsQuery& query,
                             const std::vector<std::string>* unit_scope = nullptr);

/// Checks the structural rules without touching data.
void validate_query(const AnalyticsQuery& query);

/// Header `<rows>\<columns>,<col keys...>` then one line per row; empty
/// fields for empty cells.
std::string render_csv(const AnalyticsTable& table);
nlohmann::json to_json(const AnalyticsTable& table);

/// Org units referenced by the table's rows/columns/filters.
std::vector<std::string> table_org_units(const AnalyticsTable& table);

}  // namespace spmdw
