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

#include "spmdw/analytics.hpp"

#include <algorithm>
#include <set>

#include "spmdw/aggregation.hpp"
#include "spmdw/csv.hpp"
#include "spmdw/error.hpp"
#include "spmdw/numeric.hpp"

namespace spmdw {

using nlohmann::json;

std::string_view to_string(QueryDimension d) {
  switch (d) {
    case QueryDimension::OrgUnit: return "ORG_UNIT";
    case QueryDimension::Period: return "PERIOD";
    case QueryDimension::Element: return "ELEMENT";
    case QueryDimension::Indicator: return "INDICATOR";
  }
  return "ORG_UNIT";
}

QueryDimension parse_query_dimension(std::string_view text) {
  if (text == "ORG_UNIT") return QueryDimension::OrgUnit;
  if (text == "PERIOD") return QueryDimension::Period;
  if (text == "ELEMENT") return QueryDimension::Element;
  if (text == "INDICATOR") return QueryDimension::Indicator;
  throw Error(ErrorCode::InvalidQuery, "unknown dimension '" + std::string(text) + "'");
}

namespace {

// Element and indicator share the data axis.
int axis(QueryDimension d) {
  switch (d) {
    case QueryDimension::OrgUnit: return 0;
    case QueryDimension::Period: return 1;
    case QueryDimension::Element:
    case QueryDimension::Indicator:
      return 2;
  }
  return 0;
}

[[noreturn]] void invalid_query(const std::string& msg) {
  throw Error(ErrorCode::InvalidQuery, msg);
}

std::vector<std::string> resolve_items(const Metadata& md, QueryDimension dim,
                                       const std::vector<std::string>& items,
                                       bool expand_children,
                                       const std::vector<std::string>* unit_scope) {
  std::vector<std::string> out;
  switch (dim) {
    case QueryDimension::OrgUnit: {
      const OrgTree& tree = md.tree();
      std::set<std::string> picked;
      if (items.empty()) {
        for (const OrgUnit* u : tree.preorder()) {
          bool visible = !unit_scope ||
                         std::any_of(unit_scope->begin(), unit_scope->end(),
                                     [&](const std::string& s) { return tree.in_subtree(u->id, s); });
          if (visible) picked.insert(u->id);
        }
      } else {
        for (const auto& id : items) {
          tree.unit(id);
          picked.insert(id);
          if (expand_children) {
            for (const OrgUnit* c : tree.children(id)) picked.insert(c->id);
          }
        }
      }
      out.assign(picked.begin(), picked.end());
      std::sort(out.begin(), out.end(), [&](const std::string& a, const std::string& b) {
        return tree.preorder_index(a) < tree.preorder_index(b);
      });
      break;
    }
    case QueryDimension::Period: {
      if (items.empty()) invalid_query("period items must be listed");
      std::vector<Period> periods;
      for (const auto& key : items) periods.push_back(parse_period(key));
      std::sort(periods.begin(), periods.end());
      periods.erase(std::unique(periods.begin(), periods.end()), periods.end());
      for (const auto& p : periods) out.push_back(p.key());
      break;
    }
    case QueryDimension::Element: {
      if (items.empty()) {
        for (const auto& e : md.parts().elements) out.push_back(e.id);
      } else {
        for (const auto& id : items) out.push_back(md.element(id).id);
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      break;
    }
    case QueryDimension::Indicator: {
      if (items.empty()) {
        for (const auto& i : md.parts().indicators) out.push_back(i.id);
      } else {
        for (const auto& id : items) out.push_back(md.indicator(id).id);
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      break;
    }
  }
  return out;
}

struct Coordinates {
  std::string org_unit;
  std::string period;
  QueryDimension data_dim = QueryDimension::Element;
  std::string data_id;

  void set(QueryDimension d, const std::string& v) {
    switch (d) {
      case QueryDimension::OrgUnit: org_unit = v; break;
      case QueryDimension::Period: period = v; break;
      case QueryDimension::Element:
      case QueryDimension::Indicator:
        data_dim = d;
        data_id = v;
        break;
    }
  }
};

TableCell compute_cell(const Metadata& md, const StoreState& store, const Coordinates& at,
                       Status min_status) {
  TableCell cell;
  Period period = parse_period(at.period);
  if (at.data_dim == QueryDimension::Element) {
    if (auto c = aggregate_cell(md, store, at.data_id, at.org_unit, period, min_status)) {
      cell.value = c->value;
      cell.provenance = c->provenance;
      cell.status_floor = c->status_floor;
    }
    return cell;
  }
  try {
    IndicatorValue iv = compute_indicator(md, store, at.data_id, at.org_unit, period, min_status);
    cell.value = iv.value;
    cell.provenance = iv.numerator.provenance + iv.denominator.provenance;
    cell.status_floor = status_rank(iv.numerator.status_floor) <=
                                status_rank(iv.denominator.status_floor)
                            ? iv.numerator.status_floor
                            : iv.denominator.status_floor;
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::MissingNumerator:
      case ErrorCode::MissingDenominator:
        break;  // no data is an empty cell, not an error
      case ErrorCode::ZeroDenominator:
        cell.note = std::string(error_code_name(e.code()));
        break;
      default:
        throw;
    }
  }
  return cell;
}

}  // namespace

void validate_query(const AnalyticsQuery& q) {
  if (q.rows == q.columns || axis(q.rows) == axis(q.columns)) {
    invalid_query("rows and columns must be different dimensions");
  }
  int free_axis = 3 - axis(q.rows) - axis(q.columns);
  int pinned = 0;
  for (const auto& [dim, value] : q.filters) {
    if (axis(dim) != free_axis) {
      invalid_query("filter on " + std::string(to_string(dim)) + " overlaps rows or columns");
    }
    if (value.empty()) invalid_query("empty filter value for " + std::string(to_string(dim)));
    ++pinned;
  }
  if (pinned != 1) {
    invalid_query(pinned == 0 ? "a filter must pin the remaining dimension"
                              : "only one filter may pin the data dimension");
  }
}

AnalyticsTable run_analytics(const Metadata& md, const StoreState& store,
                             const AnalyticsQuery& query,
                             const std::vector<std::string>* unit_scope) {
  validate_query(query);
  AnalyticsTable table;
  table.query = query;
  table.row_keys = resolve_items(md, query.rows, query.row_items, query.expand_children, unit_scope);
  table.column_keys =
      resolve_items(md, query.columns, query.column_items, query.expand_children, unit_scope);
  table.query.row_items = table.row_keys;
  table.query.column_items = table.column_keys;
  table.query.expand_children = false;

  Coordinates base;
  for (const auto& [dim, value] : query.filters) {
    switch (dim) {
      case QueryDimension::OrgUnit: md.tree().unit(value); break;
      case QueryDimension::Period: parse_period(value); break;
      case QueryDimension::Element: md.element(value); break;
      case QueryDimension::Indicator: md.indicator(value); break;
    }
    base.set(dim, value);
  }

  table.cells.resize(table.row_keys.size());
  for (size_t r = 0; r < table.row_keys.size(); ++r) {
    auto& row = table.cells[r];
    row.reserve(table.column_keys.size());
    for (const auto& col : table.column_keys) {
      Coordinates at = base;
      at.set(query.rows, table.row_keys[r]);
      at.set(query.columns, col);
      row.push_back(compute_cell(md, store, at, query.min_status));
    }
  }
  return table;
}

std::string render_csv(const AnalyticsTable& table) {
  CsvWriter w;
  std::vector<std::string> header{std::string(to_string(table.query.rows)) + "\\" +
                                  std::string(to_string(table.query.columns))};
  header.insert(header.end(), table.column_keys.begin(), table.column_keys.end());
  w.row(header);
  for (size_t r = 0; r < table.row_keys.size(); ++r) {
    std::vector<std::string> fields{table.row_keys[r]};
    for (const auto& c : table.cells[r]) {
      fields.push_back(c.value ? format_number(*c.value) : std::string());
    }
    w.row(fields);
  }
  return w.str();
}

json to_json(const AnalyticsTable& table) {
  json filters = json::object();
  for (const auto& [dim, value] : table.query.filters) filters[std::string(to_string(dim))] = value;
  json cells = json::array();
  for (const auto& row : table.cells) {
    json jr = json::array();
    for (const auto& c : row) {
      if (!c.value) {
        jr.push_back(c.note.empty() ? json(nullptr) : json{{"note", c.note}});
        continue;
      }
      jr.push_back({{"value", *c.value},
                    {"provenance", c.provenance},
                    {"status_floor", to_string(*c.status_floor)}});
    }
    cells.push_back(std::move(jr));
  }
  return {{"rows", to_string(table.query.rows)},
          {"columns", to_string(table.query.columns)},
          {"filters", std::move(filters)},
          {"min_status", to_string(table.query.min_status)},
          {"row_keys", table.row_keys},
          {"column_keys", table.column_keys},
          {"cells", std::move(cells)}};
}

std::vector<std::string> table_org_units(const AnalyticsTable& table) {
  std::vector<std::string> out;
  if (table.query.rows == QueryDimension::OrgUnit) out = table.row_keys;
  if (table.query.columns == QueryDimension::OrgUnit) out = table.column_keys;
  if (auto it = table.query.filters.find(QueryDimension::OrgUnit); it != table.query.filters.end()) {
    out.push_back(it->second);
  }
  return out;
}

}  // namespace spmdw
