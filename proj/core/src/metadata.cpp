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

#include "spmdw/metadata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "spmdw/error.hpp"

namespace spmdw {

using nlohmann::json;

namespace {

template <typename T>
void index_unique(const std::vector<T>& items, std::string_view kind,
                  std::map<std::string, size_t, std::less<>>& index) {
  for (size_t i = 0; i < items.size(); ++i) {
    if (items[i].id.empty()) {
      throw Error(ErrorCode::InvalidMetadata, std::string(kind) + " with empty id");
    }
    if (!index.emplace(items[i].id, i).second) {
      throw Error(ErrorCode::DuplicateId,
                  "duplicate " + std::string(kind) + " id '" + items[i].id + "'",
                  {{"kind", kind}, {"id", items[i].id}});
    }
  }
}

template <typename T>
const T& lookup(const std::vector<T>& items,
                const std::map<std::string, size_t, std::less<>>& index,
                std::string_view id, ErrorCode code, std::string_view kind) {
  auto it = index.find(id);
  if (it == index.end()) {
    throw Error(code, "unknown " + std::string(kind) + " '" + std::string(id) + "'");
  }
  return items[it->second];
}

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorCode::InvalidMetadata, msg);
}

}  // namespace

Metadata Metadata::build(Parts parts) {
  Metadata md;
  md.tree_ = build_org_tree(parts.org_units);
  index_unique(parts.programs, "program", md.programs_);
  index_unique(parts.elements, "data element", md.elements_);
  index_unique(parts.datasets, "data set", md.datasets_);
  index_unique(parts.indicators, "indicator", md.indicators_);
  index_unique(parts.users, "user", md.users_);

  for (const auto& e : parts.elements) {
    if (!md.programs_.count(e.owner_program_id)) {
      invalid("element '" + e.id + "' names unknown owner program '" +
              e.owner_program_id + "'");
    }
    if (e.range) {
      if (!std::isfinite(e.range->min) || !std::isfinite(e.range->max) ||
          e.range->min > e.range->max) {
        invalid("element '" + e.id + "' has an invalid range");
      }
    }
  }

  for (auto& ds : parts.datasets) {
    std::sort(ds.element_ids.begin(), ds.element_ids.end());
    ds.element_ids.erase(std::unique(ds.element_ids.begin(), ds.element_ids.end()),
                         ds.element_ids.end());
    if (ds.element_ids.empty()) invalid("data set '" + ds.id + "' has no elements");
    if (ds.deadline_days < 0) invalid("data set '" + ds.id + "' has a negative deadline");
    for (const auto& el : ds.element_ids) {
      if (!md.elements_.count(el)) {
        invalid("data set '" + ds.id + "' names unknown element '" + el + "'");
      }
      // One form per element keeps review state and entry level unambiguous.
      if (!md.element_dataset_.emplace(el, md.datasets_.at(ds.id)).second) {
        invalid("element '" + el + "' belongs to more than one data set");
      }
    }
  }

  for (const auto& ind : parts.indicators) {
    if (!md.elements_.count(ind.numerator_element_id) ||
        !md.elements_.count(ind.denominator_element_id)) {
      invalid("indicator '" + ind.id + "' references an unknown element");
    }
    if (!(ind.factor > 0) || !std::isfinite(ind.factor)) {
      invalid("indicator '" + ind.id + "' needs a positive factor");
    }
    md.cross_rules_.push_back({ind.numerator_element_id, ind.denominator_element_id});
  }

  for (const auto& u : parts.users) {
    for (const auto& unit_id : u.scope_org_unit_ids) {
      if (!md.tree_.contains(unit_id)) {
        invalid("user '" + u.id + "' is scoped to unknown unit '" + unit_id + "'");
      }
    }
    for (const auto& ds_id : u.scope_dataset_ids) {
      if (!md.datasets_.count(ds_id)) {
        invalid("user '" + u.id + "' is scoped to unknown data set '" + ds_id + "'");
      }
    }
    if (u.role == Role::EnumeratorPic) {
      if (u.scope_org_unit_ids.empty()) {
        invalid("enumerator '" + u.id + "' has an empty scope");
      }
      for (const auto& unit_id : u.scope_org_unit_ids) {
        OrgLevel level = md.tree_.unit(unit_id).level;
        bool entry_level = std::any_of(
            parts.datasets.begin(), parts.datasets.end(), [&](const DataSet& ds) {
              return ds.entry_level == level && u.dataset_in_scope(ds.id);
            });
        if (!entry_level) {
          invalid("enumerator '" + u.id + "' is scoped to '" + unit_id +
                  "', which is not an entry-level unit");
        }
      }
    } else if (u.role != Role::Admin && u.scope_org_unit_ids.empty()) {
      invalid("manager '" + u.id + "' has an empty scope");
    }
  }

  md.parts_ = std::move(parts);
  return md;
}

const Program& Metadata::program(std::string_view id) const {
  return lookup(parts_.programs, programs_, id, ErrorCode::UnknownProgram, "program");
}
const DataElement& Metadata::element(std::string_view id) const {
  return lookup(parts_.elements, elements_, id, ErrorCode::UnknownElement, "data element");
}
const DataSet& Metadata::dataset(std::string_view id) const {
  return lookup(parts_.datasets, datasets_, id, ErrorCode::UnknownDataset, "data set");
}
const Indicator& Metadata::indicator(std::string_view id) const {
  return lookup(parts_.indicators, indicators_, id, ErrorCode::UnknownIndicator, "indicator");
}
const User& Metadata::user(std::string_view id) const {
  return lookup(parts_.users, users_, id, ErrorCode::UnknownUser, "user");
}

bool Metadata::has_program(std::string_view id) const { return programs_.find(id) != programs_.end(); }
bool Metadata::has_element(std::string_view id) const { return elements_.find(id) != elements_.end(); }
bool Metadata::has_dataset(std::string_view id) const { return datasets_.find(id) != datasets_.end(); }
bool Metadata::has_indicator(std::string_view id) const { return indicators_.find(id) != indicators_.end(); }
bool Metadata::has_user(std::string_view id) const { return users_.find(id) != users_.end(); }

const DataSet* Metadata::dataset_of(std::string_view element_id) const {
  auto it = element_dataset_.find(element_id);
  return it == element_dataset_.end() ? nullptr : &parts_.datasets[it->second];
}

bool check_authority(const DataElement& element, const Program& submitting_program) {
  return element.owner_program_id == submitting_program.id;
}

// ---------------------------------------------------------------------------
// JSON interchange

json to_json(const OrgUnit& u) {
  json j{{"id", u.id}, {"name", u.name}, {"level", to_string(u.level)}};
  j["parent_id"] = u.parent_id ? json(*u.parent_id) : json(nullptr);
  return j;
}

json to_json(const Program& p) { return {{"id", p.id}, {"name", p.name}}; }

json to_json(const DataElement& e) {
  json j{{"id", e.id}, {"name", e.name}, {"value_type", to_string(e.value_type)}};
  j["range"] = e.range ? json::array({e.range->min, e.range->max}) : json(nullptr);
  j["owner_program_id"] = e.owner_program_id;
  j["aggregation"] = to_string(e.aggregation);
  return j;
}

json to_json(const DataSet& d) {
  return {{"id", d.id},
          {"name", d.name},
          {"period_type", to_string(d.period_type)},
          {"element_ids", d.element_ids},
          {"entry_level", to_string(d.entry_level)},
          {"deadline_days", d.deadline_days}};
}

json to_json(const Indicator& i) {
  return {{"id", i.id},
          {"name", i.name},
          {"numerator_element_id", i.numerator_element_id},
          {"denominator_element_id", i.denominator_element_id},
          {"factor", i.factor},
          {"spm_category", to_string(i.spm_category)},
          {"placeholder", i.placeholder}};
}

json to_json(const User& u, bool include_credential) {
  json j{{"id", u.id},
         {"name", u.name},
         {"role", to_string(u.role)},
         {"scope_org_unit_ids", u.scope_org_unit_ids},
         {"scope_dataset_ids", u.scope_dataset_ids}};
  if (include_credential && !u.credential.empty()) j["credential"] = u.credential;
  return j;
}

json metadata_to_json(const Metadata& md, bool include_credentials) {
  const auto& p = md.parts();
  json doc = json::object();
  auto& units = doc["orgUnits"] = json::array();
  for (const OrgUnit* u : md.tree().preorder()) units.push_back(to_json(*u));
  auto& programs = doc["programs"] = json::array();
  for (const auto& x : p.programs) programs.push_back(to_json(x));
  auto& elements = doc["dataElements"] = json::array();
  for (const auto& x : p.elements) elements.push_back(to_json(x));
  auto& datasets = doc["dataSets"] = json::array();
  for (const auto& x : p.datasets) datasets.push_back(to_json(x));
  auto& indicators = doc["indicators"] = json::array();
  for (const auto& x : p.indicators) indicators.push_back(to_json(x));
  auto& users = doc["users"] = json::array();
  for (const auto& x : p.users) users.push_back(to_json(x, include_credentials));
  return doc;
}

namespace {

std::string str_field(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    invalid(ctx + ": field '" + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::string opt_str_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  return (it != obj.end() && it->is_string()) ? it->get<std::string>() : std::string();
}

std::vector<std::string> str_list(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_array()) invalid(ctx + ": field '" + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) invalid(ctx + ": field '" + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

const json& array_field(const json& doc, const char* key) {
  static const json empty = json::array();
  auto it = doc.find(key);
  if (it == doc.end()) return empty;
  if (!it->is_array()) invalid(std::string("'") + key + "' must be an array");
  return *it;
}

template <typename F>
auto with_context(const std::string& ctx, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) invalid(ctx + ": " + e.what());
    throw;
  }
}

}  // namespace

Metadata metadata_from_json(const json& doc) {
  if (!doc.is_object()) invalid("metadata document must be an object");
  Metadata::Parts parts;

  for (const auto& j : array_field(doc, "orgUnits")) {
    std::string ctx = "orgUnits[" + opt_str_field(j, "id") + "]";
    OrgUnit u;
    u.id = str_field(j, "id", ctx);
    u.name = opt_str_field(j, "name");
    u.level = with_context(ctx, [&] { return parse_org_level(str_field(j, "level", ctx)); });
    auto it = j.find("parent_id");
    if (it != j.end() && !it->is_null()) u.parent_id = str_field(j, "parent_id", ctx);
    parts.org_units.push_back(std::move(u));
  }
  for (const auto& j : array_field(doc, "programs")) {
    std::string ctx = "programs[" + opt_str_field(j, "id") + "]";
    parts.programs.push_back({str_field(j, "id", ctx), opt_str_field(j, "name")});
  }
  for (const auto& j : array_field(doc, "dataElements")) {
    std::string ctx = "dataElements[" + opt_str_field(j, "id") + "]";
    DataElement e;
    e.id = str_field(j, "id", ctx);
    e.name = opt_str_field(j, "name");
    e.value_type = with_context(ctx, [&] { return parse_value_type(str_field(j, "value_type", ctx)); });
    auto r = j.find("range");
    if (r != j.end() && !r->is_null()) {
      if (r->is_array() && r->size() == 2 && (*r)[0].is_number() && (*r)[1].is_number()) {
        e.range = ValueRange{(*r)[0].get<double>(), (*r)[1].get<double>()};
      } else if (r->is_object() && r->contains("min") && r->contains("max") &&
                 (*r)["min"].is_number() && (*r)["max"].is_number()) {
        e.range = ValueRange{(*r)["min"].get<double>(), (*r)["max"].get<double>()};
      } else {
        invalid(ctx + ": range must be [min, max]");
      }
    }
    e.owner_program_id = str_field(j, "owner_program_id", ctx);
    std::string agg = opt_str_field(j, "aggregation");
    e.aggregation = agg.empty() ? Aggregation::Sum
                                : with_context(ctx, [&] { return parse_aggregation(agg); });
    parts.elements.push_back(std::move(e));
  }
  for (const auto& j : array_field(doc, "dataSets")) {
    std::string ctx = "dataSets[" + opt_str_field(j, "id") + "]";
    DataSet d;
    d.id = str_field(j, "id", ctx);
    d.name = opt_str_field(j, "name");
    d.period_type = with_context(ctx, [&] { return parse_period_type(str_field(j, "period_type", ctx)); });
    d.element_ids = str_list(j, "element_ids", ctx);
    d.entry_level = with_context(ctx, [&] { return parse_org_level(str_field(j, "entry_level", ctx)); });
    auto dl = j.find("deadline_days");
    if (dl != j.end()) {
      if (!dl->is_number_integer()) invalid(ctx + ": deadline_days must be an integer");
      d.deadline_days = dl->get<int>();
    }
    parts.datasets.push_back(std::move(d));
  }
  for (const auto& j : array_field(doc, "indicators")) {
    std::string ctx = "indicators[" + opt_str_field(j, "id") + "]";
    Indicator ind;
    ind.id = str_field(j, "id", ctx);
    ind.name = opt_str_field(j, "name");
    ind.numerator_element_id = str_field(j, "numerator_element_id", ctx);
    ind.denominator_element_id = str_field(j, "denominator_element_id", ctx);
    auto f = j.find("factor");
    if (f != j.end()) {
      if (!f->is_number()) invalid(ctx + ": factor must be a number");
      ind.factor = f->get<double>();
    }
    ind.spm_category = with_context(ctx, [&] { return parse_spm_category(str_field(j, "spm_category", ctx)); });
    ind.placeholder = j.value("placeholder", false);
    parts.indicators.push_back(std::move(ind));
  }
  for (const auto& j : array_field(doc, "users")) {
    std::string ctx = "users[" + opt_str_field(j, "id") + "]";
    User u;
    u.id = str_field(j, "id", ctx);
    u.name = opt_str_field(j, "name");
    u.role = with_context(ctx, [&] { return parse_role(str_field(j, "role", ctx)); });
    u.scope_org_unit_ids = str_list(j, "scope_org_unit_ids", ctx);
    u.scope_dataset_ids = str_list(j, "scope_dataset_ids", ctx);
    u.credential = opt_str_field(j, "credential");
    parts.users.push_back(std::move(u));
  }
  return Metadata::build(std::move(parts));
}

Metadata load_metadata_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedFile, "cannot open metadata file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedFile, "metadata file '" + path + "': " + e.what());
  }
  return metadata_from_json(doc);
}

}  // namespace spmdw
