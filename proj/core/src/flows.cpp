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

#include "spmdw/flows.hpp"

#include <algorithm>
#include <set>

#include "spmdw/csv.hpp"
#include "spmdw/error.hpp"

namespace spmdw {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& msg) { throw Error(ErrorCode::MalformedFile, msg); }

std::vector<OrgUnit> parse_units(const json& arr) {
  if (!arr.is_array()) malformed("'orgUnits' must be an array");
  std::vector<OrgUnit> units;
  for (const auto& j : arr) {
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("level") ||
        !j["level"].is_string()) {
      malformed("each org unit needs string 'id' and 'level'");
    }
    OrgUnit u;
    u.id = j["id"];
    u.name = j.value("name", "");
    u.level = parse_org_level(j["level"].get<std::string>());
    if (auto p = j.find("parent_id"); p != j.end() && !p->is_null()) {
      if (!p->is_string()) malformed("parent_id of '" + u.id + "' must be a string");
      u.parent_id = p->get<std::string>();
    }
    units.push_back(std::move(u));
  }
  return units;
}

}  // namespace

std::vector<FlowRow> compare_flows(const json& fixture) {
  if (!fixture.is_object()) malformed("fixture must be an object");
  const json submissions = fixture.value("submissions", json::array());
  if (!submissions.is_array()) malformed("'submissions' must be an array");
  if (submissions.empty()) return {};

  OrgTree tree;
  try {
    std::vector<OrgUnit> units = parse_units(fixture.value("orgUnits", json::array()));
    tree = build_org_tree(units);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedFile) throw;
    malformed(std::string("bad org tree: ") + e.what());
  }

  std::vector<std::string> sites;
  for (const auto& s : submissions) {
    if (!s.is_object() || !s.contains("org_unit_id") || !s["org_unit_id"].is_string()) {
      malformed("each submission needs a string 'org_unit_id'");
    }
    std::string id = s["org_unit_id"];
    if (!tree.contains(id)) malformed("submission names unknown unit '" + id + "'");
    sites.push_back(std::move(id));
  }

  std::vector<FlowRow> rows;
  for (FlowPolicyName name :
       {FlowPolicyName::CurrentA, FlowPolicyName::Phase1B, FlowPolicyName::Phase2C}) {
    FlowPolicy policy = flow_policy(name);
    FlowRow row;
    row.policy = name;
    std::set<int> levels;
    for (const auto& site : sites) {
      std::vector<OrgUnit> chain{tree.unit(site)};
      for (auto& a : tree.ancestors(site)) chain.push_back(std::move(a));
      auto entry = std::find_if(chain.begin(), chain.end(),
                                [&](const OrgUnit& u) { return policy.allows_entry_at(u.level); });
      if (entry == chain.end()) {
        malformed("unit '" + site + "' has no entry point under " + std::string(to_string(name)));
      }
      levels.insert(static_cast<int>(entry->level));
      int hops = policy.blocking ? static_cast<int>(std::distance(entry, chain.end())) - 1 : 0;
      if (row.submissions == 0 || hops > row.blocking_hops) {
        row.blocking_hops = hops;
        std::string path;
        for (auto it = entry; it != chain.end(); ++it) {
          if (!path.empty()) path.push_back('>');
          path += to_string(it->level);
        }
        row.path = path;
      }
      ++row.submissions;
    }
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
      if (!row.entry_levels.empty()) row.entry_levels.push_back('|');
      row.entry_levels += to_string(static_cast<OrgLevel>(*it));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_flows_csv(const std::vector<FlowRow>& rows) {
  CsvWriter w;
  w.row({"policy", "entry_level", "submissions", "blocking_hops", "path"});
  for (const auto& r : rows) {
    w.row({std::string(to_string(r.policy)), r.entry_levels, std::to_string(r.submissions),
           std::to_string(r.blocking_hops), r.path});
  }
  return w.str();
}

}  // namespace spmdw
