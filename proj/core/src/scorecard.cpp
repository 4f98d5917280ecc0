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

#include "spmdw/scorecard.hpp"

#include <algorithm>
#include <map>

#include "spmdw/csv.hpp"
#include "spmdw/numeric.hpp"

namespace spmdw {

using nlohmann::json;

std::string_view to_string(Timeliness t) {
  switch (t) {
    case Timeliness::OnTime: return "ON_TIME";
    case Timeliness::Late: return "LATE";
    case Timeliness::Missing: return "MISSING";
  }
  return "MISSING";
}

std::vector<ScorecardRow> quality_scorecard(const Workflow& workflow, const StoreState& state,
                                            std::string_view root, const Period& period) {
  auto md = workflow.metadata();
  const OrgTree& tree = md->tree();
  tree.unit(root);

  std::vector<const DataSet*> datasets;
  for (const auto& ds : md->parts().datasets) {
    if (ds.period_type == period.type()) datasets.push_back(&ds);
  }
  std::sort(datasets.begin(), datasets.end(),
            [](const DataSet* a, const DataSet* b) { return a->id < b->id; });

  std::vector<ScorecardRow> rows;
  for (const OrgUnit* unit : tree.subtree(root)) {
    for (const DataSet* ds : datasets) {
      if (unit->level != ds->entry_level) continue;
      ScorecardRow row;
      row.org_unit_id = unit->id;
      row.dataset_id = ds->id;
      FormKey key{ds->id, unit->id, period.key()};

      std::map<std::string, double> values;
      std::map<std::string, std::string> justification;
      for (const auto& v : form_values(state, key, ds->element_ids)) {
        values[v.element_id] = v.value;
        justification[v.element_id] = v.justification;
        row.correct_violations += check_correct(v.value, md->element(v.element_id)).size();
      }
      row.completeness = check_complete(*ds, values, unit->id, period).ratio;

      const FormState* form = state.find_form(key);
      if (form && form->submitted_at) {
        row.timeliness = check_current(*ds, period, *form->submitted_at) ? Timeliness::Late
                                                                         : Timeliness::OnTime;
      }
      if (!values.empty()) {
        for (const auto& f : workflow.consistency_flags(*md, state, *ds, key, values)) {
          ++row.consistency_flags;
          if (!justification[f.subject.id].empty()) ++row.consistency_justified;
        }
        std::vector<CrossRule> rules;
        for (const auto& r : md->cross_rules()) {
          if (ds->contains(r.numerator_id) && ds->contains(r.denominator_id)) rules.push_back(r);
        }
        row.unevaluated_rules = cross_element_rules(values, rules).unevaluated.size();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

json to_json(const ScorecardRow& r) {
  return {{"org_unit_id", r.org_unit_id},
          {"dataset_id", r.dataset_id},
          {"timeliness", to_string(r.timeliness)},
          {"correct_violations", r.correct_violations},
          {"consistency_flags", r.consistency_flags},
          {"consistency_justified", r.consistency_justified},
          {"completeness", r.completeness},
          {"unevaluated_rules", r.unevaluated_rules},
          {"all_green", r.all_green()}};
}

std::string render_scorecard_csv(const std::vector<ScorecardRow>& rows) {
  CsvWriter w;
  w.row({"org_unit_id", "dataset_id", "timeliness", "correct_violations", "consistency_flags",
         "consistency_justified", "completeness", "unevaluated_rules"});
  for (const auto& r : rows) {
    w.row({r.org_unit_id, r.dataset_id, std::string(to_string(r.timeliness)),
           std::to_string(r.correct_violations), std::to_string(r.consistency_flags),
           std::to_string(r.consistency_justified), format_number(r.completeness),
           std::to_string(r.unevaluated_rules)});
  }
  return w.str();
}

}  // namespace spmdw
