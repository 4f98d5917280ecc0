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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "spmdw/workflow.hpp"

namespace spmdw {

enum class Timeliness { OnTime, Late, Missing };
std::string_view to_string(Timeliness t);

/// 4C summary of one form instance.
struct ScorecardRow {
  std::string org_unit_id;
  std::string dataset_id;
  Timeliness timeliness = Timeliness::Missing;
  std::size_t correct_violations = 0;
  std::size_t consistency_flags = 0;
  std::size_t consistency_justified = 0;
  double completeness = 0;
  std::size_t unevaluated_rules = 0;

  bool all_green() const {
    return timeliness == Timeliness::OnTime && correct_violations == 0 &&
           consistency_flags == consistency_justified && completeness == 1.0;
  }
};

/// One row per (entry-level unit under `root`, data set reporting at the
/// period's grain), units in preorder and data sets by id. Throws UnknownUnit.
std::vector<ScorecardRow> quality_scorecard(const Workflow& workflow, const StoreState& state,
                                            std::string_view root, const Period& period);

nlohmann::json to_json(const ScorecardRow& r);
std::string render_scorecard_csv(const std::vector<ScorecardRow>& rows);

}  // namespace spmdw
