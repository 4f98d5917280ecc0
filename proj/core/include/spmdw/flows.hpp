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
#include <vector>

#include <nlohmann/json.hpp>

#include "spmdw/workflow.hpp"

namespace spmdw {

/// Logical steps from entry to province-level visibility under one policy.
struct FlowRow {
  FlowPolicyName policy = FlowPolicyName::Phase2C;
  std::string entry_levels;  // levels actually used, '|' separated
  std::size_t submissions = 0;
  int blocking_hops = 0;     // worst case over the fixture
  std::string path;          // e.g. SUBDISTRICT>DISTRICT>ADMIN_CITY>PROVINCE
};

/// The fixture holds "orgUnits" (as in a metadata document) and
/// "submissions": [{"org_unit_id": ...}], each naming the unit where the
/// service was delivered. Under each policy the data is entered at the
/// nearest ancestor-or-self at an entry level; a blocking policy waits for
/// one verification per level on the way up. No submissions yields no rows.
/// Throws Error(MalformedFile).
std::vector<FlowRow> compare_flows(const nlohmann::json& fixture);

std::string render_flows_csv(const std::vector<FlowRow>& rows);

}  // namespace spmdw
