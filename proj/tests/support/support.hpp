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
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "spmdw/metadata.hpp"
#include "spmdw/service.hpp"
#include "spmdw/store.hpp"
#include "spmdw/sync.hpp"
#include "spmdw/workflow.hpp"

namespace spmdw::test {

std::string fixture_path(const std::string& relative);
std::string read_text(const std::string& path);

/// 2025-02-05T00:00:00Z, a few days after the January deadline base.
Timestamp t0();

/// Seeded Jakarta metadata, cached per entry level.
std::shared_ptr<const Metadata> seeded(OrgLevel entry_level = OrgLevel::Subdistrict);

/// Entry level the seeded metadata needs for `policy`.
OrgLevel entry_level_for(FlowPolicyName policy);

/// Random four-level tree with at most `max_leaves` subdistricts, one SUM
/// integer element and one AVERAGE decimal element in a monthly data set,
/// plus an indicator over two SUM elements.
Metadata random_metadata(std::mt19937_64& rng, int max_leaves);

/// Writes raw facts, bypassing the workflow.
void put_values(Store& store, const std::vector<DataValue>& values);

/// Random facts for every entry unit of `md` at `period`: roughly 15% missing,
/// statuses drawn uniformly.
std::vector<DataValue> random_facts(const Metadata& md, const Period& period, std::mt19937_64& rng);

// Independent oracles: written against the raw metadata parts only.

/// Position of a status on DRAFT..PUBLISHED with REJECTED at DRAFT.
int oracle_rank(Status s);

/// True when `unit` is `ancestor` or below it, following parent_id links.
bool oracle_under(const Metadata& md, const std::string& unit, const std::string& ancestor);

/// Sum (SUM) or mean (AVERAGE) over qualifying leaf facts; nullopt when none.
std::optional<double> oracle_rollup(const Metadata& md, const std::vector<DataValue>& facts,
                                    const std::string& element_id, const std::string& period,
                                    const std::string& target, Status min_status);

/// Pushes `records` one at a time, in order, to a fresh always-connected
/// server and returns its final state.
std::shared_ptr<const StoreState> replay_connected(std::shared_ptr<const Metadata> md, FlowPolicy policy,
                                                   const std::vector<std::pair<ChangeRecord, std::string>>& records,
                                                   Timestamp at);

/// Every stored value as export CSV followed by one line per form
/// (key, status, version): the part of a store that replicas must agree on.
std::string store_fingerprint(const StoreState& state, const Metadata& md);

/// Service with a volatile store and a fixed clock the test can move.
struct ServiceHarness {
  explicit ServiceHarness(FlowPolicyName policy = FlowPolicyName::Phase2C);

  std::shared_ptr<const Metadata> md;
  Store store;
  Timestamp now;
  std::unique_ptr<Service> service;

  ApiResponse call(const std::string& method, const std::string& path,
                   const std::string& token = {}, const std::string& body = {},
                   std::map<std::string, std::string> query = {});
  /// Logs in with the seeded password.
  std::string login(const std::string& user_id);
};

/// Submits a ds-tb form for every subdistrict and leaves one sync conflict
/// per district.
void populate_everywhere(ServiceHarness& h);

struct ScopeViolation {
  std::string user;
  std::string path;
  std::string asked;
  std::string unit;
};

/// Sends each user a battery of reads and refused writes and reports every
/// org unit id in a response body that is outside the user's scope and was
/// not named in the request itself.
std::vector<ScopeViolation> scope_scan(ServiceHarness& h, const std::vector<std::string>& users);

struct ContractPairs {
  std::map<std::string, std::set<std::string>> codes;  // "METHOD /path" -> error codes
  std::vector<std::string> mismatched_status;          // responses whose status disagrees with the code
};

/// Drives every endpoint into each failure it is known to report.
ContractPairs error_contract_pairs();

/// A complete seeded form for the unit's first PIC.
FormSubmission sample_form(const Metadata& md, const std::string& dataset_id,
                           const std::string& unit, const std::string& period,
                           std::uint64_t seed = 1);

}  // namespace spmdw::test
