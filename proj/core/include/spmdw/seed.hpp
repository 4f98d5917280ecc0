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
#include <random>
#include <string>
#include <vector>

#include "spmdw/metadata.hpp"
#include "spmdw/workflow.hpp"

namespace spmdw {

struct SeedOptions {
  /// SUBDISTRICT for the current and phase 2 flows, ADMIN_CITY for phase 1.
  OrgLevel entry_level = OrgLevel::Subdistrict;
  int deadline_days = 10;
  /// PBKDF2 cost for the seeded credentials; kept low so fixtures build fast.
  int password_iterations = 1000;
};

/// The Jakarta fixture: province, five administrative cities plus the
/// Thousand Islands regency, two districts each, four subdistricts per
/// district; one program, data set and coverage indicator per SPM category;
/// an admin, a department manager, one suboffice manager per city and one
/// enumerator per entry unit. Every seeded user's password is seed_password(id).
Metadata seed_metadata(const SeedOptions& options = {});

std::string seed_password(const std::string& user_id);

/// Id of the enumerator seeded for an entry unit.
std::string seed_pic_id(const std::string& org_unit_id);

/// A complete, in-range form for one instance, with served <= target.
FormSubmission generate_form(const Metadata& md, const DataSet& ds, const std::string& org_unit_id,
                             const Period& period, std::mt19937_64& rng);

/// Complete, in-range forms for every (entry unit, data set) of `md` at
/// `period`, with served <= target. Deterministic in `seed`.
std::vector<FormSubmission> generate_submissions(const Metadata& md, const Period& period,
                                                 std::uint64_t seed);

}  // namespace spmdw
