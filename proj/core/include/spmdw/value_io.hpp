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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "spmdw/metadata.hpp"
#include "spmdw/period.hpp"
#include "spmdw/quality.hpp"
#include "spmdw/store.hpp"

namespace spmdw {

inline constexpr std::string_view kValueRowHeader =
    "element_id,org_unit_id,period,value,status,version,updated_at,entered_by,justification";

enum class ImportMode { Strict, SkipBad };
std::string_view to_string(ImportMode m);
ImportMode parse_import_mode(std::string_view text);

struct RejectedRow {
  std::size_t line = 0;
  std::string code;  // error code name
  std::string reason;
};

struct ImportReport {
  std::size_t applied = 0;
  std::vector<RejectedRow> rejected;
};

nlohmann::json to_json(const ImportReport& r);

/// Loads ValueRow CSV text in one commit. Rows are checked for known
/// element/unit, entry at the dataset's entry level, period grain, status,
/// version, duplicates, correctness and whole-form completeness. STRICT
/// throws Error(ImportAborted) (details.rejected) on the first bad row and
/// stores nothing. Throws Error(MalformedFile) for structural problems.
ImportReport import_values(Store& store, const Metadata& md, std::string_view csv,
                           ImportMode mode, std::string_view actor = "import");

struct ExportFilter {
  std::string org_unit_id;  // subtree root; empty = whole tree
  std::optional<Period> from;
  std::optional<Period> to;
  Status min_status = Status::Draft;
};

/// Rows ordered by unit preorder, period, element id. Throws UnknownUnit.
std::string export_values(const StoreState& state, const Metadata& md,
                          const ExportFilter& filter = {});

struct BridgeExport {
  std::string records_csv;
  std::string manifest_csv;
  std::size_t record_count = 0;
};

inline constexpr std::string_view kBridgeHeader =
    "period,indicator_id,spm_category,org_unit_id,numerator,denominator,value";
inline constexpr std::string_view kManifestHeader = "period,record_count,digest";

/// One record per (indicator, administrative city) with a value computed
/// from VALIDATED or PUBLISHED facts only. The manifest digest is the
/// SHA-256 of the records file.
BridgeExport ministry_bridge_export(const StoreState& state, const Metadata& md,
                                    const Period& period);

/// Runs the 4C checks over a ValueRow file without storing anything: per-row
/// type and range, then per form completeness, timeliness (updated_at as the
/// submission time), deviation against earlier periods in the same file and
/// cross-element rules. Throws Error(MalformedFile).
std::vector<QualityFinding> audit_values(const Metadata& md, std::string_view csv,
                                         double k_sigma = kDefaultKSigma);

}  // namespace spmdw
