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

#include "spmdw/metadata.hpp"
#include "spmdw/model.hpp"
#include "spmdw/period.hpp"
#include "spmdw/store.hpp"

namespace spmdw {

/// A computed (never stored) value at any level of the tree.
struct AggregateCell {
  std::string subject_id;  // element or indicator id
  std::string org_unit_id;
  std::string period;
  double value = 0;
  std::int64_t provenance = 0;  // number of entry-level facts contributing
  Status status_floor = Status::Published;
};

/// Rolls the element's entry-level facts for `period` up to `target_unit`:
/// the sum (SUM) or the arithmetic mean over leaves (AVERAGE) of every fact
/// in the unit's subtree whose status meets `min_status`. nullopt when no
/// fact qualifies. Throws UnknownUnit / UnknownElement.
std::optional<AggregateCell> aggregate_up(const Metadata& md, const StoreState& store,
                                          std::string_view element_id, const Period& period,
                                          std::string_view target_unit, Status min_status);

/// Combines the element's monthly cells over a QUARTER or YEAR with the
/// element's own aggregation rule. Throws InvalidArgument for MONTH.
std::optional<AggregateCell> aggregate_period(const Metadata& md, const StoreState& store,
                                              std::string_view element_id,
                                              std::string_view org_unit,
                                              const Period& coarse_period, Status min_status);

/// Cell for any period at or above the element's reporting grain.
std::optional<AggregateCell> aggregate_cell(const Metadata& md, const StoreState& store,
                                            std::string_view element_id,
                                            std::string_view org_unit, const Period& period,
                                            Status min_status);

struct IndicatorValue {
  double value = 0;
  AggregateCell numerator;
  AggregateCell denominator;
};

/// factor * numerator / denominator over aggregated cells. Throws
/// ZeroDenominator, MissingNumerator, MissingDenominator, UnknownIndicator.
IndicatorValue compute_indicator(const Metadata& md, const StoreState& store,
                                 std::string_view indicator_id, std::string_view org_unit,
                                 const Period& period, Status min_status);

}  // namespace spmdw
