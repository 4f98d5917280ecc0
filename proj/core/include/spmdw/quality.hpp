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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "spmdw/metadata.hpp"
#include "spmdw/model.hpp"
#include "spmdw/period.hpp"
#include "spmdw/time.hpp"

namespace spmdw {

enum class Dimension { Current, Correct, Consistent, Complete };
enum class Severity { Block, Flag };

std::string_view to_string(Dimension d);
std::string_view to_string(Severity s);

/// What a finding is about: one value (element triple) or one form instance
/// (dataset triple).
struct Subject {
  enum class Kind { Element, Dataset };
  Kind kind = Kind::Element;
  std::string id;  // element id or dataset id
  std::string org_unit_id;
  std::string period;

  static Subject element(std::string id, std::string org_unit_id, std::string period) {
    return {Kind::Element, std::move(id), std::move(org_unit_id), std::move(period)};
  }
  static Subject dataset(std::string id, std::string org_unit_id, std::string period) {
    return {Kind::Dataset, std::move(id), std::move(org_unit_id), std::move(period)};
  }

  friend bool operator==(const Subject&, const Subject&) = default;
};

struct QualityFinding {
  Dimension dimension = Dimension::Correct;
  Severity severity = Severity::Block;
  Subject subject;
  std::string code;  // TYPE, RANGE, INCOMPLETE, LATE, DEVIATION, CROSS_RULE, AUTHORITY, ...
  std::string message;
  bool requires_justification = false;
};

nlohmann::json to_json(const QualityFinding& f);
nlohmann::json to_json(std::span<const QualityFinding> findings);
bool has_block(std::span<const QualityFinding> findings);

/// Prior values of one element at one unit, oldest first.
struct ElementHistory {
  std::string element_id;
  std::string org_unit_id;
  std::vector<std::pair<Period, double>> points;
};

/// Where a value sits; only used to fill in finding subjects.
struct ValueContext {
  std::string org_unit_id;
  std::string period;
};

/// Type and range validation. BLOCK on non-finite input, a fraction or negative
/// number for NON_NEGATIVE_INTEGER, and anything outside the effective range.
std::vector<QualityFinding> check_correct(double value, const DataElement& element,
                                          const ValueContext& ctx = {});

struct CompletenessResult {
  double ratio = 0;
  std::vector<QualityFinding> findings;
  std::vector<std::string> missing;
};

/// Throws Error(ForeignElement) when `entered` has an element outside the form.
CompletenessResult check_complete(const DataSet& dataset,
                                  const std::map<std::string, double>& entered,
                                  std::string_view org_unit_id, const Period& period);

/// FLAG LATE when the submission date is more than deadline_days after the
/// last day of the period. Throws Error(PeriodTypeMismatch).
std::optional<QualityFinding> check_current(const DataSet& dataset, const Period& period,
                                            Timestamp submitted_at,
                                            std::string_view org_unit_id = {});

/// Whole days between the period's last day and the submission's UTC date.
long days_after_period_end(const Period& period, Timestamp submitted_at);

/// Deviation detector: z-score against the history with at least 3 points
/// and a positive sample deviation, otherwise the cold-start relative rule.
/// Throws Error(InvalidArgument) unless k_sigma > 0.
std::optional<QualityFinding> check_consistent(double value, const DataElement& element,
                                               const ElementHistory& history,
                                               double k_sigma,
                                               std::string_view period = {});

struct CrossRuleResult {
  std::vector<QualityFinding> findings;
  std::vector<CrossRule> unevaluated;  // a side was missing
};

CrossRuleResult cross_element_rules(const std::map<std::string, double>& values,
                                    std::span<const CrossRule> rules,
                                    const ValueContext& ctx = {});

inline constexpr double kDefaultKSigma = 3.0;

}  // namespace spmdw
