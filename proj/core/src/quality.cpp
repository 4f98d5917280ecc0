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

#include "spmdw/quality.hpp"

#include <algorithm>
#include <cmath>

#include "spmdw/error.hpp"
#include "spmdw/numeric.hpp"

namespace spmdw {

using nlohmann::json;

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::Current: return "CURRENT";
    case Dimension::Correct: return "CORRECT";
    case Dimension::Consistent: return "CONSISTENT";
    case Dimension::Complete: return "COMPLETE";
  }
  return "CORRECT";
}

std::string_view to_string(Severity s) {
  return s == Severity::Block ? "BLOCK" : "FLAG";
}

json to_json(const QualityFinding& f) {
  json subject{{"kind", f.subject.kind == Subject::Kind::Element ? "ELEMENT" : "DATASET"}};
  subject[f.subject.kind == Subject::Kind::Element ? "element_id" : "dataset_id"] = f.subject.id;
  subject["org_unit_id"] = f.subject.org_unit_id;
  subject["period"] = f.subject.period;
  return {{"dimension", to_string(f.dimension)},
          {"severity", to_string(f.severity)},
          {"subject", subject},
          {"code", f.code},
          {"message", f.message},
          {"requires_justification", f.requires_justification}};
}

json to_json(std::span<const QualityFinding> findings) {
  json arr = json::array();
  for (const auto& f : findings) arr.push_back(to_json(f));
  return arr;
}

bool has_block(std::span<const QualityFinding> findings) {
  return std::any_of(findings.begin(), findings.end(),
                     [](const QualityFinding& f) { return f.severity == Severity::Block; });
}

std::vector<QualityFinding> check_correct(double value, const DataElement& element,
                                          const ValueContext& ctx) {
  std::vector<QualityFinding> out;
  auto subject = Subject::element(element.id, ctx.org_unit_id, ctx.period);
  if (!std::isfinite(value)) {
    out.push_back({Dimension::Correct, Severity::Block, subject, "TYPE",
                   "value is not a finite number", false});
    return out;
  }
  if (element.value_type == ValueType::NonNegativeInteger &&
      (value < 0 || value != std::trunc(value))) {
    out.push_back({Dimension::Correct, Severity::Block, subject, "TYPE",
                   "value " + format_number(value) + " is not a non-negative integer",
                   false});
  }
  if (auto range = element.effective_range();
      range && (value < range->min || value > range->max)) {
    out.push_back({Dimension::Correct, Severity::Block, subject, "RANGE",
                   "value " + format_number(value) + " outside [" + format_number(range->min) +
                       ", " + format_number(range->max) + "]",
                   false});
  }
  return out;
}

CompletenessResult check_complete(const DataSet& dataset,
                                  const std::map<std::string, double>& entered,
                                  std::string_view org_unit_id, const Period& period) {
  for (const auto& [element_id, value] : entered) {
    if (!dataset.contains(element_id)) {
      throw Error(ErrorCode::ForeignElement,
                  "element '" + element_id + "' is not part of data set '" + dataset.id + "'",
                  {{"element_id", element_id}, {"dataset_id", dataset.id}});
    }
  }
  CompletenessResult result;
  result.ratio = static_cast<double>(entered.size()) /
                 static_cast<double>(dataset.element_ids.size());
  for (const auto& id : dataset.element_ids) {
    if (!entered.count(id)) result.missing.push_back(id);
  }
  if (!result.missing.empty()) {
    std::string names;
    for (const auto& m : result.missing) names += (names.empty() ? "" : ", ") + m;
    result.findings.push_back(
        {Dimension::Complete, Severity::Block,
         Subject::dataset(dataset.id, std::string(org_unit_id), period.key()), "INCOMPLETE",
         std::to_string(result.missing.size()) + " of " +
             std::to_string(dataset.element_ids.size()) + " elements missing: " + names,
         false});
  }
  return result;
}

long days_after_period_end(const Period& period, Timestamp submitted_at) {
  auto submitted_day = std::chrono::floor<std::chrono::days>(submitted_at);
  return static_cast<long>((submitted_day - period.last_day()).count());
}

std::optional<QualityFinding> check_current(const DataSet& dataset, const Period& period,
                                            Timestamp submitted_at,
                                            std::string_view org_unit_id) {
  if (period.type() != dataset.period_type) {
    throw Error(ErrorCode::PeriodTypeMismatch,
                "data set '" + dataset.id + "' reports per " +
                    std::string(to_string(dataset.period_type)) + ", got " + period.key());
  }
  long late_by = days_after_period_end(period, submitted_at);
  if (late_by <= dataset.deadline_days) return std::nullopt;
  return QualityFinding{
      Dimension::Current, Severity::Flag,
      Subject::dataset(dataset.id, std::string(org_unit_id), period.key()), "LATE",
      "submitted " + std::to_string(late_by) + " days after period end, deadline " +
          std::to_string(dataset.deadline_days),
      false};
}

namespace {

// |v - h| relative to |h|; a zero reference differs infinitely from any
// non-zero value.
double relative_difference(double v, double h) {
  if (h == 0) return v == 0 ? 0.0 : INFINITY;
  return std::fabs(v - h) / std::fabs(h);
}

}  // namespace

std::optional<QualityFinding> check_consistent(double value, const DataElement& element,
                                               const ElementHistory& history,
                                               double k_sigma, std::string_view period) {
  if (!(k_sigma > 0)) {
    throw Error(ErrorCode::InvalidArgument, "k_sigma must be positive");
  }
  const auto& pts = history.points;
  if (pts.empty()) return std::nullopt;

  const double n = static_cast<double>(pts.size());
  double mean = 0;
  for (const auto& [p, v] : pts) mean += v;
  mean /= n;
  double s = 0;
  if (pts.size() >= 2) {
    double ss = 0;
    for (const auto& [p, v] : pts) ss += (v - mean) * (v - mean);
    s = std::sqrt(ss / (n - 1));
  }

  auto subject = Subject::element(element.id, history.org_unit_id, std::string(period));
  if (pts.size() >= 3 && s > 0) {
    double deviation = std::fabs(value - mean);
    if (deviation <= k_sigma * s) return std::nullopt;
    return QualityFinding{Dimension::Consistent, Severity::Flag, subject, "DEVIATION",
                          "value " + format_number(value) + " deviates " +
                              format_number(deviation / s) + " sd from history mean " +
                              format_number(mean),
                          true};
  }

  // Cold start: too little history, or a flat one.
  if (s == 0 && value == mean) return std::nullopt;
  bool far_from_all = std::all_of(pts.begin(), pts.end(), [&](const auto& pt) {
    return relative_difference(value, pt.second) > 1.0;
  });
  if (!far_from_all) return std::nullopt;
  return QualityFinding{Dimension::Consistent, Severity::Flag, subject, "DEVIATION",
                        "value " + format_number(value) +
                            " differs by more than 100% from every prior value",
                        true};
}

CrossRuleResult cross_element_rules(const std::map<std::string, double>& values,
                                    std::span<const CrossRule> rules,
                                    const ValueContext& ctx) {
  CrossRuleResult out;
  for (const auto& rule : rules) {
    auto num = values.find(rule.numerator_id);
    auto den = values.find(rule.denominator_id);
    if (num == values.end() || den == values.end()) {
      out.unevaluated.push_back(rule);
      continue;
    }
    if (num->second > den->second) {
      out.findings.push_back(
          {Dimension::Consistent, Severity::Flag,
           Subject::element(rule.numerator_id, ctx.org_unit_id, ctx.period), "CROSS_RULE",
           rule.numerator_id + " (" + format_number(num->second) + ") exceeds " +
               rule.denominator_id + " (" + format_number(den->second) + ")",
           true});
    }
  }
  return out;
}

}  // namespace spmdw
