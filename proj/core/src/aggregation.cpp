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

#include "spmdw/aggregation.hpp"

#include "spmdw/error.hpp"

namespace spmdw {

namespace {

PeriodType reporting_grain(const Metadata& md, std::string_view element_id) {
  const DataSet* ds = md.dataset_of(element_id);
  return ds ? ds->period_type : PeriodType::Month;
}

Status lower_status(Status a, Status b) {
  return status_rank(a) <= status_rank(b) ? a : b;
}

// Folds child cells with the element's aggregation rule.
std::optional<AggregateCell> combine(const DataElement& element, std::string_view org_unit,
                                     const Period& period,
                                     const std::vector<AggregateCell>& parts) {
  if (parts.empty()) return std::nullopt;
  AggregateCell out{element.id, std::string(org_unit), period.key(), 0, 0, Status::Published};
  for (const auto& c : parts) {
    out.value += c.value;
    out.provenance += c.provenance;
    out.status_floor = lower_status(out.status_floor, c.status_floor);
  }
  if (element.aggregation == Aggregation::Average) {
    out.value /= static_cast<double>(parts.size());
  }
  return out;
}

}  // namespace

std::optional<AggregateCell> aggregate_up(const Metadata& md, const StoreState& store,
                                          std::string_view element_id, const Period& period,
                                          std::string_view target_unit, Status min_status) {
  const DataElement& element = md.element(element_id);
  const OrgTree& tree = md.tree();
  tree.unit(target_unit);  // UnknownUnit

  const std::string period_key = period.key();
  AggregateCell cell{element.id, std::string(target_unit), period_key, 0, 0, Status::Published};
  double sum = 0;
  for (auto it = store.values.lower_bound({element.id, period_key, ""});
       it != store.values.end() && it->first.element_id == element.id &&
       it->first.period == period_key;
       ++it) {
    const DataValue& v = it->second;
    if (!meets_floor(v.status, min_status)) continue;
    if (!tree.contains(v.org_unit_id) || !tree.in_subtree(v.org_unit_id, target_unit)) continue;
    sum += v.value;
    ++cell.provenance;
    cell.status_floor = lower_status(cell.status_floor, v.status);
  }
  if (cell.provenance == 0) return std::nullopt;
  cell.value = element.aggregation == Aggregation::Average
                   ? sum / static_cast<double>(cell.provenance)
                   : sum;
  return cell;
}

std::optional<AggregateCell> aggregate_period(const Metadata& md, const StoreState& store,
                                              std::string_view element_id,
                                              std::string_view org_unit,
                                              const Period& coarse_period, Status min_status) {
  if (coarse_period.type() == PeriodType::Month) {
    throw Error(ErrorCode::InvalidArgument,
                "aggregate_period needs a QUARTER or YEAR, got " + coarse_period.key());
  }
  const DataElement& element = md.element(element_id);
  md.tree().unit(org_unit);
  std::vector<AggregateCell> months;
  for (const Period& m : period_children(coarse_period)) {
    if (auto c = aggregate_up(md, store, element_id, m, org_unit, min_status)) {
      months.push_back(std::move(*c));
    }
  }
  return combine(element, org_unit, coarse_period, months);
}

std::optional<AggregateCell> aggregate_cell(const Metadata& md, const StoreState& store,
                                            std::string_view element_id,
                                            std::string_view org_unit, const Period& period,
                                            Status min_status) {
  const DataElement& element = md.element(element_id);
  md.tree().unit(org_unit);
  PeriodType grain = reporting_grain(md, element_id);
  if (period.type() == grain) {
    return aggregate_up(md, store, element_id, period, org_unit, min_status);
  }
  std::vector<AggregateCell> parts;
  for (const Period& p : periods_at_grain(period, grain)) {
    if (auto c = aggregate_up(md, store, element_id, p, org_unit, min_status)) {
      parts.push_back(std::move(*c));
    }
  }
  return combine(element, org_unit, period, parts);
}

IndicatorValue compute_indicator(const Metadata& md, const StoreState& store,
                                 std::string_view indicator_id, std::string_view org_unit,
                                 const Period& period, Status min_status) {
  const Indicator& ind = md.indicator(indicator_id);
  auto num = aggregate_cell(md, store, ind.numerator_element_id, org_unit, period, min_status);
  auto den = aggregate_cell(md, store, ind.denominator_element_id, org_unit, period, min_status);
  if (!num) {
    throw Error(ErrorCode::MissingNumerator,
                "no " + ind.numerator_element_id + " data for " + std::string(org_unit) + " " +
                    period.key());
  }
  if (!den) {
    throw Error(ErrorCode::MissingDenominator,
                "no " + ind.denominator_element_id + " data for " + std::string(org_unit) +
                    " " + period.key());
  }
  if (den->value == 0) {
    throw Error(ErrorCode::ZeroDenominator,
                "denominator " + ind.denominator_element_id + " is zero for " +
                    std::string(org_unit) + " " + period.key());
  }
  IndicatorValue out;
  out.value = ind.factor * num->value / den->value;
  out.numerator = std::move(*num);
  out.denominator = std::move(*den);
  return out;
}

}  // namespace spmdw
