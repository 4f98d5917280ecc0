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

#include "spmdw/value_io.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "spmdw/aggregation.hpp"
#include "spmdw/csv.hpp"
#include "spmdw/digest.hpp"
#include "spmdw/error.hpp"
#include "spmdw/numeric.hpp"
#include "spmdw/quality.hpp"

namespace spmdw {

using nlohmann::json;

std::string_view to_string(ImportMode m) { return m == ImportMode::Strict ? "STRICT" : "SKIP_BAD"; }

ImportMode parse_import_mode(std::string_view text) {
  if (text == "STRICT") return ImportMode::Strict;
  if (text == "SKIP_BAD") return ImportMode::SkipBad;
  throw Error(ErrorCode::InvalidArgument, "unknown import mode '" + std::string(text) + "'");
}

json to_json(const ImportReport& r) {
  json rejected = json::array();
  for (const auto& x : r.rejected) {
    rejected.push_back({{"line", x.line}, {"code", x.code}, {"reason", x.reason}});
  }
  return {{"applied", r.applied}, {"rejected", std::move(rejected)}};
}

namespace {

constexpr size_t kFields = 9;

struct RowError {
  ErrorCode code;
  std::string reason;
};

[[noreturn]] void row_error(ErrorCode code, std::string reason) {
  throw RowError{code, std::move(reason)};
}

DataValue parse_row(const Metadata& md, const std::vector<std::string>& f) {
  DataValue v;
  if (!md.has_element(f[0])) row_error(ErrorCode::UnknownElement, "unknown element '" + f[0] + "'");
  const DataElement& element = md.element(f[0]);
  if (!md.tree().contains(f[1])) row_error(ErrorCode::UnknownUnit, "unknown org unit '" + f[1] + "'");
  const OrgUnit& unit = md.tree().unit(f[1]);
  const DataSet* ds = md.dataset_of(element.id);
  if (!ds) row_error(ErrorCode::InvalidArgument, "element '" + element.id + "' is in no data set");
  try {
    v.period = parse_period(f[2]);
  } catch (const Error& e) {
    row_error(e.code(), e.what());
  }
  if (v.period.type() != ds->period_type) {
    row_error(ErrorCode::PeriodTypeMismatch,
              "data set '" + ds->id + "' reports per " + std::string(to_string(ds->period_type)));
  }
  if (unit.level != ds->entry_level) {
    row_error(ErrorCode::WrongLevel, "element '" + element.id + "' is entered at " +
                                         std::string(to_string(ds->entry_level)) + ", not " +
                                         std::string(to_string(unit.level)));
  }
  auto value = parse_number(f[3]);
  if (!value) row_error(ErrorCode::InvalidArgument, "value '" + f[3] + "' is not a number");
  v.value = *value;
  auto findings = check_correct(v.value, element, {unit.id, f[2]});
  if (has_block(findings)) row_error(ErrorCode::BlockedByQuality, findings.front().message);
  try {
    v.status = parse_status(f[4]);
  } catch (const Error&) {
    row_error(ErrorCode::InvalidArgument, "unknown status '" + f[4] + "'");
  }
  auto version = parse_number(f[5]);
  if (!version || *version < 1 || *version != static_cast<double>(static_cast<std::int64_t>(*version))) {
    row_error(ErrorCode::InvalidArgument, "version '" + f[5] + "' is not a positive integer");
  }
  v.version = static_cast<std::int64_t>(*version);
  try {
    v.updated_at = parse_timestamp(f[6]);
  } catch (const Error&) {
    row_error(ErrorCode::InvalidArgument, "bad timestamp '" + f[6] + "'");
  }
  v.element_id = element.id;
  v.org_unit_id = unit.id;
  v.entered_by = f[7];
  v.justification = f[8];
  return v;
}

struct GoodRow {
  size_t line;
  DataValue value;
  FormKey form;
};

std::vector<CsvRecord> value_records(std::string_view csv) {
  auto records = parse_csv(csv);
  if (records.empty()) throw Error(ErrorCode::MalformedFile, "missing header row");
  std::string header;
  for (size_t i = 0; i < records[0].fields.size(); ++i) {
    if (i) header.push_back(',');
    header += records[0].fields[i];
  }
  if (header != kValueRowHeader) {
    throw Error(ErrorCode::MalformedFile, "header must be '" + std::string(kValueRowHeader) + "'");
  }
  for (size_t i = 1; i < records.size(); ++i) {
    if (records[i].fields.size() != kFields) {
      throw Error(ErrorCode::MalformedFile,
                  "line " + std::to_string(records[i].line) + " has " +
                      std::to_string(records[i].fields.size()) + " fields, expected 9");
    }
  }
  return records;
}

}  // namespace

ImportReport import_values(Store& store, const Metadata& md, std::string_view csv,
                           ImportMode mode, std::string_view actor) {
  auto records = value_records(csv);

  auto base = store.snapshot();
  ImportReport report;
  std::vector<GoodRow> good;
  std::map<ValueKey, size_t> seen_keys;
  for (size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    try {
      DataValue v = parse_row(md, rec.fields);
      ValueKey key{v.element_id, v.period.key(), v.org_unit_id};
      if (auto it = seen_keys.find(key); it != seen_keys.end()) {
        row_error(ErrorCode::DuplicateId, "same value as line " + std::to_string(it->second));
      }
      if (const DataValue* old = base->find_value(key); old && old->version >= v.version) {
        row_error(ErrorCode::InvalidArgument, "stored version " + std::to_string(old->version) +
                                                  " is not older than " + std::to_string(v.version));
      }
      seen_keys[key] = rec.line;
      FormKey form{md.dataset_of(v.element_id)->id, v.org_unit_id, v.period.key()};
      good.push_back({rec.line, std::move(v), std::move(form)});
    } catch (const RowError& e) {
      report.rejected.push_back({rec.line, std::string(error_code_name(e.code)), e.reason});
    }
  }

  // Whole forms only: every element of a touched form must be present in
  // the file or already stored.
  std::map<FormKey, std::vector<size_t>> by_form;
  for (size_t i = 0; i < good.size(); ++i) by_form[good[i].form].push_back(i);
  std::vector<bool> dropped(good.size(), false);
  for (const auto& [form, idx] : by_form) {
    const DataSet& ds = md.dataset(form.dataset_id);
    std::vector<std::string> missing;
    for (const auto& el : ds.element_ids) {
      bool in_file = std::any_of(idx.begin(), idx.end(),
                                 [&](size_t i) { return good[i].value.element_id == el; });
      if (!in_file && !base->find_value({el, form.period, form.org_unit_id})) missing.push_back(el);
    }
    if (missing.empty()) continue;
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : " ") + m;
    for (size_t i : idx) {
      dropped[i] = true;
      report.rejected.push_back({good[i].line, std::string(error_code_name(ErrorCode::BlockedByQuality)),
                                 "form " + form.to_string() + " is incomplete, missing " + list});
    }
  }
  std::sort(report.rejected.begin(), report.rejected.end(),
            [](const RejectedRow& a, const RejectedRow& b) { return a.line < b.line; });

  if (mode == ImportMode::Strict && !report.rejected.empty()) {
    const RejectedRow& first = report.rejected.front();
    throw Error(ErrorCode::ImportAborted,
                "line " + std::to_string(first.line) + ": " + first.reason,
                {{"rejected", json::array({{{"line", first.line},
                                            {"code", first.code},
                                            {"reason", first.reason}}})}});
  }

  std::vector<const GoodRow*> apply;
  for (size_t i = 0; i < good.size(); ++i) {
    if (!dropped[i]) apply.push_back(&good[i]);
  }
  if (apply.empty()) return report;

  store.write([&](Transaction& tx) {
    std::map<FormKey, std::vector<const GoodRow*>> forms;
    for (size_t i = 0; i < apply.size(); ++i) {
      tx.checkpoint(i);
      tx.put_value(apply[i]->value);
      forms[apply[i]->form].push_back(apply[i]);
    }
    for (const auto& [key, rows] : forms) {
      const DataSet& ds = md.dataset(key.dataset_id);
      auto values = form_values(tx.state(), key, ds.element_ids);
      const FormState* existing = tx.state().find_form(key);
      FormState form;
      form.key = key;
      if (existing) form = *existing;
      Status from = form.status;
      auto lowest = std::min_element(values.begin(), values.end(),
                                     [](const DataValue& a, const DataValue& b) {
                                       return status_rank(a.status) < status_rank(b.status);
                                     });
      form.status = lowest->status;
      form.version += 1;
      Timestamp latest{};
      for (const auto* r : rows) latest = std::max(latest, r->value.updated_at);
      if (!form.submitted_at && status_rank(form.status) >= status_rank(Status::Submitted)) {
        form.submitted_at = latest;
      }
      if (form.entered_by.empty()) form.entered_by = rows.front()->value.entered_by;
      tx.put_form(form);
      tx.append_transition({0, key, "IMPORT", from, form.status, std::string(actor), latest, ""});
      ChangeEntry change;
      change.kind = "IMPORT";
      change.subject = key;
      change.status = form.status;
      change.version = form.version;
      change.values = std::move(values);
      change.at = latest;
      tx.append_change(std::move(change));
    }
  });
  report.applied = apply.size();
  return report;
}

std::string export_values(const StoreState& state, const Metadata& md, const ExportFilter& filter) {
  const OrgTree& tree = md.tree();
  if (!filter.org_unit_id.empty()) tree.unit(filter.org_unit_id);
  std::vector<const DataValue*> rows;
  for (const auto& [key, v] : state.values) {
    if (!tree.contains(v.org_unit_id)) continue;
    if (!filter.org_unit_id.empty() && !tree.in_subtree(v.org_unit_id, filter.org_unit_id)) continue;
    if (filter.from && v.period < *filter.from) continue;
    if (filter.to && *filter.to < v.period) continue;
    if (!meets_floor(v.status, filter.min_status)) continue;
    rows.push_back(&v);
  }
  std::sort(rows.begin(), rows.end(), [&](const DataValue* a, const DataValue* b) {
    size_t ia = tree.preorder_index(a->org_unit_id), ib = tree.preorder_index(b->org_unit_id);
    if (ia != ib) return ia < ib;
    if (a->period != b->period) return a->period < b->period;
    return a->element_id < b->element_id;
  });
  std::string out(kValueRowHeader);
  out.push_back('\n');
  CsvWriter w;
  for (const DataValue* v : rows) {
    w.row({v->element_id, v->org_unit_id, v->period.key(), format_number(v->value),
           std::string(to_string(v->status)), std::to_string(v->version),
           format_timestamp(v->updated_at), v->entered_by, v->justification});
  }
  return out + w.str();
}

BridgeExport ministry_bridge_export(const StoreState& state, const Metadata& md,
                                    const Period& period) {
  std::vector<const Indicator*> indicators;
  for (const auto& i : md.parts().indicators) indicators.push_back(&i);
  std::sort(indicators.begin(), indicators.end(),
            [](const Indicator* a, const Indicator* b) { return a->id < b->id; });

  BridgeExport out;
  out.records_csv = std::string(kBridgeHeader) + "\n";
  CsvWriter w;
  for (const Indicator* ind : indicators) {
    for (const OrgUnit* unit : md.tree().preorder()) {
      if (unit->level != OrgLevel::AdminCity) continue;
      try {
        IndicatorValue iv =
            compute_indicator(md, state, ind->id, unit->id, period, Status::Validated);
        w.row({period.key(), ind->id, std::string(to_string(ind->spm_category)), unit->id,
               format_number(iv.numerator.value), format_number(iv.denominator.value),
               format_number(iv.value)});
        ++out.record_count;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::MissingNumerator && e.code() != ErrorCode::MissingDenominator &&
            e.code() != ErrorCode::ZeroDenominator) {
          throw;
        }
      }
    }
  }
  out.records_csv += w.str();
  CsvWriter m;
  m.row({period.key(), std::to_string(out.record_count), sha256_hex(out.records_csv)});
  out.manifest_csv = std::string(kManifestHeader) + "\n" + m.str();
  return out;
}

std::vector<QualityFinding> audit_values(const Metadata& md, std::string_view csv, double k_sigma) {
  auto records = value_records(csv);
  struct FormRows {
    std::map<std::string, double> values;
    std::map<std::string, std::string> justification;
    std::set<std::string> blocked;
    std::optional<Timestamp> submitted_at;
  };
  std::vector<QualityFinding> out;
  std::map<FormKey, FormRows> forms;
  std::map<std::pair<std::string, std::string>, std::map<Period, double>> series;

  auto bad = [&](const std::vector<std::string>& f, std::string code, std::string message) {
    out.push_back({Dimension::Correct, Severity::Block, Subject::element(f[0], f[1], f[2]),
                   std::move(code), std::move(message), false});
  };
  for (size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i].fields;
    if (!md.has_element(f[0])) {
      bad(f, "UNKNOWN_ELEMENT", "unknown element '" + f[0] + "'");
      continue;
    }
    if (!md.tree().contains(f[1])) {
      bad(f, "UNKNOWN_UNIT", "unknown org unit '" + f[1] + "'");
      continue;
    }
    const DataSet* ds = md.dataset_of(f[0]);
    std::optional<Period> period;
    try {
      period = parse_period(f[2]);
    } catch (const Error& e) {
      bad(f, "PERIOD", e.what());
      continue;
    }
    if (!ds || period->type() != ds->period_type) {
      bad(f, "PERIOD", "period '" + f[2] + "' does not match the data set grain");
      continue;
    }
    auto value = parse_number(f[3]);
    if (!value) {
      bad(f, "TYPE", "value '" + f[3] + "' is not a number");
      continue;
    }
    auto correct = check_correct(*value, md.element(f[0]), {f[1], period->key()});
    out.insert(out.end(), correct.begin(), correct.end());

    FormRows& form = forms[FormKey{ds->id, f[1], period->key()}];
    form.values[f[0]] = *value;
    if (has_block(correct)) {
      form.blocked.insert(f[0]);
      continue;
    }
    form.justification[f[0]] = f[8];
    try {
      Timestamp at = parse_timestamp(f[6]);
      if (!form.submitted_at || at > *form.submitted_at) form.submitted_at = at;
    } catch (const Error&) {
    }
    series[{f[0], f[1]}][*period] = *value;
  }

  for (const auto& [key, form] : forms) {
    const DataSet& ds = md.dataset(key.dataset_id);
    Period period = parse_period(key.period);
    auto complete = check_complete(ds, form.values, key.org_unit_id, period);
    out.insert(out.end(), complete.findings.begin(), complete.findings.end());
    if (form.submitted_at) {
      if (auto late = check_current(ds, period, *form.submitted_at, key.org_unit_id)) {
        out.push_back(std::move(*late));
      }
    }
    std::map<std::string, double> usable;
    for (const auto& [el, v] : form.values) {
      if (!form.blocked.count(el)) usable[el] = v;
    }
    for (const auto& [el, v] : usable) {
      ElementHistory h{el, key.org_unit_id, {}};
      const auto& points = series[{el, key.org_unit_id}];
      for (const Period& p : preceding_periods(period, 12)) {
        if (auto it = points.find(p); it != points.end()) h.points.emplace_back(p, it->second);
      }
      if (auto dev = check_consistent(v, md.element(el), h, k_sigma, key.period)) {
        if (!form.justification.at(el).empty()) dev->requires_justification = false;
        out.push_back(std::move(*dev));
      }
    }
    std::vector<CrossRule> rules;
    for (const auto& rule : md.cross_rules()) {
      if (ds.contains(rule.numerator_id) && ds.contains(rule.denominator_id)) rules.push_back(rule);
    }
    auto cross = cross_element_rules(usable, rules, {key.org_unit_id, key.period});
    out.insert(out.end(), cross.findings.begin(), cross.findings.end());
  }
  return out;
}

}  // namespace spmdw
