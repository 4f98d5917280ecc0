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

#include "spmdw/workflow.hpp"

#include <algorithm>

#include "spmdw/error.hpp"

namespace spmdw {

using nlohmann::json;

std::string_view to_string(FlowPolicyName n) {
  switch (n) {
    case FlowPolicyName::CurrentA: return "CURRENT_A";
    case FlowPolicyName::Phase1B: return "PHASE1_B";
    case FlowPolicyName::Phase2C: return "PHASE2_C";
  }
  return "PHASE2_C";
}

FlowPolicyName parse_flow_policy_name(std::string_view text) {
  if (text == "CURRENT_A") return FlowPolicyName::CurrentA;
  if (text == "PHASE1_B") return FlowPolicyName::Phase1B;
  if (text == "PHASE2_C") return FlowPolicyName::Phase2C;
  throw Error(ErrorCode::InvalidArgument, "unknown flow policy '" + std::string(text) + "'");
}

bool FlowPolicy::allows_entry_at(OrgLevel level) const {
  return std::find(entry_levels.begin(), entry_levels.end(), level) != entry_levels.end();
}

FlowPolicy flow_policy(FlowPolicyName name) {
  const std::vector<Role> reviewers{Role::SubofficeManager, Role::DepartmentManager};
  switch (name) {
    case FlowPolicyName::CurrentA:
      return {name, {OrgLevel::Subdistrict}, reviewers, true};
    case FlowPolicyName::Phase1B:
      return {name, {OrgLevel::AdminCity}, reviewers, false};
    case FlowPolicyName::Phase2C:
      return {name, {OrgLevel::District, OrgLevel::Subdistrict}, reviewers, false};
  }
  return {};
}

std::string_view to_string(ReviewAction a) {
  switch (a) {
    case ReviewAction::Verify: return "VERIFY";
    case ReviewAction::Validate: return "VALIDATE";
    case ReviewAction::Reject: return "REJECT";
    case ReviewAction::Publish: return "PUBLISH";
  }
  return "VERIFY";
}

ReviewAction parse_review_action(std::string_view text) {
  if (text == "VERIFY") return ReviewAction::Verify;
  if (text == "VALIDATE") return ReviewAction::Validate;
  if (text == "REJECT") return ReviewAction::Reject;
  if (text == "PUBLISH") return ReviewAction::Publish;
  throw Error(ErrorCode::MalformedRequest, "unknown review action '" + std::string(text) + "'");
}

namespace {

bool role_may(ReviewAction action, Role role, const FlowPolicy& policy) {
  const auto& vr = policy.verify_roles;
  bool reviewer = std::find(vr.begin(), vr.end(), role) != vr.end();
  switch (action) {
    case ReviewAction::Verify:
    case ReviewAction::Reject:
      return reviewer;
    case ReviewAction::Validate:
      return !vr.empty() && vr.back() == role;
    case ReviewAction::Publish:
      return role == Role::DepartmentManager || role == Role::Admin;
  }
  return false;
}

bool status_permits(ReviewAction action, Status status) {
  switch (action) {
    case ReviewAction::Verify: return status == Status::Submitted;
    case ReviewAction::Validate: return status == Status::Verified;
    case ReviewAction::Reject: return status == Status::Submitted || status == Status::Verified;
    case ReviewAction::Publish: return status == Status::Validated;
  }
  return false;
}

Status target_status(ReviewAction action) {
  switch (action) {
    case ReviewAction::Verify: return Status::Verified;
    case ReviewAction::Validate: return Status::Validated;
    case ReviewAction::Reject: return Status::Rejected;
    case ReviewAction::Publish: return Status::Published;
  }
  return Status::Draft;
}

constexpr ReviewAction kAllActions[] = {ReviewAction::Verify, ReviewAction::Validate,
                                        ReviewAction::Reject, ReviewAction::Publish};

[[noreturn]] void malformed(const std::string& msg) {
  throw Error(ErrorCode::MalformedRequest, msg);
}

std::string req_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    malformed(std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

std::set<ReviewAction> legal_transitions(Status status, Role role, const FlowPolicy& policy) {
  std::set<ReviewAction> out;
  for (ReviewAction a : kAllActions) {
    if (role_may(a, role, policy) && status_permits(a, status)) out.insert(a);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const FormSubmission& s) {
  json values = json::array();
  for (const auto& [el, v] : s.values) {
    json jv{{"element_id", el}, {"value", v}};
    if (auto it = s.justifications.find(el); it != s.justifications.end()) {
      jv["justification"] = it->second;
    }
    values.push_back(std::move(jv));
  }
  return {{"dataset_id", s.dataset_id},
          {"org_unit_id", s.org_unit_id},
          {"period", s.period},
          {"program_id", s.program_id},
          {"values", std::move(values)}};
}

FormSubmission form_submission_from_json(const json& j) {
  if (!j.is_object()) malformed("form payload must be an object");
  FormSubmission s;
  s.dataset_id = req_string(j, "dataset_id");
  s.org_unit_id = req_string(j, "org_unit_id");
  s.period = req_string(j, "period");
  s.program_id = req_string(j, "program_id");
  auto it = j.find("values");
  if (it == j.end()) malformed("field 'values' is required");
  if (it->is_array()) {
    for (const auto& jv : *it) {
      if (!jv.is_object()) malformed("each value must be an object");
      std::string el = req_string(jv, "element_id");
      auto v = jv.find("value");
      if (v == jv.end() || !v->is_number()) malformed("value for '" + el + "' must be a number");
      if (!s.values.emplace(el, v->get<double>()).second) {
        malformed("element '" + el + "' appears twice");
      }
      if (auto jt = jv.find("justification"); jt != jv.end() && jt->is_string() &&
                                              !jt->get<std::string>().empty()) {
        s.justifications[el] = jt->get<std::string>();
      }
    }
  } else if (it->is_object()) {
    for (const auto& [el, v] : it->items()) {
      if (!v.is_number()) malformed("value for '" + el + "' must be a number");
      s.values[el] = v.get<double>();
    }
    if (auto jt = j.find("justifications"); jt != j.end() && jt->is_object()) {
      for (const auto& [el, t] : jt->items()) {
        if (t.is_string() && !t.get<std::string>().empty()) s.justifications[el] = t;
      }
    }
  } else {
    malformed("field 'values' must be an array or object");
  }
  return s;
}

json to_json(const SubmitResult& r) {
  return {{"subject", to_json(r.subject)},
          {"status", to_string(Status::Submitted)},
          {"form_version", r.form_version},
          {"versions", r.versions},
          {"flags", to_json(std::span<const QualityFinding>(r.flags))},
          {"transition", to_json(r.transition)}};
}

json to_json(const ReviewRequest& r) {
  json j{{"subject", to_json(r.subject)}, {"action", to_string(r.action)}};
  if (!r.reason.empty()) j["reason"] = r.reason;
  if (!r.justifications.empty()) j["justifications"] = r.justifications;
  if (r.expected_version) j["expected_version"] = *r.expected_version;
  return j;
}

ReviewRequest review_request_from_json(const json& j) {
  if (!j.is_object()) malformed("review payload must be an object");
  ReviewRequest r;
  const json& subject = j.contains("subject") ? j["subject"] : j;
  if (!subject.is_object()) malformed("subject must be an object");
  r.subject = {req_string(subject, "dataset_id"), req_string(subject, "org_unit_id"),
               req_string(subject, "period")};
  r.action = parse_review_action(req_string(j, "action"));
  if (auto it = j.find("reason"); it != j.end() && it->is_string()) r.reason = *it;
  if (auto it = j.find("justifications"); it != j.end()) {
    if (!it->is_object()) malformed("justifications must be an object");
    for (const auto& [el, t] : it->items()) {
      if (!t.is_string()) malformed("justification for '" + el + "' must be a string");
      r.justifications[el] = t.get<std::string>();
    }
  }
  if (auto it = j.find("expected_version"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) malformed("expected_version must be an integer");
    r.expected_version = it->get<std::int64_t>();
  }
  return r;
}

// ---------------------------------------------------------------------------
// Workflow

bool unit_in_user_scope(const Metadata& md, const User& user, std::string_view unit_id) {
  if (user.role == Role::Admin) return true;
  const OrgTree& tree = md.tree();
  if (!tree.contains(unit_id)) return false;
  return std::any_of(user.scope_org_unit_ids.begin(), user.scope_org_unit_ids.end(),
                     [&](const std::string& s) { return tree.in_subtree(unit_id, s); });
}

Workflow::Workflow(std::shared_ptr<const Metadata> metadata, Store& store, FlowPolicy policy,
                   WorkflowConfig config)
    : metadata_(std::move(metadata)), store_(store), policy_(std::move(policy)), config_(config) {
  if (!(config_.k_sigma > 0)) throw Error(ErrorCode::InvalidArgument, "k_sigma must be positive");
}

std::shared_ptr<const Metadata> Workflow::metadata() const {
  std::lock_guard<std::mutex> lock(metadata_mutex_);
  return metadata_;
}

void Workflow::set_metadata(std::shared_ptr<const Metadata> metadata) {
  std::lock_guard<std::mutex> lock(metadata_mutex_);
  metadata_ = std::move(metadata);
}

ElementHistory Workflow::history_for(const StoreState& state, const std::string& element_id,
                                     const std::string& org_unit_id, const Period& period) const {
  ElementHistory h{element_id, org_unit_id, {}};
  for (const Period& p : preceding_periods(period, config_.history_window)) {
    const DataValue* v = state.find_value({element_id, p.key(), org_unit_id});
    if (v && meets_floor(v->status, Status::Submitted)) h.points.emplace_back(p, v->value);
  }
  return h;
}

std::vector<QualityFinding> Workflow::consistency_flags(
    const Metadata& md, const StoreState& state, const DataSet& ds, const FormKey& key,
    const std::map<std::string, double>& values) const {
  std::vector<QualityFinding> out;
  Period period = parse_period(key.period);
  for (const auto& [el, v] : values) {
    auto h = history_for(state, el, key.org_unit_id, period);
    if (auto f = check_consistent(v, md.element(el), h, config_.k_sigma, key.period)) {
      out.push_back(std::move(*f));
    }
  }
  std::vector<CrossRule> form_rules;
  for (const auto& rule : md.cross_rules()) {
    if (ds.contains(rule.numerator_id) && ds.contains(rule.denominator_id)) {
      form_rules.push_back(rule);
    }
  }
  auto cross = cross_element_rules(values, form_rules, {key.org_unit_id, key.period});
  out.insert(out.end(), cross.findings.begin(), cross.findings.end());
  return out;
}

std::vector<QualityFinding> Workflow::pending_deviations(const StoreState& state,
                                                         const FormKey& subject) const {
  auto md = metadata();
  const DataSet& ds = md->dataset(subject.dataset_id);
  std::map<std::string, double> values;
  std::map<std::string, std::string> justification;
  for (const auto& v : form_values(state, subject, ds.element_ids)) {
    values[v.element_id] = v.value;
    justification[v.element_id] = v.justification;
  }
  std::vector<QualityFinding> out;
  for (auto& f : consistency_flags(*md, state, ds, subject, values)) {
    if (f.requires_justification && justification[f.subject.id].empty()) {
      out.push_back(std::move(f));
    }
  }
  return out;
}

SubmitResult Workflow::apply_submit(Transaction& tx, const FormSubmission& sub,
                                    const User& actor, Timestamp at, const ChangeOrigin& origin) {
  auto md = metadata();
  const DataSet& ds = md->dataset(sub.dataset_id);
  const OrgUnit& unit = md->tree().unit(sub.org_unit_id);
  Period period = parse_period(sub.period);
  if (period.type() != ds.period_type) {
    throw Error(ErrorCode::PeriodTypeMismatch,
                "data set '" + ds.id + "' reports per " + std::string(to_string(ds.period_type)) +
                    ", got " + period.key());
  }
  if (actor.role != Role::EnumeratorPic) {
    throw Error(ErrorCode::RoleDenied, "only enumerators enter data");
  }
  bool unit_scoped = std::find(actor.scope_org_unit_ids.begin(), actor.scope_org_unit_ids.end(),
                               unit.id) != actor.scope_org_unit_ids.end();
  if (!unit_scoped || !actor.dataset_in_scope(ds.id)) {
    throw Error(ErrorCode::ScopeDenied,
                "the form is outside the entry scope of user '" + actor.id + "'");
  }
  if (unit.level != ds.entry_level || !policy_.allows_entry_at(unit.level)) {
    throw Error(ErrorCode::WrongLevel,
                "data set '" + ds.id + "' is entered at " + std::string(to_string(ds.entry_level)) +
                    " under " + std::string(to_string(policy_.name)) + ", not " +
                    std::string(to_string(unit.level)));
  }
  const Program& program = md->program(sub.program_id);

  FormKey key{ds.id, unit.id, period.key()};
  const StoreState& state = tx.state();
  const FormState* existing = state.find_form(key);
  Status from = existing ? existing->status : Status::Draft;
  if (status_rank(from) > status_rank(Status::Submitted)) {
    throw Error(ErrorCode::IllegalTransition,
                "form " + key.to_string() + " is " + std::string(to_string(from)) +
                    " and can no longer be resubmitted");
  }

  ValueContext ctx{unit.id, period.key()};
  std::vector<QualityFinding> findings;
  for (const auto& [el, v] : sub.values) {
    if (!ds.contains(el)) continue;  // reported by check_complete
    const DataElement& element = md->element(el);
    if (!check_authority(element, program)) {
      findings.push_back({Dimension::Consistent, Severity::Block,
                          Subject::element(el, unit.id, period.key()), "AUTHORITY",
                          "element '" + el + "' is owned by program '" +
                              element.owner_program_id + "', not '" + program.id + "'",
                          false});
    }
    auto correct = check_correct(v, element, ctx);
    findings.insert(findings.end(), correct.begin(), correct.end());
  }
  auto complete = check_complete(ds, sub.values, unit.id, period);  // ForeignElement
  findings.insert(findings.end(), complete.findings.begin(), complete.findings.end());
  if (has_block(findings)) {
    throw Error(ErrorCode::BlockedByQuality,
                "form " + key.to_string() + " has blocking quality findings",
                {{"findings", to_json(std::span<const QualityFinding>(findings))}});
  }

  SubmitResult result;
  result.subject = key;
  if (auto late = check_current(ds, period, at, unit.id)) result.flags.push_back(*late);
  for (auto& f : consistency_flags(*md, state, ds, key, sub.values)) {
    result.flags.push_back(std::move(f));
  }

  ChangeEntry change;
  for (const auto& [el, v] : sub.values) {
    const DataValue* old = state.find_value({el, key.period, key.org_unit_id});
    DataValue dv;
    dv.element_id = el;
    dv.org_unit_id = unit.id;
    dv.period = period;
    dv.value = v;
    dv.status = Status::Submitted;
    dv.version = (old ? old->version : 0) + 1;
    dv.entered_by = actor.id;
    if (auto it = sub.justifications.find(el); it != sub.justifications.end()) {
      dv.justification = it->second;
    }
    dv.updated_at = at;
    result.versions[el] = dv.version;
    change.values.push_back(dv);
    tx.put_value(std::move(dv));
  }

  FormState form;
  form.key = key;
  if (existing) form = *existing;
  form.status = Status::Submitted;
  form.version += 1;
  form.submitted_at = at;
  form.entered_by = actor.id;
  result.form_version = form.version;
  tx.put_form(form);

  Transition t{0, key, "SUBMIT", from, Status::Submitted, actor.id, at, ""};
  t.seq = tx.append_transition(t);
  result.transition = t;

  change.kind = "SUBMIT";
  change.subject = key;
  change.status = Status::Submitted;
  change.version = form.version;
  change.origin_client_id = origin.client_id;
  change.origin_client_seq = origin.client_seq;
  change.at = at;
  tx.append_change(std::move(change));
  return result;
}

Transition Workflow::apply_review(Transaction& tx, const ReviewRequest& req, const User& actor,
                                  Timestamp at, const ChangeOrigin& origin) {
  auto md = metadata();
  const DataSet& ds = md->dataset(req.subject.dataset_id);
  md->tree().unit(req.subject.org_unit_id);
  Period period = parse_period(req.subject.period);
  FormKey key{ds.id, req.subject.org_unit_id, period.key()};

  if (!role_may(req.action, actor.role, policy_)) {
    throw Error(ErrorCode::RoleDenied, std::string(to_string(actor.role)) + " may not " +
                                           std::string(to_string(req.action)) + " under " +
                                           std::string(to_string(policy_.name)));
  }
  if (!unit_in_user_scope(*md, actor, key.org_unit_id) || !actor.dataset_in_scope(ds.id)) {
    throw Error(ErrorCode::ScopeDenied,
                "the form is outside the review scope of user '" + actor.id + "'");
  }
  const StoreState& state = tx.state();
  const FormState* existing = state.find_form(key);
  Status from = existing ? existing->status : Status::Draft;
  if (!status_permits(req.action, from)) {
    throw Error(ErrorCode::IllegalTransition,
                "cannot " + std::string(to_string(req.action)) + " a " +
                    std::string(to_string(from)) + " form",
                {{"status", to_string(from)}, {"version", existing ? existing->version : 0}});
  }
  if (req.expected_version && *req.expected_version != existing->version) {
    throw Error(ErrorCode::IllegalTransition,
                "form " + key.to_string() + " changed (version " +
                    std::to_string(existing->version) + ", expected " +
                    std::to_string(*req.expected_version) + ")",
                {{"status", to_string(from)}, {"version", existing->version}});
  }
  if (req.action == ReviewAction::Reject && req.reason.empty()) {
    throw Error(ErrorCode::MissingReason, "a rejection needs a reason");
  }

  std::vector<DataValue> values = form_values(state, key, ds.element_ids);
  for (const auto& [el, text] : req.justifications) {
    auto it = std::find_if(values.begin(), values.end(),
                           [&](const DataValue& v) { return v.element_id == el; });
    if (it == values.end()) {
      throw Error(ErrorCode::ForeignElement,
                  "no value for '" + el + "' in form " + key.to_string());
    }
    if (it->justification != text) {
      it->justification = text;
      it->version += 1;
      it->updated_at = at;
    }
  }

  if (req.action == ReviewAction::Validate) {
    std::map<std::string, double> by_element;
    std::map<std::string, std::string> justification;
    for (const auto& v : values) {
      by_element[v.element_id] = v.value;
      justification[v.element_id] = v.justification;
    }
    std::vector<QualityFinding> pending;
    for (auto& f : consistency_flags(*md, state, ds, key, by_element)) {
      if (f.requires_justification && justification[f.subject.id].empty()) {
        pending.push_back(std::move(f));
      }
    }
    if (!pending.empty()) {
      throw Error(ErrorCode::UnjustifiedDeviation,
                  std::to_string(pending.size()) + " deviation(s) in " + key.to_string() +
                      " lack a justification",
                  {{"findings", to_json(std::span<const QualityFinding>(pending))}});
    }
  }

  Status to = target_status(req.action);
  for (auto& v : values) {
    v.status = to;
    tx.put_value(v);
  }
  FormState form = *existing;
  form.status = to;
  form.version += 1;
  tx.put_form(form);

  Transition t{0, key, std::string(to_string(req.action)), from, to, actor.id, at, req.reason};
  t.seq = tx.append_transition(t);

  ChangeEntry change;
  change.kind = t.action;
  change.subject = key;
  change.status = to;
  change.version = form.version;
  change.values = std::move(values);
  change.origin_client_id = origin.client_id;
  change.origin_client_seq = origin.client_seq;
  change.at = at;
  tx.append_change(std::move(change));
  return t;
}

SubmitResult Workflow::submit_form(const FormSubmission& submission, const User& actor,
                                   Timestamp at) {
  return store_.write([&](Transaction& tx) { return apply_submit(tx, submission, actor, at); });
}

Transition Workflow::review(const ReviewRequest& request, const User& actor, Timestamp at) {
  return store_.write([&](Transaction& tx) { return apply_review(tx, request, actor, at); });
}

Transition Workflow::publish(const FormKey& subject, const User& actor, Timestamp at) {
  ReviewRequest req;
  req.subject = subject;
  req.action = ReviewAction::Publish;
  return review(req, actor, at);
}

}  // namespace spmdw
