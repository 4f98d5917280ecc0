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

#include "spmdw/service.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "spmdw/error.hpp"
#include "spmdw/scorecard.hpp"
#include "spmdw/value_io.hpp"

namespace spmdw {

using nlohmann::json;

struct Service::Caller {
  std::optional<User> user;
};

namespace {

struct Route {
  const char* method;
  const char* path;
  bool anonymous_ok;
};

const std::vector<std::pair<std::string, std::string>> kRouteList = {
    {"POST", "/auth"},
    {"GET", "/metadata"},
    {"POST", "/datavaluesets"},
    {"POST", "/reviews"},
    {"GET", "/analytics"},
    {"POST", "/sync/push"},
    {"GET", "/sync/pull"},
    {"GET", "/sync/conflicts"},
    {"POST", "/sync/conflicts/resolve"},
    {"GET", "/quality/scorecard"},
    {"GET", "/export/values"},
    {"GET", "/export/ministry"},
    {"GET", "/export/transitions"},
};

ApiResponse json_response(int status, const json& body) {
  return {status, "application/json", body.dump()};
}

ApiResponse text_response(std::string content_type, std::string body) {
  return {200, std::move(content_type), std::move(body)};
}

json parse_body(const ApiRequest& req) {
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::MalformedRequest, "request body is not valid JSON");
  return j;
}

std::optional<std::string> param(const ApiRequest& req, const std::string& name) {
  auto it = req.query.find(name);
  if (it == req.query.end()) return std::nullopt;
  return it->second;
}

std::string required_param(const ApiRequest& req, const std::string& name) {
  auto v = param(req, name);
  if (!v || v->empty()) throw Error(ErrorCode::MalformedRequest, "missing parameter '" + name + "'");
  return *v;
}

std::vector<std::string> split_items(const std::string& text) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= text.size()) {
    size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    if (comma > start) out.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

bool truthy(const std::string& v) { return v == "true" || v == "1" || v == "yes"; }

bool is_manager(Role r) {
  return r == Role::SubofficeManager || r == Role::DepartmentManager || r == Role::Admin;
}

void require_unit_in_scope(const Metadata& md, const User& user, const std::string& unit) {
  md.tree().unit(unit);
  if (!unit_in_user_scope(md, user, unit)) {
    throw Error(ErrorCode::ScopeDenied, "org unit is outside the scope of user '" + user.id + "'");
  }
}

std::string default_unit(const Metadata& md, const User& user) {
  if (user.role == Role::Admin) return md.tree().root().id;
  if (user.scope_org_unit_ids.size() == 1) return user.scope_org_unit_ids.front();
  throw Error(ErrorCode::MalformedRequest, "parameter 'org' is required for this user");
}

}  // namespace

ApiResponse error_response(const Error& e) {
  json details = e.details().is_null() ? json::object() : e.details();
  return json_response(http_status(e.code()), {{"error",
                                               {{"code", error_code_name(e.code())},
                                                {"message", e.what()},
                                                {"details", std::move(details)}}}});
}

const std::vector<std::pair<std::string, std::string>>& Service::routes() { return kRouteList; }

Service::Service(std::shared_ptr<const Metadata> metadata, Store& store, FlowPolicy policy,
                 WorkflowConfig config, ServiceOptions options)
    : workflow_(std::move(metadata), store, std::move(policy), config),
      sync_(workflow_),
      sessions_(options.session_ttl, std::move(options.clock)) {
  if (workflow_.policy().blocking) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(to_string(workflow_.policy().name)) +
                    " is a blocking flow and is only available to compare-flows");
  }
}

ApiResponse Service::handle(const ApiRequest& req) {
  try {
    static const std::map<std::pair<std::string, std::string>, Handler> handlers = {
        {{"POST", "/auth"}, &Service::post_auth},
        {{"GET", "/metadata"}, &Service::get_metadata},
        {{"POST", "/datavaluesets"}, &Service::post_datavaluesets},
        {{"POST", "/reviews"}, &Service::post_reviews},
        {{"GET", "/analytics"}, &Service::get_analytics},
        {{"POST", "/sync/push"}, &Service::post_sync_push},
        {{"GET", "/sync/pull"}, &Service::get_sync_pull},
        {{"GET", "/sync/conflicts"}, &Service::get_sync_conflicts},
        {{"POST", "/sync/conflicts/resolve"}, &Service::post_sync_resolve},
        {{"GET", "/quality/scorecard"}, &Service::get_scorecard},
        {{"GET", "/export/values"}, &Service::get_export_values},
        {{"GET", "/export/ministry"}, &Service::get_export_ministry},
        {{"GET", "/export/transitions"}, &Service::get_export_transitions},
    };
    auto it = handlers.find({req.method, req.path});
    if (it == handlers.end()) {
      bool known = std::any_of(kRouteList.begin(), kRouteList.end(),
                               [&](const auto& r) { return r.second == req.path; });
      if (known) throw Error(ErrorCode::MethodNotAllowed, req.method + " is not allowed on " + req.path);
      throw Error(ErrorCode::NotFound, "no route " + req.path);
    }

    Caller caller;
    bool anonymous_ok = req.path == "/auth" || req.path == "/analytics";
    if (!req.bearer_token.empty() && req.path != "/auth") {
      Session s = sessions_.resolve(req.bearer_token);
      auto md = workflow_.metadata();
      if (!md->has_user(s.user_id)) throw Error(ErrorCode::Unauthenticated, "user no longer exists");
      caller.user = md->user(s.user_id);
    } else if (!anonymous_ok) {
      throw Error(ErrorCode::Unauthenticated, "a bearer token is required");
    }
    return (this->*(it->second))(req, caller);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const json::exception& e) {
    return error_response(Error(ErrorCode::MalformedRequest, e.what()));
  } catch (const std::exception&) {
    return error_response(Error(ErrorCode::Internal, "internal error"));
  }
}

ApiResponse Service::post_auth(const ApiRequest& req, const Caller&) {
  json body = parse_body(req);
  if (!body.is_object() || !body.contains("user_id") || !body["user_id"].is_string() ||
      !body.contains("password") || !body["password"].is_string()) {
    throw Error(ErrorCode::MalformedRequest, "expected {\"user_id\", \"password\"}");
  }
  auto md = workflow_.metadata();
  Session s = sessions_.authenticate(*md, body["user_id"].get<std::string>(),
                                     body["password"].get<std::string>());
  const User& u = md->user(s.user_id);
  return json_response(200, {{"token", s.token},
                             {"user_id", s.user_id},
                             {"role", to_string(u.role)},
                             {"issued_at", format_timestamp(s.issued_at)},
                             {"expires_at", format_timestamp(s.expires_at)}});
}

json scoped_metadata_json(const Metadata& md, const User& user) {
  if (user.role == Role::Admin) return metadata_to_json(md, false);
  const OrgTree& tree = md.tree();
  json units = json::array();
  std::set<OrgLevel> levels;
  for (const OrgUnit* u : tree.preorder()) {
    if (!unit_in_user_scope(md, user, u->id)) continue;
    json ju = to_json(*u);
    if (u->parent_id && !unit_in_user_scope(md, user, *u->parent_id)) ju["parent_id"] = nullptr;
    units.push_back(std::move(ju));
    levels.insert(u->level);
  }
  std::set<std::string> elements, programs;
  json datasets = json::array();
  for (const auto& ds : md.parts().datasets) {
    if (!user.dataset_in_scope(ds.id)) continue;
    if (user.role == Role::EnumeratorPic && !levels.count(ds.entry_level)) continue;
    datasets.push_back(to_json(ds));
    for (const auto& el : ds.element_ids) elements.insert(el);
  }
  json jel = json::array();
  for (const auto& e : md.parts().elements) {
    if (!elements.count(e.id)) continue;
    jel.push_back(to_json(e));
    programs.insert(e.owner_program_id);
  }
  json jprog = json::array();
  for (const auto& p : md.parts().programs) {
    if (programs.count(p.id)) jprog.push_back(to_json(p));
  }
  json jind = json::array();
  for (const auto& i : md.parts().indicators) {
    if (elements.count(i.numerator_element_id) && elements.count(i.denominator_element_id)) {
      jind.push_back(to_json(i));
    }
  }
  return {{"orgUnits", std::move(units)},
          {"programs", std::move(jprog)},
          {"dataElements", std::move(jel)},
          {"dataSets", std::move(datasets)},
          {"indicators", std::move(jind)},
          {"users", json::array({to_json(user, false)})}};
}

ApiResponse Service::get_metadata(const ApiRequest&, const Caller& caller) {
  return json_response(200, scoped_metadata_json(*workflow_.metadata(), *caller.user));
}

ApiResponse Service::post_datavaluesets(const ApiRequest& req, const Caller& caller) {
  FormSubmission sub = form_submission_from_json(parse_body(req));
  SubmitResult r = workflow_.submit_form(sub, *caller.user, sessions_.now());
  return json_response(201, to_json(r));
}

ApiResponse Service::post_reviews(const ApiRequest& req, const Caller& caller) {
  ReviewRequest r = review_request_from_json(parse_body(req));
  Transition t = workflow_.review(r, *caller.user, sessions_.now());
  auto snap = workflow_.store().snapshot();
  return json_response(200, {{"transition", to_json(t)},
                             {"status", to_string(t.to)},
                             {"version", snap->form_version(t.subject)}});
}

AnalyticsQuery analytics_query_from_params(const std::map<std::string, std::string>& params) {
  auto get = [&](const char* key) -> std::optional<std::string> {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    return it->second;
  };
  AnalyticsQuery q;
  auto rows = get("rows"), columns = get("columns");
  if (!rows || !columns) throw Error(ErrorCode::InvalidQuery, "rows and columns are required");
  q.rows = parse_query_dimension(*rows);
  q.columns = parse_query_dimension(*columns);
  if (auto v = get("row_items")) q.row_items = split_items(*v);
  if (auto v = get("column_items")) q.column_items = split_items(*v);
  if (auto v = get("filter")) {
    size_t colon = v->find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::InvalidQuery, "filter must be DIMENSION:id");
    q.filters[parse_query_dimension(v->substr(0, colon))] = v->substr(colon + 1);
  }
  if (auto v = get("min_status")) {
    try {
      q.min_status = parse_status(*v);
    } catch (const Error&) {
      throw Error(ErrorCode::InvalidQuery, "unknown min_status '" + *v + "'");
    }
  }
  if (auto v = get("expand_children")) q.expand_children = truthy(*v);
  return q;
}

ApiResponse Service::get_analytics(const ApiRequest& req, const Caller& caller) {
  AnalyticsQuery q = analytics_query_from_params(req.query);
  validate_query(q);
  auto md = workflow_.metadata();
  json notes = json::array();
  const std::vector<std::string>* unit_scope = nullptr;

  auto uses = [&](QueryDimension d) {
    return q.rows == d || q.columns == d || q.filters.count(d) > 0;
  };
  if (!caller.user) {
    if (uses(QueryDimension::Element)) {
      throw Error(ErrorCode::Unauthenticated, "element-level data requires authentication");
    }
    if (q.min_status != Status::Published) {
      notes.push_back("min_status " + std::string(to_string(q.min_status)) +
                      " raised to PUBLISHED for anonymous callers");
      q.min_status = Status::Published;
    }
  } else {
    const User& user = *caller.user;
    if (status_rank(q.min_status) < status_rank(Status::Submitted)) {
      throw Error(ErrorCode::InvalidQuery, "min_status must be SUBMITTED or later");
    }
    if (user.role != Role::Admin) {
      auto check_units = [&](const std::vector<std::string>& items) {
        for (const auto& id : items) require_unit_in_scope(*md, user, id);
      };
      if (q.rows == QueryDimension::OrgUnit) check_units(q.row_items);
      if (q.columns == QueryDimension::OrgUnit) check_units(q.column_items);
      if (auto f = q.filters.find(QueryDimension::OrgUnit); f != q.filters.end()) {
        require_unit_in_scope(*md, user, f->second);
      }
      auto check_element = [&](const std::string& id) {
        const DataSet* ds = md->dataset_of(md->element(id).id);
        if (ds && !user.dataset_in_scope(ds->id)) {
          throw Error(ErrorCode::ScopeDenied, "element '" + id + "' is outside the caller's data sets");
        }
      };
      if (q.rows == QueryDimension::Element) for (const auto& id : q.row_items) check_element(id);
      if (q.columns == QueryDimension::Element) for (const auto& id : q.column_items) check_element(id);
      if (auto f = q.filters.find(QueryDimension::Element); f != q.filters.end()) check_element(f->second);
      unit_scope = &user.scope_org_unit_ids;
    }
  }

  auto snap = workflow_.store().snapshot();
  AnalyticsTable table = run_analytics(*md, *snap, q, unit_scope);
  if (param(req, "format").value_or("json") == "csv") return text_response("text/csv", render_csv(table));
  json body = to_json(table);
  body["notes"] = std::move(notes);
  return json_response(200, body);
}

ApiResponse Service::post_sync_push(const ApiRequest& req, const Caller& caller) {
  std::vector<ChangeRecord> records = decode_records(req.body);
  std::vector<Ack> acks = sync_.push(records, *caller.user, sessions_.now());
  json out = json::array();
  for (const auto& a : acks) out.push_back(to_json(a));
  return json_response(200, {{"acks", std::move(out)}});
}

ApiResponse Service::get_sync_pull(const ApiRequest& req, const Caller& caller) {
  std::int64_t cursor = 0;
  if (auto v = param(req, "cursor")) {
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), cursor);
    if (ec != std::errc() || p != v->data() + v->size() || cursor < 0) {
      throw Error(ErrorCode::MalformedRequest, "cursor must be a non-negative integer");
    }
  }
  return json_response(200, to_json(sync_.pull(cursor, *caller.user)));
}

ApiResponse Service::get_sync_conflicts(const ApiRequest& req, const Caller& caller) {
  bool pending_only = truthy(param(req, "pending").value_or("true"));
  json out = json::array();
  for (const auto& t : sync_.tickets(*caller.user, pending_only)) out.push_back(to_json(t));
  return json_response(200, {{"tickets", std::move(out)}});
}

ApiResponse Service::post_sync_resolve(const ApiRequest& req, const Caller& caller) {
  json body = parse_body(req);
  if (!body.is_object() || !body.contains("ticket_id") || !body["ticket_id"].is_string() ||
      !body.contains("resolution") || !body["resolution"].is_string()) {
    throw Error(ErrorCode::MalformedRequest, "expected {\"ticket_id\", \"resolution\"}");
  }
  Resolution r;
  try {
    r = parse_resolution(body["resolution"].get<std::string>());
  } catch (const Error&) {
    throw Error(ErrorCode::MalformedRequest, "resolution must be CLIENT_WINS or SERVER_WINS");
  }
  Transition t = sync_.resolve_conflict(body["ticket_id"], r, *caller.user, sessions_.now());
  return json_response(200, {{"transition", to_json(t)}});
}

ApiResponse Service::get_scorecard(const ApiRequest& req, const Caller& caller) {
  auto md = workflow_.metadata();
  const User& user = *caller.user;
  std::string org = param(req, "org").value_or("");
  if (org.empty()) org = default_unit(*md, user);
  require_unit_in_scope(*md, user, org);
  Period period = parse_period(required_param(req, "period"));
  auto snap = workflow_.store().snapshot();
  auto rows = quality_scorecard(workflow_, *snap, org, period);
  if (param(req, "format").value_or("json") == "csv") {
    return text_response("text/csv", render_scorecard_csv(rows));
  }
  json out = json::array();
  for (const auto& r : rows) out.push_back(to_json(r));
  return json_response(200, {{"org_unit_id", org}, {"period", period.key()}, {"rows", std::move(out)}});
}

ApiResponse Service::get_export_values(const ApiRequest& req, const Caller& caller) {
  auto md = workflow_.metadata();
  const User& user = *caller.user;
  ExportFilter filter;
  filter.org_unit_id = param(req, "org").value_or("");
  if (filter.org_unit_id.empty()) filter.org_unit_id = default_unit(*md, user);
  require_unit_in_scope(*md, user, filter.org_unit_id);
  if (auto v = param(req, "from")) filter.from = parse_period(*v);
  if (auto v = param(req, "to")) filter.to = parse_period(*v);
  if (auto v = param(req, "min_status")) filter.min_status = parse_status(*v);
  auto snap = workflow_.store().snapshot();
  return text_response("text/csv", export_values(*snap, *md, filter));
}

ApiResponse Service::get_export_ministry(const ApiRequest& req, const Caller& caller) {
  const User& user = *caller.user;
  if (user.role != Role::Admin && user.role != Role::DepartmentManager) {
    throw Error(ErrorCode::RoleDenied, "the ministry export covers every city");
  }
  Period period = parse_period(required_param(req, "period"));
  auto snap = workflow_.store().snapshot();
  BridgeExport b = ministry_bridge_export(*snap, *workflow_.metadata(), period);
  std::string part = param(req, "part").value_or("");
  if (part == "records") return text_response("text/csv", b.records_csv);
  if (part == "manifest") return text_response("text/csv", b.manifest_csv);
  if (!part.empty()) throw Error(ErrorCode::MalformedRequest, "part must be records or manifest");
  return json_response(200, {{"period", period.key()},
                             {"record_count", b.record_count},
                             {"records", b.records_csv},
                             {"manifest", b.manifest_csv}});
}

ApiResponse Service::get_export_transitions(const ApiRequest&, const Caller& caller) {
  const User& user = *caller.user;
  if (!is_manager(user.role)) throw Error(ErrorCode::RoleDenied, "the audit log is for reviewers");
  auto md = workflow_.metadata();
  auto snap = workflow_.store().snapshot();
  std::string out;
  for (const auto& t : snap->transitions) {
    if (!unit_in_user_scope(*md, user, t.subject.org_unit_id) ||
        !user.dataset_in_scope(t.subject.dataset_id)) {
      continue;
    }
    out += to_json(t).dump();
    out.push_back('\n');
  }
  return text_response("application/x-ndjson", out);
}

}  // namespace spmdw
