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

#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "spmdw/error.hpp"
#include "spmdw/seed.hpp"
#include "spmdw/value_io.hpp"

namespace spmdw::test {

std::string fixture_path(const std::string& relative) {
  return std::string(SPMDW_FIXTURE_DIR) + "/" + relative;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Timestamp t0() { return make_timestamp(2025, 2, 5); }

std::shared_ptr<const Metadata> seeded(OrgLevel entry_level) {
  static std::mutex mu;
  static std::map<OrgLevel, std::shared_ptr<const Metadata>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[entry_level];
  if (!slot) {
    SeedOptions opts;
    opts.entry_level = entry_level;
    slot = std::make_shared<const Metadata>(seed_metadata(opts));
  }
  return slot;
}

OrgLevel entry_level_for(FlowPolicyName policy) {
  return policy == FlowPolicyName::Phase1B ? OrgLevel::AdminCity : OrgLevel::Subdistrict;
}

Metadata random_metadata(std::mt19937_64& rng, int max_leaves) {
  Metadata::Parts p;
  p.org_units.push_back({"prov", "Province", OrgLevel::Province, std::nullopt});
  int leaves = 0;
  int cities = std::uniform_int_distribution<int>(1, 4)(rng);
  for (int c = 0; c < cities && leaves < max_leaves; ++c) {
    std::string cid = "c" + std::to_string(c);
    p.org_units.push_back({cid, "City " + cid, OrgLevel::AdminCity, "prov"});
    int districts = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int d = 0; d < districts && leaves < max_leaves; ++d) {
      std::string did = cid + "d" + std::to_string(d);
      p.org_units.push_back({did, "District " + did, OrgLevel::District, cid});
      int subs = std::uniform_int_distribution<int>(1, 6)(rng);
      for (int s = 0; s < subs && leaves < max_leaves; ++s, ++leaves) {
        std::string sid = did + "s" + std::to_string(s);
        p.org_units.push_back({sid, "Sub " + sid, OrgLevel::Subdistrict, did});
      }
    }
  }
  std::shuffle(p.org_units.begin() + 1, p.org_units.end(), rng);
  p.programs.push_back({"prog", "Program"});
  p.elements.push_back({"count", "Count", ValueType::NonNegativeInteger, ValueRange{0, 1e6}, "prog",
                        Aggregation::Sum});
  p.elements.push_back({"target", "Target", ValueType::NonNegativeInteger, ValueRange{0, 1e6}, "prog",
                        Aggregation::Sum});
  p.elements.push_back({"mean", "Mean", ValueType::Decimal, ValueRange{0, 1000}, "prog",
                        Aggregation::Average});
  DataSet ds;
  ds.id = "ds";
  ds.name = "Form";
  ds.element_ids = {"count", "mean", "target"};
  ds.entry_level = OrgLevel::Subdistrict;
  ds.deadline_days = 10;
  p.datasets.push_back(ds);
  p.indicators.push_back({"ind", "Coverage", "count", "target", 100.0, SpmCategory::AntenatalCare, false});
  return Metadata::build(std::move(p));
}

void put_values(Store& store, const std::vector<DataValue>& values) {
  store.write([&](Transaction& tx) {
    for (const auto& v : values) tx.put_value(v);
  });
}

std::vector<DataValue> random_facts(const Metadata& md, const Period& period, std::mt19937_64& rng) {
  static constexpr Status kStatuses[] = {Status::Draft,     Status::Submitted, Status::Verified,
                                         Status::Validated, Status::Published, Status::Rejected};
  std::vector<DataValue> out;
  std::uniform_real_distribution<double> unit(0, 1);
  for (const auto& u : md.parts().org_units) {
    for (const auto& ds : md.parts().datasets) {
      if (u.level != ds.entry_level) continue;
      for (const auto& el : ds.element_ids) {
        if (unit(rng) < 0.15) continue;
        const DataElement& e = md.element(el);
        DataValue v;
        v.element_id = el;
        v.org_unit_id = u.id;
        v.period = period;
        v.value = e.value_type == ValueType::Decimal
                      ? std::uniform_real_distribution<double>(0, 1000)(rng)
                      : static_cast<double>(std::uniform_int_distribution<int>(0, 5000)(rng));
        v.status = kStatuses[std::uniform_int_distribution<int>(0, 5)(rng)];
        v.version = 1;
        out.push_back(v);
      }
    }
  }
  return out;
}

int oracle_rank(Status s) {
  switch (s) {
    case Status::Draft: return 0;
    case Status::Rejected: return 0;
    case Status::Submitted: return 1;
    case Status::Verified: return 2;
    case Status::Validated: return 3;
    case Status::Published: return 4;
  }
  return -1;
}

bool oracle_under(const Metadata& md, const std::string& unit, const std::string& ancestor) {
  std::map<std::string, std::optional<std::string>> parent;
  for (const auto& u : md.parts().org_units) parent[u.id] = u.parent_id;
  std::optional<std::string> cur = unit;
  while (cur) {
    if (*cur == ancestor) return true;
    cur = parent.at(*cur);
  }
  return false;
}

std::optional<double> oracle_rollup(const Metadata& md, const std::vector<DataValue>& facts,
                                    const std::string& element_id, const std::string& period,
                                    const std::string& target, Status min_status) {
  Aggregation agg = Aggregation::Sum;
  for (const auto& e : md.parts().elements) {
    if (e.id == element_id) agg = e.aggregation;
  }
  double sum = 0;
  long n = 0;
  for (const auto& f : facts) {
    if (f.element_id != element_id || f.period.key() != period) continue;
    if (oracle_rank(f.status) < oracle_rank(min_status)) continue;
    if (!oracle_under(md, f.org_unit_id, target)) continue;
    sum += f.value;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return agg == Aggregation::Sum ? sum : sum / static_cast<double>(n);
}

std::shared_ptr<const StoreState> replay_connected(
    std::shared_ptr<const Metadata> md, FlowPolicy policy,
    const std::vector<std::pair<ChangeRecord, std::string>>& records, Timestamp at) {
  Store store;
  Workflow wf(md, store, std::move(policy));
  SyncServer server(wf);
  for (const auto& [rec, user] : records) server.push({rec}, md->user(user), at);
  return store.snapshot();
}

std::string store_fingerprint(const StoreState& state, const Metadata& md) {
  ExportFilter all;
  all.org_unit_id = md.tree().root().id;
  std::string out = export_values(state, md, all);
  for (const auto& [key, form] : state.forms) {
    out += key.to_string() + " " + std::string(to_string(form.status)) + " " +
           std::to_string(form.version) + "\n";
  }
  return out;
}

ServiceHarness::ServiceHarness(FlowPolicyName policy)
    : md(seeded(entry_level_for(policy))), now(t0()) {
  ServiceOptions opts;
  opts.clock = [this] { return now; };
  service = std::make_unique<Service>(md, store, flow_policy(policy), WorkflowConfig{}, opts);
}

ApiResponse ServiceHarness::call(const std::string& method, const std::string& path,
                                 const std::string& token, const std::string& body,
                                 std::map<std::string, std::string> query) {
  ApiRequest req;
  req.method = method;
  req.path = path;
  req.bearer_token = token;
  req.body = body;
  req.query = std::move(query);
  return service->handle(req);
}

std::string ServiceHarness::login(const std::string& user_id) {
  nlohmann::json body = {{"user_id", user_id}, {"password", seed_password(user_id)}};
  auto r = call("POST", "/auth", {}, body.dump());
  if (r.status != 200) throw std::runtime_error("login failed: " + r.body);
  return nlohmann::json::parse(r.body)["token"].get<std::string>();
}

FormSubmission sample_form(const Metadata& md, const std::string& dataset_id,
                           const std::string& unit, const std::string& period, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return generate_form(md, md.dataset(dataset_id), unit, parse_period(period), rng);
}

}  // namespace spmdw::test

namespace spmdw::test {

void populate_everywhere(ServiceHarness& h) {
  for (const auto& u : h.md->parts().org_units) {
    if (u.level != OrgLevel::Subdistrict) continue;
    h.service->workflow().submit_form(sample_form(*h.md, "ds-tb", u.id, "2025-01"),
                                      h.md->user(seed_pic_id(u.id)), h.now);
  }
  for (const auto& u : h.md->parts().org_units) {
    if (u.level != OrgLevel::Subdistrict || u.id.back() != '1') continue;
    ChangeRecord stale{"dev-" + u.id, 1, submit_payload(sample_form(*h.md, "ds-tb", u.id, "2025-01", 3)), 0};
    h.service->sync().push({stale}, h.md->user(seed_pic_id(u.id)), h.now);
  }
}

namespace {

std::set<std::string> id_tokens(const std::string& text) {
  std::set<std::string> out;
  std::string cur;
  for (char c : text) {
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-') {
      cur.push_back(c);
    } else if (!cur.empty()) {
      out.insert(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.insert(cur);
  return out;
}

nlohmann::json review_json(const std::string& ds, const std::string& unit, const std::string& action,
                           const std::string& period = "2025-01") {
  return {{"subject", {{"dataset_id", ds}, {"org_unit_id", unit}, {"period", period}}},
          {"action", action}};
}

}  // namespace

std::vector<ScopeViolation> scope_scan(ServiceHarness& h, const std::vector<std::string>& users) {
  std::vector<ScopeViolation> out;
  for (const auto& user_id : users) {
    const User& user = h.md->user(user_id);
    std::string token = h.login(user_id);
    std::string own = user.scope_org_unit_ids.front();
    std::vector<ApiRequest> requests;
    auto add = [&](std::string method, std::string path, std::map<std::string, std::string> q = {},
                   std::string body = {}) {
      requests.push_back({std::move(method), std::move(path), std::move(q), token, std::move(body)});
    };
    add("GET", "/metadata");
    add("GET", "/sync/pull");
    add("GET", "/sync/conflicts", {{"pending", "false"}});
    add("GET", "/quality/scorecard", {{"period", "2025-01"}});
    add("GET", "/export/values");
    add("GET", "/export/transitions");
    add("GET", "/export/ministry", {{"period", "2025-01"}});
    for (const char* fmt : {"json", "csv"}) {
      add("GET", "/analytics", {{"rows", "ORG_UNIT"}, {"columns", "PERIOD"}, {"column_items", "2025-01"},
                                {"filter", "INDICATOR:ind-tb"}, {"format", fmt}});
      add("GET", "/analytics", {{"rows", "ORG_UNIT"}, {"columns", "PERIOD"}, {"row_items", own},
                                {"column_items", "2025-01"}, {"filter", "INDICATOR:ind-tb"},
                                {"expand_children", "true"}, {"format", fmt}});
      add("GET", "/analytics", {{"rows", "ELEMENT"}, {"columns", "PERIOD"}, {"column_items", "2025-01"},
                                {"filter", "ORG_UNIT:" + own}, {"format", fmt}});
    }
    for (const auto& u : h.md->parts().org_units) {
      if (unit_in_user_scope(*h.md, user, u.id)) continue;
      add("GET", "/analytics", {{"rows", "ORG_UNIT"}, {"columns", "PERIOD"}, {"row_items", u.id},
                                {"column_items", "2025-01"}, {"filter", "INDICATOR:ind-tb"}});
      add("GET", "/export/values", {{"org", u.id}});
      add("GET", "/quality/scorecard", {{"org", u.id}, {"period", "2025-01"}});
      if (u.level == OrgLevel::Subdistrict) {
        add("POST", "/datavaluesets", {}, to_json(sample_form(*h.md, "ds-tb", u.id, "2025-01")).dump());
      }
      add("POST", "/reviews", {}, review_json("ds-tb", u.id, "VERIFY").dump());
    }
    for (const auto& req : requests) {
      auto resp = h.service->handle(req);
      std::string asked = req.body;
      for (const auto& [k, v] : req.query) asked += " " + v;
      auto asked_tokens = id_tokens(asked);
      for (const auto& t : id_tokens(resp.body)) {
        if (asked_tokens.count(t) || !h.md->tree().contains(t)) continue;
        if (!unit_in_user_scope(*h.md, user, t)) out.push_back({user_id, req.path, asked, t});
      }
    }
  }
  return out;
}

ContractPairs error_contract_pairs() {
  ServiceHarness h;
  ContractPairs out;
  const std::string unit = "jkt-pusat-gambir-1";
  const std::string pic = seed_pic_id(unit);
  std::map<std::string, std::string> tokens;
  for (const char* u : {"admin", "dinkes", "sudinkes-jkt-pusat", "sudinkes-jkt-barat"}) tokens[u] = h.login(u);
  tokens[pic] = h.login(pic);
  tokens["pic-jkt-pusat-gambir-3"] = h.login("pic-jkt-pusat-gambir-3");

  auto record = [&](const std::string& method, const std::string& path, const std::string& who,
                    std::map<std::string, std::string> query = {}, std::string body = {}) {
    std::string token = who.empty() ? "" : tokens.count(who) ? tokens[who] : who;
    auto r = h.call(method, path, token, body, std::move(query));
    auto j = nlohmann::json::parse(r.body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("error")) return;
    std::string code = j["error"]["code"];
    out.codes[method + " " + path].insert(code);
    bool matched = false;
    for (int i = 0; i <= static_cast<int>(ErrorCode::Internal); ++i) {
      auto c = static_cast<ErrorCode>(i);
      if (error_code_name(c) == code) matched = http_status(c) == r.status;
    }
    if (!matched) out.mismatched_status.push_back(method + " " + path + " " + code);
  };

  // State: one submitted form, and a history with a spike awaiting validation.
  h.service->workflow().submit_form(sample_form(*h.md, "ds-anc", unit, "2025-01"), h.md->user(pic), h.now);
  const std::string spiky = "jkt-pusat-gambir-3";
  const double served[] = {50, 51, 49, 50, 200};
  const char* months[] = {"2024-09", "2024-10", "2024-11", "2024-12", "2025-01"};
  for (int i = 0; i < 5; ++i) {
    FormSubmission f = sample_form(*h.md, "ds-anc", spiky, months[i]);
    f.values["anc-served"] = served[i];
    f.values["anc-target"] = 300;
    h.service->workflow().submit_form(f, h.md->user(seed_pic_id(spiky)), h.now);
  }
  h.service->workflow().review({{"ds-anc", spiky, "2025-01"}, ReviewAction::Verify, "", {}, std::nullopt},
                               h.md->user("sudinkes-jkt-pusat"), h.now);

  // POST /auth
  record("POST", "/auth", "", {}, nlohmann::json{{"user_id", pic}, {"password", "wrong"}}.dump());
  record("POST", "/auth", "", {}, "not json");
  // routing
  record("GET", "/nowhere", "");
  record("DELETE", "/metadata", tokens[pic]);

  // POST /datavaluesets
  auto form = to_json(sample_form(*h.md, "ds-anc", unit, "2025-02"));
  record("POST", "/datavaluesets", pic, {}, "{");
  auto other = form;
  other["org_unit_id"] = "jkt-pusat-gambir-2";
  record("POST", "/datavaluesets", pic, {}, other.dump());
  auto incomplete = form;
  incomplete["values"].erase(std::remove_if(incomplete["values"].begin(), incomplete["values"].end(),
                                            [](const nlohmann::json& v) { return v["element_id"] == "anc-target"; }),
                             incomplete["values"].end());
  record("POST", "/datavaluesets", pic, {}, incomplete.dump());
  auto foreign = form;
  foreign["program_id"] = "p-tb";
  record("POST", "/datavaluesets", pic, {}, foreign.dump());
  auto stray = form;
  stray["values"].push_back({{"element_id", "tb-served"}, {"value", 3}});
  record("POST", "/datavaluesets", pic, {}, stray.dump());
  auto unknown_ds = form;
  unknown_ds["dataset_id"] = "ds-none";
  record("POST", "/datavaluesets", pic, {}, unknown_ds.dump());
  auto bad_period = form;
  bad_period["period"] = "2025-13";
  record("POST", "/datavaluesets", pic, {}, bad_period.dump());
  auto quarter = form;
  quarter["period"] = "2025-Q1";
  record("POST", "/datavaluesets", pic, {}, quarter.dump());
  record("POST", "/datavaluesets", "dinkes", {}, form.dump());

  // POST /reviews
  record("POST", "/reviews", pic, {}, review_json("ds-anc", unit, "VERIFY").dump());
  record("POST", "/reviews", "sudinkes-jkt-barat", {}, review_json("ds-anc", unit, "VERIFY").dump());
  record("POST", "/reviews", "dinkes", {}, review_json("ds-anc", unit, "PUBLISH").dump());
  record("POST", "/reviews", "sudinkes-jkt-pusat", {}, review_json("ds-anc", unit, "REJECT").dump());
  record("POST", "/reviews", "dinkes", {}, review_json("ds-anc", spiky, "VALIDATE").dump());
  record("POST", "/reviews", "dinkes", {}, review_json("ds-anc", "atlantis", "VERIFY").dump());
  record("POST", "/reviews", "dinkes", {}, "[]");

  // GET /analytics
  std::map<std::string, std::string> q{{"rows", "ORG_UNIT"}, {"columns", "PERIOD"}, {"row_items", "jkt-pusat"},
                                       {"column_items", "2025-01"}, {"filter", "INDICATOR:ind-anc"}};
  auto with = [&](std::map<std::string, std::string> base, const std::string& k, const std::string& v) {
    base[k] = v;
    return base;
  };
  record("GET", "/analytics", "", with(q, "columns", "ORG_UNIT"));
  record("GET", "/analytics", "", with(q, "filter", "INDICATOR:ind-none"));
  record("GET", "/analytics", "", with(q, "column_items", "2025-13"));
  record("GET", "/analytics", "", with(with(q, "rows", "ELEMENT"), "filter", "ORG_UNIT:jkt-pusat"));
  record("GET", "/analytics", "sudinkes-jkt-barat", q);
  record("GET", "/analytics", "dinkes", with(q, "min_status", "DRAFT"));
  record("GET", "/analytics", "dinkes", with(q, "row_items", "atlantis"));

  // sync
  record("POST", "/sync/push", pic, {}, "5\n{}\n");
  record("GET", "/sync/pull", pic, {{"cursor", "x"}});
  record("GET", "/sync/pull", pic, {{"cursor", "1000"}});
  record("POST", "/sync/conflicts/resolve", "sudinkes-jkt-pusat", {}, "{}");
  record("POST", "/sync/conflicts/resolve", "sudinkes-jkt-pusat", {},
         nlohmann::json{{"ticket_id", "t-999"}, {"resolution", "SERVER_WINS"}}.dump());

  // scorecard and exports
  record("GET", "/quality/scorecard", "sudinkes-jkt-pusat", {});
  record("GET", "/quality/scorecard", "dinkes", {{"org", "jkt-pusat,jkt-barat"}, {"period", "2025-01"}});
  record("GET", "/quality/scorecard", "sudinkes-jkt-pusat", {{"org", "jkt-barat"}, {"period", "2025-01"}});
  record("GET", "/quality/scorecard", "sudinkes-jkt-pusat", {{"period", "2025-1"}});
  record("GET", "/export/values", "sudinkes-jkt-pusat", {{"org", "jkt-barat"}});
  record("GET", "/export/values", "sudinkes-jkt-pusat", {{"min_status", "LATER"}});
  record("GET", "/export/values", "sudinkes-jkt-pusat", {{"from", "2025"}, {"to", "x"}});
  record("GET", "/export/ministry", "sudinkes-jkt-pusat", {{"period", "2025-01"}});
  record("GET", "/export/ministry", "dinkes", {});
  record("GET", "/export/ministry", "dinkes", {{"period", "2025-01"}, {"part", "other"}});
  record("GET", "/export/transitions", pic);

  // Every protected route, without a session, with a bogus one and with an
  // expired one.
  for (const auto& [method, path] : Service::routes()) {
    if (path == "/auth") continue;
    std::map<std::string, std::string> aq;
    if (path == "/analytics") aq = with(with(q, "rows", "ELEMENT"), "filter", "ORG_UNIT:jkt-pusat");
    if (path != "/analytics") record(method, path, "", aq, "{}");
    record(method, path, "bogus-token", aq, "{}");
  }
  h.now += std::chrono::hours(24);
  for (const auto& [method, path] : Service::routes()) {
    if (path == "/auth") continue;
    record(method, path, pic, {}, "{}");
  }
  return out;
}

}  // namespace spmdw::test
