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

#include "spmdw/sync.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "spmdw/error.hpp"

namespace spmdw {

using nlohmann::json;

namespace {

[[noreturn]] void malformed_record(const std::string& msg) {
  throw Error(ErrorCode::MalformedRecord, msg);
}

const json& payload_field(const json& payload, const char* key) {
  auto it = payload.find(key);
  if (it == payload.end() || !it->is_object()) {
    malformed_record(std::string("payload needs an object '") + key + "'");
  }
  return *it;
}

std::string payload_kind(const json& payload) {
  if (!payload.is_object()) malformed_record("payload must be an object");
  auto it = payload.find("kind");
  if (it == payload.end() || !it->is_string()) malformed_record("payload needs a string 'kind'");
  std::string kind = *it;
  if (kind != "SUBMIT" && kind != "REVIEW") malformed_record("unknown payload kind '" + kind + "'");
  return kind;
}

FormSubmission parse_submit(const json& payload) {
  try {
    return form_submission_from_json(payload_field(payload, "form"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedRequest) malformed_record(e.what());
    throw;
  }
}

ReviewRequest parse_review(const json& payload) {
  try {
    return review_request_from_json(payload_field(payload, "review"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedRequest) malformed_record(e.what());
    throw;
  }
}

bool may_resolve(Role role) {
  return role == Role::SubofficeManager || role == Role::DepartmentManager ||
         role == Role::Admin;
}

bool subject_visible(const Metadata& md, const User& user, const FormKey& key) {
  return unit_in_user_scope(md, user, key.org_unit_id) && user.dataset_in_scope(key.dataset_id);
}

json server_values_json(const Metadata& md, const StoreState& state, const FormKey& key) {
  json out = json::object();
  if (!md.has_dataset(key.dataset_id)) return out;
  for (const auto& v : form_values(state, key, md.dataset(key.dataset_id).element_ids)) {
    out[v.element_id] = v.value;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// records and framing

json to_json(const ChangeRecord& r) {
  return {{"client_id", r.client_id},
          {"client_seq", r.client_seq},
          {"payload", r.payload},
          {"base_version", r.base_version}};
}

ChangeRecord change_record_from_json(const json& j) {
  if (!j.is_object()) malformed_record("record must be an object");
  ChangeRecord r;
  auto cid = j.find("client_id");
  if (cid == j.end() || !cid->is_string() || cid->get<std::string>().empty()) {
    malformed_record("record needs a non-empty 'client_id'");
  }
  r.client_id = *cid;
  auto seq = j.find("client_seq");
  if (seq == j.end() || !seq->is_number_integer() || seq->get<std::int64_t>() < 1) {
    malformed_record("record needs a positive integer 'client_seq'");
  }
  r.client_seq = *seq;
  auto base = j.find("base_version");
  if (base == j.end() || !base->is_number_integer() || base->get<std::int64_t>() < 0) {
    malformed_record("record needs a non-negative integer 'base_version'");
  }
  r.base_version = *base;
  auto payload = j.find("payload");
  if (payload == j.end()) malformed_record("record needs a 'payload'");
  r.payload = *payload;
  payload_subject(r.payload);
  return r;
}

json submit_payload(const FormSubmission& s) { return {{"kind", "SUBMIT"}, {"form", to_json(s)}}; }

json review_payload(const ReviewRequest& r) {
  return {{"kind", "REVIEW"}, {"review", to_json(r)}};
}

FormKey payload_subject(const json& payload) {
  std::string kind = payload_kind(payload);
  if (kind == "SUBMIT") {
    FormSubmission s = parse_submit(payload);
    return {s.dataset_id, s.org_unit_id, s.period};
  }
  return parse_review(payload).subject;
}

std::string encode_records(const std::vector<ChangeRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    std::string body = to_json(r).dump();
    out += std::to_string(body.size());
    out.push_back('\n');
    out += body;
    out.push_back('\n');
  }
  return out;
}

std::vector<ChangeRecord> decode_records(std::string_view wire) {
  std::vector<ChangeRecord> out;
  size_t i = 0;
  while (i < wire.size()) {
    size_t nl = wire.find('\n', i);
    if (nl == std::string_view::npos) malformed_record("record length without newline");
    std::string_view digits = wire.substr(i, nl - i);
    size_t len = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), len);
    if (ec != std::errc() || p != digits.data() + digits.size() || digits.empty()) {
      malformed_record("bad record length '" + std::string(digits) + "'");
    }
    size_t start = nl + 1;
    if (start + len + 1 > wire.size() || wire[start + len] != '\n') {
      malformed_record("record " + std::to_string(out.size() + 1) + " is truncated");
    }
    json j = json::parse(wire.substr(start, len), nullptr, false);
    if (j.is_discarded()) {
      malformed_record("record " + std::to_string(out.size() + 1) + " is not valid JSON");
    }
    out.push_back(change_record_from_json(j));
    i = start + len + 1;
  }
  return out;
}

std::string_view to_string(AckStatus s) {
  switch (s) {
    case AckStatus::Applied: return "APPLIED";
    case AckStatus::Duplicate: return "DUPLICATE";
    case AckStatus::Conflict: return "CONFLICT";
    case AckStatus::Rejected: return "REJECTED";
  }
  return "APPLIED";
}

AckStatus parse_ack_status(std::string_view text) {
  if (text == "APPLIED") return AckStatus::Applied;
  if (text == "DUPLICATE") return AckStatus::Duplicate;
  if (text == "CONFLICT") return AckStatus::Conflict;
  if (text == "REJECTED") return AckStatus::Rejected;
  malformed_record("unknown ack status '" + std::string(text) + "'");
}

json to_json(const Ack& a) {
  json j{{"client_id", a.client_id}, {"client_seq", a.client_seq}, {"status", to_string(a.status)}};
  if (!a.ticket_id.empty()) j["ticket_id"] = a.ticket_id;
  if (!a.error_code.empty()) j["error_code"] = a.error_code;
  if (!a.message.empty()) j["message"] = a.message;
  if (a.version) j["version"] = a.version;
  if (a.original) j["original"] = to_string(*a.original);
  return j;
}

Ack ack_from_json(const json& j) {
  Ack a;
  a.client_id = j.at("client_id").get<std::string>();
  a.client_seq = j.at("client_seq").get<std::int64_t>();
  a.status = parse_ack_status(j.at("status").get<std::string>());
  a.ticket_id = j.value("ticket_id", "");
  a.error_code = j.value("error_code", "");
  a.message = j.value("message", "");
  a.version = j.value("version", std::int64_t{0});
  if (j.contains("original")) a.original = parse_ack_status(j["original"].get<std::string>());
  return a;
}

json to_json(const PullResult& r) {
  json changes = json::array();
  for (const auto& c : r.changes) changes.push_back(to_json(c));
  return {{"changes", std::move(changes)}, {"cursor", r.cursor}};
}

PullResult pull_result_from_json(const json& j) {
  PullResult r;
  for (const auto& c : j.at("changes")) r.changes.push_back(change_entry_from_json(c));
  r.cursor = j.at("cursor").get<std::int64_t>();
  return r;
}

// ---------------------------------------------------------------------------
// server

std::vector<Ack> SyncServer::push(const std::vector<ChangeRecord>& records, const User& actor,
                                  Timestamp at) {
  auto snap = workflow_.store().snapshot();
  std::map<std::string, std::int64_t> last;
  for (const auto& r : records) {
    if (r.client_id.empty() || r.client_seq < 1) malformed_record("bad record identity");
    payload_subject(r.payload);
    auto it = last.find(r.client_id);
    if (it == last.end()) {
      std::int64_t hwm = snap->client_high_water(r.client_id);
      if (r.client_seq > hwm + 1) {
        malformed_record("client '" + r.client_id + "' skipped from seq " + std::to_string(hwm) +
                         " to " + std::to_string(r.client_seq));
      }
    } else if (r.client_seq != it->second + 1) {
      malformed_record("client '" + r.client_id + "' records are not consecutive at seq " +
                       std::to_string(r.client_seq));
    }
    last[r.client_id] = r.client_seq;
  }

  std::vector<Ack> acks;
  acks.reserve(records.size());
  for (const auto& r : records) acks.push_back(apply_one(r, actor, at));
  return acks;
}

Ack SyncServer::apply_one(const ChangeRecord& r, const User& actor, Timestamp at) {
  Ack ack;
  ack.client_id = r.client_id;
  ack.client_seq = r.client_seq;

  auto duplicate_of = [&](const SeenRecord& seen) {
    ack.status = AckStatus::Duplicate;
    ack.original = parse_ack_status(seen.ack);
    ack.ticket_id = seen.ticket_id;
    ack.error_code = seen.error_code;
    ack.version = seen.version;
  };

  try {
    workflow_.store().write([&](Transaction& tx) {
      const StoreState& state = tx.state();
      if (auto it = state.seen.find({r.client_id, r.client_seq}); it != state.seen.end()) {
        duplicate_of(it->second);
        return;
      }
      FormKey subject = payload_subject(r.payload);
      std::int64_t server_version = state.form_version(subject);
      if (r.base_version != server_version) {
        ConflictTicket t;
        t.id = tx.next_ticket_id();
        t.subject = subject;
        t.client_id = r.client_id;
        t.client_seq = r.client_seq;
        t.client_user = actor.id;
        t.client_base_version = r.base_version;
        t.client_payload = r.payload;
        t.server_version = server_version;
        t.server_values = server_values_json(*workflow_.metadata(), state, subject);
        t.created_at = at;
        tx.put_ticket(t);
        tx.put_seen(r.client_id, r.client_seq, {"CONFLICT", t.id, "", server_version});
        ack.status = AckStatus::Conflict;
        ack.ticket_id = t.id;
        ack.version = server_version;
        return;
      }
      ChangeOrigin origin{r.client_id, r.client_seq};
      std::int64_t version = 0;
      if (payload_kind(r.payload) == "SUBMIT") {
        version = workflow_.apply_submit(tx, parse_submit(r.payload), actor, at, origin)
                      .form_version;
      } else {
        workflow_.apply_review(tx, parse_review(r.payload), actor, at, origin);
        version = tx.state().form_version(subject);
      }
      tx.put_seen(r.client_id, r.client_seq, {"APPLIED", "", "", version});
      ack.status = AckStatus::Applied;
      ack.version = version;
    });
    return ack;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::StorageError || e.code() == ErrorCode::Internal) throw;
    Ack rejected;
    rejected.client_id = r.client_id;
    rejected.client_seq = r.client_seq;
    rejected.status = AckStatus::Rejected;
    rejected.error_code = std::string(error_code_name(e.code()));
    rejected.message = e.what();
    workflow_.store().write([&](Transaction& tx) {
      if (auto it = tx.state().seen.find({r.client_id, r.client_seq}); it != tx.state().seen.end()) {
        duplicate_of(it->second);
        rejected = ack;
        return;
      }
      tx.put_seen(r.client_id, r.client_seq, {"REJECTED", "", rejected.error_code, 0});
    });
    return rejected;
  }
}

PullResult SyncServer::pull(std::int64_t cursor, const User& viewer) const {
  auto snap = workflow_.store().snapshot();
  std::int64_t head = snap->head_seq();
  if (cursor < 0) throw Error(ErrorCode::InvalidArgument, "cursor must be non-negative");
  if (cursor > head) {
    throw Error(ErrorCode::CursorAhead,
                "cursor " + std::to_string(cursor) + " is past server seq " + std::to_string(head),
                {{"server_seq", head}});
  }
  auto md = workflow_.metadata();
  PullResult out;
  out.cursor = head;
  for (auto i = static_cast<size_t>(cursor); i < snap->changes.size(); ++i) {
    const ChangeEntry& c = snap->changes[i];
    if (subject_visible(*md, viewer, c.subject)) out.changes.push_back(c);
  }
  return out;
}

Transition SyncServer::resolve_conflict(const std::string& ticket_id, Resolution resolution,
                                        const User& actor, Timestamp at) {
  if (resolution == Resolution::Pending) {
    throw Error(ErrorCode::InvalidArgument, "resolution must be CLIENT_WINS or SERVER_WINS");
  }
  return workflow_.store().write([&](Transaction& tx) {
    auto it = tx.state().tickets.find(ticket_id);
    if (it == tx.state().tickets.end()) {
      throw Error(ErrorCode::UnknownTicket, "no conflict ticket '" + ticket_id + "'");
    }
    ConflictTicket ticket = it->second;
    if (ticket.resolution != Resolution::Pending) {
      throw Error(ErrorCode::AlreadyResolved,
                  "ticket " + ticket_id + " was resolved " +
                      std::string(to_string(ticket.resolution)) + " by " + ticket.resolved_by);
    }
    if (!may_resolve(actor.role)) {
      throw Error(ErrorCode::RoleDenied, std::string(to_string(actor.role)) +
                                             " may not resolve conflicts");
    }
    auto md = workflow_.metadata();
    if (!subject_visible(*md, actor, ticket.subject)) {
      throw Error(ErrorCode::ScopeDenied,
                  "ticket " + ticket_id + " is outside the scope of '" + actor.id + "'");
    }
    Status from = tx.state().form_status(ticket.subject);
    if (resolution == Resolution::ClientWins) {
      const User& writer = md->user(ticket.client_user);
      ChangeOrigin origin{ticket.client_id, ticket.client_seq};
      if (payload_kind(ticket.client_payload) == "SUBMIT") {
        workflow_.apply_submit(tx, parse_submit(ticket.client_payload), writer, at, origin);
      } else {
        ReviewRequest req = parse_review(ticket.client_payload);
        req.expected_version.reset();
        workflow_.apply_review(tx, req, writer, at, origin);
      }
    }
    ticket.resolution = resolution;
    ticket.resolved_by = actor.id;
    ticket.resolved_at = at;
    tx.put_ticket(ticket);
    Transition t{0,
                 ticket.subject,
                 "RESOLVE_CONFLICT",
                 from,
                 tx.state().form_status(ticket.subject),
                 actor.id,
                 at,
                 ticket.id + " " + std::string(to_string(resolution))};
    t.seq = tx.append_transition(t);
    return t;
  });
}

std::vector<ConflictTicket> SyncServer::tickets(const User& viewer, bool pending_only) const {
  auto snap = workflow_.store().snapshot();
  auto md = workflow_.metadata();
  std::vector<ConflictTicket> out;
  for (const auto& [id, t] : snap->tickets) {
    if (pending_only && t.resolution != Resolution::Pending) continue;
    if (subject_visible(*md, viewer, t.subject)) out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// client

json to_json(const ClientState& c) {
  json queue = json::array();
  for (const auto& r : c.queue) queue.push_back(to_json(r));
  json known = json::array();
  for (const auto& [k, v] : c.known_versions) known.push_back({{"subject", to_json(k)}, {"version", v}});
  json replica = json::array();
  for (const auto& [k, v] : c.replica) replica.push_back(to_json(v));
  json status = json::array();
  for (const auto& [k, s] : c.replica_status) {
    status.push_back({{"subject", to_json(k)}, {"status", to_string(s)}});
  }
  json acks = json::array();
  for (const auto& a : c.acks) acks.push_back(to_json(a));
  return {{"client_id", c.client_id},     {"user_id", c.user_id},
          {"next_seq", c.next_seq},       {"cursor", c.cursor},
          {"queue", std::move(queue)},    {"known_versions", std::move(known)},
          {"replica", std::move(replica)}, {"replica_status", std::move(status)},
          {"acks", std::move(acks)}};
}

ClientState client_state_from_json(const json& j) {
  ClientState c;
  c.client_id = j.at("client_id").get<std::string>();
  c.user_id = j.value("user_id", "");
  c.next_seq = j.at("next_seq").get<std::int64_t>();
  c.cursor = j.value("cursor", std::int64_t{0});
  for (const auto& r : j.value("queue", json::array())) c.queue.push_back(change_record_from_json(r));
  for (const auto& k : j.value("known_versions", json::array())) {
    c.known_versions[form_key_from_json(k.at("subject"))] = k.at("version").get<std::int64_t>();
  }
  for (const auto& v : j.value("replica", json::array())) {
    DataValue dv = data_value_from_json(v);
    c.replica[{dv.element_id, dv.period.key(), dv.org_unit_id}] = dv;
  }
  for (const auto& s : j.value("replica_status", json::array())) {
    c.replica_status[form_key_from_json(s.at("subject"))] =
        parse_status(s.at("status").get<std::string>());
  }
  for (const auto& a : j.value("acks", json::array())) c.acks.push_back(ack_from_json(a));
  return c;
}

void save_client_state(const ClientState& c, const std::string& path) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::StorageError, "cannot write " + tmp);
    out << to_json(c).dump(1) << '\n';
    if (!out) throw Error(ErrorCode::StorageError, "cannot write " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw Error(ErrorCode::StorageError, "cannot replace " + path);
  }
}

ClientState load_client_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::StorageError, "cannot read " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::MalformedFile, path + " is not valid JSON");
  return client_state_from_json(j);
}

ChangeRecord enqueue_offline(ClientState& client, const Metadata& md, json payload) {
  FormKey subject = payload_subject(payload);
  if (payload_kind(payload) == "SUBMIT") {
    FormSubmission s = parse_submit(payload);
    const DataSet& ds = md.dataset(s.dataset_id);
    Period period = parse_period(s.period);
    std::vector<QualityFinding> findings;
    try {
      findings = check_complete(ds, s.values, s.org_unit_id, period).findings;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ForeignElement) throw;
      throw Error(ErrorCode::LocalQualityBlock, e.what());
    }
    for (const auto& [el, v] : s.values) {
      auto f = check_correct(v, md.element(el), {s.org_unit_id, s.period});
      findings.insert(findings.end(), f.begin(), f.end());
    }
    if (has_block(findings)) {
      throw Error(ErrorCode::LocalQualityBlock,
                  "form " + subject.to_string() + " fails local checks",
                  {{"findings", to_json(std::span<const QualityFinding>(findings))}});
    }
  }
  ChangeRecord r;
  r.client_id = client.client_id;
  r.client_seq = client.next_seq;
  r.payload = std::move(payload);
  auto& known = client.known_versions[subject];
  r.base_version = known;
  known += 1;
  client.next_seq += 1;
  client.queue.push_back(r);
  return r;
}

void apply_acks(ClientState& client, const std::vector<Ack>& acks) {
  for (const auto& a : acks) {
    if (a.client_id != client.client_id) continue;
    auto it = std::find_if(client.queue.begin(), client.queue.end(),
                           [&](const ChangeRecord& r) { return r.client_seq == a.client_seq; });
    if (it == client.queue.end()) continue;
    client.queue.erase(it);
    client.acks.push_back(a);
  }
}

void apply_pull(ClientState& client, const PullResult& pull) {
  std::set<FormKey> queued;
  for (const auto& r : client.queue) queued.insert(payload_subject(r.payload));
  for (const auto& c : pull.changes) {
    for (const auto& v : c.values) client.replica[{v.element_id, v.period.key(), v.org_unit_id}] = v;
    client.replica_status[c.subject] = c.status;
    if (!queued.count(c.subject)) client.known_versions[c.subject] = c.version;
  }
  client.cursor = std::max(client.cursor, pull.cursor);
}

}  // namespace spmdw
