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

#include "spmdw/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "spmdw/digest.hpp"
#include "spmdw/error.hpp"

namespace spmdw {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kLogName = "commits.log";
constexpr const char* kSnapshotName = "snapshot.json";

[[noreturn]] void storage_error(const std::string& what) {
  throw Error(ErrorCode::StorageError, what + ": " + std::strerror(errno));
}

}  // namespace

std::string_view to_string(Resolution r) {
  switch (r) {
    case Resolution::Pending: return "PENDING";
    case Resolution::ClientWins: return "CLIENT_WINS";
    case Resolution::ServerWins: return "SERVER_WINS";
  }
  return "PENDING";
}

Resolution parse_resolution(std::string_view text) {
  if (text == "PENDING") return Resolution::Pending;
  if (text == "CLIENT_WINS") return Resolution::ClientWins;
  if (text == "SERVER_WINS") return Resolution::ServerWins;
  throw Error(ErrorCode::InvalidArgument, "unknown resolution '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// StoreState

const DataValue* StoreState::find_value(const ValueKey& key) const {
  auto it = values.find(key);
  return it == values.end() ? nullptr : &it->second;
}

const FormState* StoreState::find_form(const FormKey& key) const {
  auto it = forms.find(key);
  return it == forms.end() ? nullptr : &it->second;
}

Status StoreState::form_status(const FormKey& key) const {
  const FormState* f = find_form(key);
  return f ? f->status : Status::Draft;
}

std::int64_t StoreState::form_version(const FormKey& key) const {
  const FormState* f = find_form(key);
  return f ? f->version : 0;
}

std::int64_t StoreState::client_high_water(std::string_view client_id) const {
  auto it = seen.upper_bound({std::string(client_id), INT64_MAX});
  if (it == seen.begin()) return 0;
  --it;
  return it->first.first == client_id ? it->first.second : 0;
}

void apply_op(StoreState& s, const StoreOp& op) {
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, PutValue>) {
          const auto& v = o.value;
          s.values[{v.element_id, v.period.key(), v.org_unit_id}] = v;
        } else if constexpr (std::is_same_v<T, PutForm>) {
          s.forms[o.form.key] = o.form;
        } else if constexpr (std::is_same_v<T, AppendTransition>) {
          s.transitions.push_back(o.transition);
        } else if constexpr (std::is_same_v<T, AppendChange>) {
          s.changes.push_back(o.change);
        } else if constexpr (std::is_same_v<T, PutTicket>) {
          s.tickets[o.ticket.id] = o.ticket;
        } else if constexpr (std::is_same_v<T, PutSeen>) {
          s.seen[{o.client_id, o.client_seq}] = o.record;
        }
      },
      op);
}

// ---------------------------------------------------------------------------
// Transaction

void Transaction::record(StoreOp op) {
  apply_op(work_, op);
  ops_.push_back(std::move(op));
}

void Transaction::put_value(DataValue value) { record(PutValue{std::move(value)}); }
void Transaction::put_form(FormState form) { record(PutForm{std::move(form)}); }

std::int64_t Transaction::append_transition(Transition t) {
  t.seq = static_cast<std::int64_t>(work_.transitions.size()) + 1;
  std::int64_t seq = t.seq;
  record(AppendTransition{std::move(t)});
  return seq;
}

std::int64_t Transaction::append_change(ChangeEntry c) {
  c.server_seq = work_.head_seq() + 1;
  std::int64_t seq = c.server_seq;
  record(AppendChange{std::move(c)});
  return seq;
}

void Transaction::put_ticket(ConflictTicket t) { record(PutTicket{std::move(t)}); }

void Transaction::put_seen(std::string client_id, std::int64_t client_seq, SeenRecord rec) {
  record(PutSeen{std::move(client_id), client_seq, std::move(rec)});
}

std::string Transaction::next_ticket_id() const {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "T%06zu", work_.tickets.size() + 1);
  return buf;
}

void Transaction::checkpoint(std::size_t record_index) {
  if (hook_ && *hook_) (*hook_)("record", record_index);
}

// ---------------------------------------------------------------------------
// Store

Store::Store() : current_(std::make_shared<const StoreState>()) {}

Store::Store(fs::path data_dir, StoreOptions options)
    : dir_(std::move(data_dir)), options_(options) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) {
    throw Error(ErrorCode::StorageError,
                "cannot create data directory '" + dir_.string() + "': " + ec.message());
  }
  recover();
}

Store::~Store() = default;

std::shared_ptr<const StoreState> Store::snapshot() const {
  std::lock_guard<std::mutex> lock(reader_);
  return current_;
}

StoreState Store::begin_copy() const {
  if (poisoned_) {
    throw Error(ErrorCode::StorageError, "store failed mid-commit; reopen to recover");
  }
  return *snapshot();
}

void Store::set_fault_hook(FaultHook hook) {
  std::lock_guard<std::mutex> lock(writer_);
  fault_hook_ = std::move(hook);
}

void Store::commit(Transaction& tx) {
  if (tx.ops().empty()) return;
  auto hook = [&](std::string_view stage) {
    if (fault_hook_) fault_hook_(stage, 0);
  };
  hook("commit");

  auto next = std::make_shared<StoreState>(std::move(tx.work_));
  next->snapshot_id = snapshot()->snapshot_id + 1;

  if (durable()) {
    json ops = json::array();
    for (const auto& op : tx.ops()) ops.push_back(to_json(op));
    std::string payload = json{{"id", next->snapshot_id}, {"ops", std::move(ops)}}.dump();
    std::string line = sha256_hex(payload).substr(0, 16) + " " + payload + "\n";
    append_log_line(line);
  }

  try {
    hook("publish");
  } catch (...) {
    // The record may already be on disk; this process can no longer trust
    // its in-memory view.
    if (durable()) poisoned_ = true;
    throw;
  }
  {
    std::lock_guard<std::mutex> lock(reader_);
    current_ = std::move(next);
  }
  if (durable() && ++commits_since_snapshot_ >= options_.snapshot_every) {
    write_snapshot_file();
  }
}

void Store::append_log_line(const std::string& line) {
  fs::path log = dir_ / kLogName;
  int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) storage_error("open " + log.string());
  off_t before = ::lseek(fd, 0, SEEK_END);

  auto write_all = [&](const char* p, size_t n) {
    while (n > 0) {
      ssize_t w = ::write(fd, p, n);
      if (w < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      p += w;
      n -= static_cast<size_t>(w);
    }
    return true;
  };

  try {
    if (fault_hook_) {
      try {
        fault_hook_("log_torn", 0);
      } catch (...) {
        // Simulated crash half way through the record.
        write_all(line.data(), line.size() / 2);
        ::close(fd);
        poisoned_ = true;
        throw;
      }
    }
    if (!write_all(line.data(), line.size()) || (options_.fsync && ::fsync(fd) != 0)) {
      int err = errno;
      [[maybe_unused]] int rc = ::ftruncate(fd, before);
      ::close(fd);
      errno = err;
      storage_error("append " + log.string());
    }
  } catch (...) {
    throw;
  }
  ::close(fd);
}

void Store::write_snapshot_file() {
  if (!durable()) return;
  auto snap = snapshot();
  fs::path tmp = dir_ / (std::string(kSnapshotName) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << state_to_json(*snap).dump();
    out.flush();
    if (!out) storage_error("write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, dir_ / kSnapshotName, ec);
  if (ec) throw Error(ErrorCode::StorageError, "rename snapshot: " + ec.message());
  // Records up to the snapshot id are now redundant.
  fs::resize_file(dir_ / kLogName, 0, ec);
  commits_since_snapshot_ = 0;
}

void Store::recover() {
  StoreState state;
  fs::path snap_path = dir_ / kSnapshotName;
  if (fs::exists(snap_path)) {
    std::ifstream in(snap_path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      state = state_from_json(json::parse(buf.str()));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::StorageError, "corrupt snapshot: " + std::string(e.what()));
    }
  }

  fs::path log_path = dir_ / kLogName;
  if (fs::exists(log_path)) {
    std::ifstream in(log_path, std::ios::binary);
    std::string line;
    std::uintmax_t good_bytes = 0;
    bool torn = false;
    while (true) {
      auto pos = in.tellg();
      if (!std::getline(in, line)) break;
      if (in.eof()) {  // no trailing newline: torn write
        torn = true;
        break;
      }
      auto space = line.find(' ');
      if (space == std::string::npos) {
        torn = true;
        break;
      }
      std::string check = line.substr(0, space);
      std::string payload = line.substr(space + 1);
      if (sha256_hex(payload).substr(0, 16) != check) {
        torn = true;
        break;
      }
      json rec = json::parse(payload);
      std::int64_t id = rec.at("id").get<std::int64_t>();
      if (id > state.snapshot_id) {
        if (id != state.snapshot_id + 1) {
          throw Error(ErrorCode::StorageError, "commit log gap at record " + std::to_string(id));
        }
        for (const auto& op : rec.at("ops")) apply_op(state, store_op_from_json(op));
        state.snapshot_id = id;
      }
      good_bytes = static_cast<std::uintmax_t>(pos) + line.size() + 1;
    }
    if (torn) {
      std::error_code ec;
      fs::resize_file(log_path, good_bytes, ec);
    }
  }
  current_ = std::make_shared<const StoreState>(std::move(state));
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const DataValue& v) {
  return {{"element_id", v.element_id},
          {"org_unit_id", v.org_unit_id},
          {"period", v.period.key()},
          {"value", v.value},
          {"status", to_string(v.status)},
          {"version", v.version},
          {"entered_by", v.entered_by},
          {"justification", v.justification},
          {"updated_at", format_timestamp(v.updated_at)}};
}

DataValue data_value_from_json(const json& j) {
  DataValue v;
  v.element_id = j.at("element_id").get<std::string>();
  v.org_unit_id = j.at("org_unit_id").get<std::string>();
  v.period = parse_period(j.at("period").get<std::string>());
  v.value = j.at("value").get<double>();
  v.status = parse_status(j.at("status").get<std::string>());
  v.version = j.at("version").get<std::int64_t>();
  v.entered_by = j.value("entered_by", "");
  v.justification = j.value("justification", "");
  v.updated_at = parse_timestamp(j.at("updated_at").get<std::string>());
  return v;
}

json to_json(const FormKey& k) {
  return {{"dataset_id", k.dataset_id}, {"org_unit_id", k.org_unit_id}, {"period", k.period}};
}

FormKey form_key_from_json(const json& j) {
  return {j.at("dataset_id").get<std::string>(), j.at("org_unit_id").get<std::string>(),
          j.at("period").get<std::string>()};
}

json to_json(const FormState& f) {
  json j{{"subject", to_json(f.key)},
         {"status", to_string(f.status)},
         {"version", f.version},
         {"entered_by", f.entered_by}};
  j["submitted_at"] = f.submitted_at ? json(format_timestamp(*f.submitted_at)) : json(nullptr);
  return j;
}

namespace {

FormState form_state_from_json(const json& j) {
  FormState f;
  f.key = form_key_from_json(j.at("subject"));
  f.status = parse_status(j.at("status").get<std::string>());
  f.version = j.at("version").get<std::int64_t>();
  f.entered_by = j.value("entered_by", "");
  if (j.contains("submitted_at") && !j["submitted_at"].is_null()) {
    f.submitted_at = parse_timestamp(j["submitted_at"].get<std::string>());
  }
  return f;
}

Transition transition_from_json(const json& j) {
  Transition t;
  t.seq = j.at("seq").get<std::int64_t>();
  t.subject = form_key_from_json(j.at("subject"));
  t.action = j.at("action").get<std::string>();
  t.from = parse_status(j.at("from_status").get<std::string>());
  t.to = parse_status(j.at("to_status").get<std::string>());
  t.actor = j.at("actor").get<std::string>();
  t.at = parse_timestamp(j.at("at").get<std::string>());
  t.reason = j.value("reason", "");
  return t;
}

ConflictTicket ticket_from_json(const json& j) {
  ConflictTicket t;
  t.id = j.at("id").get<std::string>();
  t.subject = form_key_from_json(j.at("subject"));
  t.client_id = j.at("client_id").get<std::string>();
  t.client_seq = j.at("client_seq").get<std::int64_t>();
  t.client_user = j.value("client_user", "");
  t.client_base_version = j.at("client_version").get<std::int64_t>();
  t.client_payload = j.at("client_value");
  t.server_version = j.at("server_version").get<std::int64_t>();
  t.server_values = j.at("server_value");
  t.resolution = parse_resolution(j.at("resolution").get<std::string>());
  t.resolved_by = j.value("resolved_by", "");
  t.created_at = parse_timestamp(j.at("created_at").get<std::string>());
  if (j.contains("resolved_at") && !j["resolved_at"].is_null()) {
    t.resolved_at = parse_timestamp(j["resolved_at"].get<std::string>());
  }
  return t;
}

}  // namespace

json to_json(const Transition& t) {
  return {{"seq", t.seq},
          {"subject", to_json(t.subject)},
          {"action", t.action},
          {"from_status", to_string(t.from)},
          {"to_status", to_string(t.to)},
          {"actor", t.actor},
          {"at", format_timestamp(t.at)},
          {"reason", t.reason}};
}

json to_json(const ChangeEntry& c) {
  json values = json::array();
  for (const auto& v : c.values) values.push_back(to_json(v));
  return {{"server_seq", c.server_seq},
          {"kind", c.kind},
          {"subject", to_json(c.subject)},
          {"status", to_string(c.status)},
          {"version", c.version},
          {"values", std::move(values)},
          {"origin_client_id", c.origin_client_id},
          {"origin_client_seq", c.origin_client_seq},
          {"at", format_timestamp(c.at)}};
}

ChangeEntry change_entry_from_json(const json& j) {
  ChangeEntry c;
  c.server_seq = j.at("server_seq").get<std::int64_t>();
  c.kind = j.at("kind").get<std::string>();
  c.subject = form_key_from_json(j.at("subject"));
  c.status = parse_status(j.at("status").get<std::string>());
  c.version = j.at("version").get<std::int64_t>();
  for (const auto& v : j.at("values")) c.values.push_back(data_value_from_json(v));
  c.origin_client_id = j.value("origin_client_id", "");
  c.origin_client_seq = j.value("origin_client_seq", std::int64_t{0});
  c.at = parse_timestamp(j.at("at").get<std::string>());
  return c;
}

json to_json(const ConflictTicket& t) {
  json j{{"id", t.id},
         {"subject", to_json(t.subject)},
         {"client_id", t.client_id},
         {"client_seq", t.client_seq},
         {"client_user", t.client_user},
         {"client_value", t.client_payload},
         {"client_version", t.client_base_version},
         {"server_value", t.server_values},
         {"server_version", t.server_version},
         {"resolution", to_string(t.resolution)},
         {"resolved_by", t.resolved_by},
         {"created_at", format_timestamp(t.created_at)}};
  j["resolved_at"] = t.resolved_at ? json(format_timestamp(*t.resolved_at)) : json(nullptr);
  return j;
}

json to_json(const StoreOp& op) {
  return std::visit(
      [](const auto& o) -> json {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, PutValue>) {
          return {{"op", "put_value"}, {"value", to_json(o.value)}};
        } else if constexpr (std::is_same_v<T, PutForm>) {
          return {{"op", "put_form"}, {"form", to_json(o.form)}};
        } else if constexpr (std::is_same_v<T, AppendTransition>) {
          return {{"op", "append_transition"}, {"transition", to_json(o.transition)}};
        } else if constexpr (std::is_same_v<T, AppendChange>) {
          return {{"op", "append_change"}, {"change", to_json(o.change)}};
        } else if constexpr (std::is_same_v<T, PutTicket>) {
          return {{"op", "put_ticket"}, {"ticket", to_json(o.ticket)}};
        } else {
          return {{"op", "put_seen"},
                  {"client_id", o.client_id},
                  {"client_seq", o.client_seq},
                  {"ack", o.record.ack},
                  {"ticket_id", o.record.ticket_id},
                  {"error_code", o.record.error_code},
                  {"version", o.record.version}};
        }
      },
      op);
}

StoreOp store_op_from_json(const json& j) {
  std::string op = j.at("op").get<std::string>();
  if (op == "put_value") return PutValue{data_value_from_json(j.at("value"))};
  if (op == "put_form") return PutForm{form_state_from_json(j.at("form"))};
  if (op == "append_transition") return AppendTransition{transition_from_json(j.at("transition"))};
  if (op == "append_change") return AppendChange{change_entry_from_json(j.at("change"))};
  if (op == "put_ticket") return PutTicket{ticket_from_json(j.at("ticket"))};
  if (op == "put_seen") {
    return PutSeen{j.at("client_id").get<std::string>(), j.at("client_seq").get<std::int64_t>(),
                   SeenRecord{j.at("ack").get<std::string>(), j.value("ticket_id", ""),
                              j.value("error_code", ""), j.value("version", std::int64_t{0})}};
  }
  throw Error(ErrorCode::StorageError, "unknown log op '" + op + "'");
}

json state_to_json(const StoreState& s) {
  json ops = json::array();
  for (const auto& [k, v] : s.values) ops.push_back(to_json(StoreOp{PutValue{v}}));
  for (const auto& [k, f] : s.forms) ops.push_back(to_json(StoreOp{PutForm{f}}));
  for (const auto& t : s.transitions) ops.push_back(to_json(StoreOp{AppendTransition{t}}));
  for (const auto& c : s.changes) ops.push_back(to_json(StoreOp{AppendChange{c}}));
  for (const auto& [id, t] : s.tickets) ops.push_back(to_json(StoreOp{PutTicket{t}}));
  for (const auto& [k, r] : s.seen) ops.push_back(to_json(StoreOp{PutSeen{k.first, k.second, r}}));
  return {{"snapshot_id", s.snapshot_id}, {"ops", std::move(ops)}};
}

StoreState state_from_json(const json& j) {
  StoreState s;
  for (const auto& op : j.at("ops")) apply_op(s, store_op_from_json(op));
  s.snapshot_id = j.at("snapshot_id").get<std::int64_t>();
  return s;
}

std::vector<DataValue> form_values(const StoreState& s, const FormKey& key,
                                   const std::vector<std::string>& element_ids) {
  std::vector<DataValue> out;
  for (const auto& el : element_ids) {
    if (const DataValue* v = s.find_value({el, key.period, key.org_unit_id})) {
      out.push_back(*v);
    }
  }
  return out;
}

std::string transitions_to_jsonl(const StoreState& s) {
  std::string out;
  for (const auto& t : s.transitions) out += to_json(t).dump() + "\n";
  return out;
}

}  // namespace spmdw
