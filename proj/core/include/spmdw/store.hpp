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

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "spmdw/model.hpp"
#include "spmdw/time.hpp"

namespace spmdw {

struct ValueKey {
  std::string element_id;
  std::string period;
  std::string org_unit_id;
  friend auto operator<=>(const ValueKey&, const ValueKey&) = default;
};

/// A form instance: the unit of review.
struct FormKey {
  std::string dataset_id;
  std::string org_unit_id;
  std::string period;
  friend auto operator<=>(const FormKey&, const FormKey&) = default;
  std::string to_string() const { return dataset_id + "/" + org_unit_id + "/" + period; }
};

struct FormState {
  FormKey key;
  Status status = Status::Draft;
  /// Bumped by every change to the form (submission, review, justification,
  /// conflict resolution). Sync base versions and CAS compare against it.
  std::int64_t version = 0;
  std::optional<Timestamp> submitted_at;
  std::string entered_by;

  friend bool operator==(const FormState&, const FormState&) = default;
};

struct Transition {
  std::int64_t seq = 0;
  FormKey subject;
  std::string action;  // SUBMIT, VERIFY, VALIDATE, REJECT, PUBLISH, JUSTIFY, RESOLVE_CONFLICT, IMPORT
  Status from = Status::Draft;
  Status to = Status::Draft;
  std::string actor;
  Timestamp at{};
  std::string reason;
};

/// One entry of the server change log that clients pull.
struct ChangeEntry {
  std::int64_t server_seq = 0;
  std::string kind;  // the Transition action that produced it
  FormKey subject;
  Status status = Status::Draft;
  std::int64_t version = 0;
  std::vector<DataValue> values;
  std::string origin_client_id;  // empty for direct (non-sync) writes
  std::int64_t origin_client_seq = 0;
  Timestamp at{};
};

enum class Resolution { Pending, ClientWins, ServerWins };
std::string_view to_string(Resolution r);
Resolution parse_resolution(std::string_view text);

struct ConflictTicket {
  std::string id;
  FormKey subject;
  std::string client_id;
  std::int64_t client_seq = 0;
  std::string client_user;
  std::int64_t client_base_version = 0;
  nlohmann::json client_payload;
  std::int64_t server_version = 0;
  nlohmann::json server_values;
  Resolution resolution = Resolution::Pending;
  std::string resolved_by;
  Timestamp created_at{};
  std::optional<Timestamp> resolved_at;
};

/// Server-side memory of a pushed (client_id, client_seq).
struct SeenRecord {
  std::string ack;  // APPLIED, CONFLICT or REJECTED
  std::string ticket_id;
  std::string error_code;
  std::int64_t version = 0;
};

/// Everything persisted, as of one commit.
struct StoreState {
  std::int64_t snapshot_id = 0;
  std::map<ValueKey, DataValue> values;
  std::map<FormKey, FormState> forms;
  std::vector<Transition> transitions;
  std::vector<ChangeEntry> changes;
  std::map<std::string, ConflictTicket> tickets;
  std::map<std::pair<std::string, std::int64_t>, SeenRecord> seen;

  const DataValue* find_value(const ValueKey& key) const;
  const FormState* find_form(const FormKey& key) const;
  Status form_status(const FormKey& key) const;
  std::int64_t form_version(const FormKey& key) const;
  /// Highest client_seq recorded for the client, 0 when none.
  std::int64_t client_high_water(std::string_view client_id) const;
  std::int64_t head_seq() const { return static_cast<std::int64_t>(changes.size()); }
};

struct PutValue { DataValue value; };
struct PutForm { FormState form; };
struct AppendTransition { Transition transition; };
struct AppendChange { ChangeEntry change; };
struct PutTicket { ConflictTicket ticket; };
struct PutSeen { std::string client_id; std::int64_t client_seq = 0; SeenRecord record; };
using StoreOp = std::variant<PutValue, PutForm, AppendTransition, AppendChange, PutTicket, PutSeen>;

void apply_op(StoreState& state, const StoreOp& op);

/// Called at each fault-injection point: ("record", i) for staged record
/// boundaries, then ("commit", 0), ("log_torn", 0) and ("publish", 0).
/// Throwing from the hook aborts the commit at that point.
using FaultHook = std::function<void(std::string_view stage, std::size_t index)>;

/// A private working copy of the store. Mutations are recorded as ops and
/// published atomically by Store::write when the callback returns.
class Transaction {
 public:
  const StoreState& state() const { return work_; }

  void put_value(DataValue value);
  void put_form(FormState form);
  std::int64_t append_transition(Transition t);
  std::int64_t append_change(ChangeEntry c);
  void put_ticket(ConflictTicket t);
  void put_seen(std::string client_id, std::int64_t client_seq, SeenRecord rec);
  std::string next_ticket_id() const;

  /// Marks a record boundary for fault injection.
  void checkpoint(std::size_t record_index);

  const std::vector<StoreOp>& ops() const { return ops_; }

 private:
  friend class Store;
  Transaction(StoreState base, const FaultHook* hook) : work_(std::move(base)), hook_(hook) {}
  void record(StoreOp op);

  StoreState work_;
  std::vector<StoreOp> ops_;
  const FaultHook* hook_;
};

struct StoreOptions {
  /// Write a full snapshot and truncate the log after this many commits.
  int snapshot_every = 256;
  bool fsync = true;
};

/// Embedded single-writer store: append-only commit log plus periodic
/// snapshot, with many concurrent snapshot readers.
class Store {
 public:
  /// Volatile store with no data directory.
  Store();
  /// Opens (and recovers) the store in `data_dir`, creating it if needed.
  explicit Store(std::filesystem::path data_dir, StoreOptions options = {});
  ~Store();

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  /// Immutable view; never observes later commits.
  std::shared_ptr<const StoreState> snapshot() const;

  /// Runs `fn(Transaction&)` under the writer lock and commits its ops
  /// atomically. If `fn` or the commit throws, nothing is published.
  template <typename F>
  auto write(F&& fn) -> decltype(fn(std::declval<Transaction&>())) {
    std::lock_guard<std::mutex> lock(writer_);
    Transaction tx(begin_copy(), &fault_hook_);
    if constexpr (std::is_void_v<decltype(fn(tx))>) {
      fn(tx);
      commit(tx);
    } else {
      auto result = fn(tx);
      commit(tx);
      return result;
    }
  }

  void set_fault_hook(FaultHook hook);
  bool durable() const { return !dir_.empty(); }
  const std::filesystem::path& data_dir() const { return dir_; }

  /// Forces a snapshot file write (durable stores only).
  void write_snapshot_file();

 private:
  StoreState begin_copy() const;
  void commit(Transaction& tx);
  void recover();
  void append_log_line(const std::string& line);

  std::filesystem::path dir_;
  StoreOptions options_;
  mutable std::mutex reader_;
  std::mutex writer_;
  std::shared_ptr<const StoreState> current_;
  FaultHook fault_hook_;
  int commits_since_snapshot_ = 0;
  bool poisoned_ = false;
};

// JSON forms shared by the log, snapshots, the sync wire and the API.
nlohmann::json to_json(const DataValue& v);
DataValue data_value_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FormKey& k);
FormKey form_key_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FormState& f);
nlohmann::json to_json(const Transition& t);
nlohmann::json to_json(const ChangeEntry& c);
ChangeEntry change_entry_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConflictTicket& t);
nlohmann::json to_json(const StoreOp& op);
StoreOp store_op_from_json(const nlohmann::json& j);
nlohmann::json state_to_json(const StoreState& s);
StoreState state_from_json(const nlohmann::json& j);

/// Values of one form instance, in element-id order.
std::vector<DataValue> form_values(const StoreState& s, const FormKey& key,
                                   const std::vector<std::string>& element_ids);

/// Transition log as one JSON object per line.
std::string transitions_to_jsonl(const StoreState& s);

}  // namespace spmdw
