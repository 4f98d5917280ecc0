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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "spmdw/workflow.hpp"

namespace spmdw {

/// One queued client write. `payload` is either
///   {"kind":"SUBMIT","form":<FormSubmission>} or
///   {"kind":"REVIEW","review":<ReviewRequest>}.
struct ChangeRecord {
  std::string client_id;
  std::int64_t client_seq = 0;
  nlohmann::json payload;
  std::int64_t base_version = 0;

  friend bool operator==(const ChangeRecord&, const ChangeRecord&) = default;
};

nlohmann::json to_json(const ChangeRecord& r);
/// Throws Error(MalformedRecord).
ChangeRecord change_record_from_json(const nlohmann::json& j);

nlohmann::json submit_payload(const FormSubmission& s);
nlohmann::json review_payload(const ReviewRequest& r);
/// Form instance a payload writes to. Throws Error(MalformedRecord).
FormKey payload_subject(const nlohmann::json& payload);

/// Wire framing: each record is its JSON byte length in decimal, "\n", the
/// JSON text, "\n".
std::string encode_records(const std::vector<ChangeRecord>& records);
/// Throws Error(MalformedRecord) on a bad length, truncated body or bad JSON.
std::vector<ChangeRecord> decode_records(std::string_view wire);

enum class AckStatus { Applied, Duplicate, Conflict, Rejected };
std::string_view to_string(AckStatus s);
AckStatus parse_ack_status(std::string_view text);

struct Ack {
  std::string client_id;
  std::int64_t client_seq = 0;
  AckStatus status = AckStatus::Applied;
  std::string ticket_id;   // CONFLICT
  std::string error_code;  // REJECTED
  std::string message;
  std::int64_t version = 0;  // form version after the write (APPLIED)
  /// For DUPLICATE: what the first delivery answered.
  std::optional<AckStatus> original;
};

nlohmann::json to_json(const Ack& a);
Ack ack_from_json(const nlohmann::json& j);

struct PullResult {
  std::vector<ChangeEntry> changes;
  std::int64_t cursor = 0;
};

nlohmann::json to_json(const PullResult& r);
PullResult pull_result_from_json(const nlohmann::json& j);

class SyncServer {
 public:
  explicit SyncServer(Workflow& workflow) : workflow_(workflow) {}

  /// Records must be gap-free and increasing per client, and the first
  /// record of each client at most one past what the server has seen.
  /// Each record is committed on its own. Throws Error(MalformedRecord)
  /// before applying anything.
  std::vector<Ack> push(const std::vector<ChangeRecord>& records, const User& actor,
                        Timestamp at);

  /// Changes after `cursor` visible to `viewer`. Throws Error(CursorAhead).
  PullResult pull(std::int64_t cursor, const User& viewer) const;

  /// Throws UnknownTicket, AlreadyResolved, RoleDenied, ScopeDenied, and
  /// for CLIENT_WINS anything the replayed write throws.
  Transition resolve_conflict(const std::string& ticket_id, Resolution resolution,
                              const User& actor, Timestamp at);

  std::vector<ConflictTicket> tickets(const User& viewer, bool pending_only) const;

  Workflow& workflow() { return workflow_; }

 private:
  Ack apply_one(const ChangeRecord& r, const User& actor, Timestamp at);

  Workflow& workflow_;
};

/// Offline client: local queue plus a replica of what it has pulled.
struct ClientState {
  std::string client_id;
  std::string user_id;
  std::int64_t next_seq = 1;
  std::vector<ChangeRecord> queue;
  std::int64_t cursor = 0;
  /// Latest form version the client believes the server holds.
  std::map<FormKey, std::int64_t> known_versions;
  std::map<ValueKey, DataValue> replica;
  std::map<FormKey, Status> replica_status;
  std::vector<Ack> acks;  // every final answer received, in arrival order
};

nlohmann::json to_json(const ClientState& c);
ClientState client_state_from_json(const nlohmann::json& j);
void save_client_state(const ClientState& c, const std::string& path);
ClientState load_client_state(const std::string& path);

/// Appends `payload` to the queue with the next sequence number. SUBMIT
/// payloads are checked locally for completeness and correctness first;
/// throws Error(LocalQualityBlock) and leaves the state unchanged.
ChangeRecord enqueue_offline(ClientState& client, const Metadata& md, nlohmann::json payload);

/// Drops acknowledged records from the queue and records the answers.
void apply_acks(ClientState& client, const std::vector<Ack>& acks);

/// Folds pulled changes into the replica and advances the cursor.
void apply_pull(ClientState& client, const PullResult& pull);

}  // namespace spmdw
