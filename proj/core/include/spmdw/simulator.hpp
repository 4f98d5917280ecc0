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
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spmdw/sync.hpp"

namespace spmdw {

/// Schedule document:
///   {"server_time": "2025-02-05T00:00:00Z",
///    "network": {"drop_rate": 0.3, "duplicate_rate": 0.1,
///                "reorder_rate": 0.1, "max_delay": 3},
///    "clients": [{"id": "c1", "user": "<user id>"}],
///    "events": [{"time": 0, "client": "c1", "action": "disconnect"},
///               {"time": 1, "client": "c1", "action": "submit",
///                "dataset_id": "...", "period": "2025-01",
///                "org_unit_id": "...", "values": {...}},
///               {"time": 2, "client": "c1", "action": "review",
///                "review": {...}},
///               {"time": 9, "client": "c1", "action": "reconnect"}]}
/// A submit without values gets a generated complete form; org_unit_id
/// defaults to the user's first scoped unit. Times are logical ticks.
struct NetworkModel {
  double drop_rate = 0;       // request or response lost
  double duplicate_rate = 0;  // request delivered twice
  double reorder_rate = 0;    // request held back and delivered later
  int max_delay = 3;
};

struct ScheduleClient {
  std::string id;
  std::string user;
};

struct ScheduleEvent {
  int time = 0;
  std::string client;
  std::string action;  // disconnect, reconnect, submit, review
  nlohmann::json body;
};

struct Schedule {
  Timestamp server_time{};
  NetworkModel network;
  std::vector<ScheduleClient> clients;
  std::vector<ScheduleEvent> events;  // sorted by time, stable
};

/// Throws Error(MalformedSchedule).
Schedule parse_schedule(const nlohmann::json& doc, const Metadata& md);
Schedule load_schedule_file(const std::string& path, const Metadata& md);
nlohmann::json to_json(const Schedule& s);

struct SimMetrics {
  std::int64_t records = 0;            // enqueued
  std::int64_t local_blocks = 0;       // refused by client pre-validation
  std::int64_t lost_records = 0;       // enqueued but never answered by the server
  std::int64_t duplicate_applies = 0;  // change-log entries beyond the first per record
  std::int64_t conflicts = 0;
  std::int64_t rejected = 0;
  int convergence_round = -1;          // tick of quiescence, -1 if never
  bool converged = false;              // replicas equal the server's scoped data
};

std::string format_metrics(const SimMetrics& m);

/// A record as the client produced it, with the pushing user.
struct EnqueuedRecord {
  ChangeRecord record;
  std::string user;
};

struct SimResult {
  SimMetrics metrics;
  std::shared_ptr<const StoreState> final_state;
  std::vector<EnqueuedRecord> enqueued;  // enqueue order
  std::vector<EnqueuedRecord> receipts;  // first server receipt order
  std::vector<ClientState> clients;
};

/// Runs the schedule against an in-memory server under `policy`.
/// Deterministic in `seed`.
SimResult simulate(const Schedule& schedule, std::shared_ptr<const Metadata> md,
                   FlowPolicy policy, std::uint64_t seed, int max_ticks = 100000);

struct RandomScheduleOptions {
  int min_clients = 2;
  int max_clients = 6;
  int max_forms_per_client = 6;
  int horizon = 60;
};

/// Partitions, duplicates and reorders over enumerators with disjoint
/// units, including resubmissions of the same form.
nlohmann::json random_schedule(const Metadata& md, std::uint64_t seed,
                               const RandomScheduleOptions& options = {});

}  // namespace spmdw
