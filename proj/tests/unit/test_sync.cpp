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

#include <doctest.h>

#include <filesystem>

#include "spmdw/error.hpp"
#include "spmdw/seed.hpp"
#include "spmdw/sync.hpp"
#include "support.hpp"

using namespace spmdw;
using nlohmann::json;

namespace {

const std::string kUnit = "jkt-pusat-gambir-1";
const std::string kPic = "pic-jkt-pusat-gambir-1";

struct Fixture {
  std::shared_ptr<const Metadata> md = test::seeded();
  Store store;
  Workflow wf{md, store, flow_policy(FlowPolicyName::Phase2C)};
  SyncServer server{wf};

  const User& user(const std::string& id) { return md->user(id); }

  json form(const std::string& ds, double served, double target, const std::string& period = "2025-01") {
    std::string code = ds.substr(3);
    FormSubmission s{ds, kUnit, period, "p-" + code, {{code + "-served", served}, {code + "-target", target}}, {}};
    return submit_payload(s);
  }
};

ChangeRecord record(const std::string& client, std::int64_t seq, json payload, std::int64_t base = 0) {
  return {client, seq, std::move(payload), base};
}

template <typename F>
ErrorCode code_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

}  // namespace

TEST_CASE("retried batch is acknowledged as duplicates and changes nothing") {
  Fixture f;
  std::vector<ChangeRecord> batch = {record("tab", 1, f.form("ds-anc", 1, 2)),
                                     record("tab", 2, f.form("ds-tb", 3, 4)),
                                     record("tab", 3, f.form("ds-hiv", 5, 6))};
  auto first = f.server.push(batch, f.user(kPic), test::t0());
  REQUIRE(first.size() == 3);
  for (const auto& a : first) CHECK(a.status == AckStatus::Applied);
  auto before = state_to_json(*f.store.snapshot());
  auto second = f.server.push(batch, f.user(kPic), test::t0());
  for (const auto& a : second) {
    CHECK(a.status == AckStatus::Duplicate);
    CHECK(a.original == AckStatus::Applied);
  }
  CHECK(state_to_json(*f.store.snapshot()) == before);
}

TEST_CASE("stale base version raises a conflict ticket and keeps the server value") {
  Fixture f;
  f.server.push({record("a", 1, f.form("ds-anc", 70, 100))}, f.user(kPic), test::t0());
  auto acks = f.server.push({record("b", 1, f.form("ds-anc", 75, 100), 0)}, f.user(kPic), test::t0());
  REQUIRE(acks.size() == 1);
  CHECK(acks[0].status == AckStatus::Conflict);
  CHECK_FALSE(acks[0].ticket_id.empty());
  auto snap = f.store.snapshot();
  CHECK(snap->find_value({"anc-served", "2025-01", kUnit})->value == 70);
  REQUIRE(snap->tickets.size() == 1);
  CHECK(snap->tickets.begin()->second.resolution == Resolution::Pending);
}

TEST_CASE("conflict resolution") {
  Fixture f;
  f.server.push({record("a", 1, f.form("ds-anc", 70, 100))}, f.user(kPic), test::t0());
  auto c1 = f.server.push({record("b", 1, f.form("ds-anc", 75, 100))}, f.user(kPic), test::t0());
  auto c2 = f.server.push({record("b", 2, f.form("ds-anc", 76, 100))}, f.user(kPic), test::t0());
  std::string t1 = c1[0].ticket_id, t2 = c2[0].ticket_id;
  REQUIRE(c2[0].status == AckStatus::Conflict);

  CHECK(code_of([&] { f.server.resolve_conflict(t1, Resolution::ClientWins, f.user(kPic), test::t0()); }) ==
        ErrorCode::RoleDenied);
  CHECK(code_of([&] {
          f.server.resolve_conflict(t1, Resolution::ClientWins, f.user("sudinkes-jkt-barat"), test::t0());
        }) == ErrorCode::ScopeDenied);
  CHECK(code_of([&] { f.server.resolve_conflict("nope", Resolution::ClientWins, f.user("dinkes"), test::t0()); }) ==
        ErrorCode::UnknownTicket);

  std::int64_t v_before = f.store.snapshot()->form_version({"ds-anc", kUnit, "2025-01"});
  f.server.resolve_conflict(t1, Resolution::ClientWins, f.user("sudinkes-jkt-pusat"), test::t0());
  auto snap = f.store.snapshot();
  CHECK(snap->find_value({"anc-served", "2025-01", kUnit})->value == 75);
  CHECK(snap->form_version({"ds-anc", kUnit, "2025-01"}) > v_before);
  CHECK(snap->tickets.at(t1).resolution == Resolution::ClientWins);
  CHECK(code_of([&] { f.server.resolve_conflict(t1, Resolution::ServerWins, f.user("dinkes"), test::t0()); }) ==
        ErrorCode::AlreadyResolved);

  f.server.resolve_conflict(t2, Resolution::ServerWins, f.user("dinkes"), test::t0());
  snap = f.store.snapshot();
  CHECK(snap->find_value({"anc-served", "2025-01", kUnit})->value == 75);
  CHECK(snap->tickets.at(t2).resolution == Resolution::ServerWins);
  CHECK(f.server.tickets(f.user("dinkes"), true).empty());
  CHECK(f.server.tickets(f.user("dinkes"), false).size() == 2);
  CHECK(f.server.tickets(f.user("sudinkes-jkt-barat"), false).empty());
}

TEST_CASE("pull: full list from zero, repeatable, cursor ahead, scope filtered") {
  Fixture f;
  f.server.push({record("a", 1, f.form("ds-anc", 1, 2)), record("a", 2, f.form("ds-tb", 1, 2))}, f.user(kPic),
                test::t0());
  FormSubmission elsewhere{"ds-anc", "jkt-timur-cakung-1", "2025-01", "p-anc", {{"anc-served", 1}, {"anc-target", 2}}, {}};
  f.wf.submit_form(elsewhere, f.user("pic-jkt-timur-cakung-1"), test::t0());

  auto all = f.server.pull(0, f.user("dinkes"));
  CHECK(all.changes.size() == 3);
  CHECK(all.cursor == 3);
  CHECK(to_json(f.server.pull(0, f.user("dinkes"))) == to_json(all));
  auto mine = f.server.pull(0, f.user(kPic));
  CHECK(mine.changes.size() == 2);
  CHECK(f.server.pull(2, f.user("dinkes")).changes.size() == 1);
  try {
    f.server.pull(9, f.user("dinkes"));
    FAIL("expected CursorAhead");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CursorAhead);
    CHECK(e.details()["server_seq"] == 3);
  }
}

TEST_CASE("sequence gaps and rejected writes") {
  Fixture f;
  CHECK(code_of([&] { f.server.push({record("a", 2, f.form("ds-anc", 1, 2))}, f.user(kPic), test::t0()); }) ==
        ErrorCode::MalformedRecord);
  CHECK(code_of([&] {
          f.server.push({record("a", 1, f.form("ds-anc", 1, 2)), record("a", 3, f.form("ds-tb", 1, 2))},
                        f.user(kPic), test::t0());
        }) == ErrorCode::MalformedRecord);
  CHECK(f.store.snapshot()->values.empty());

  json bad = f.form("ds-anc", 1, 2);
  bad["form"]["org_unit_id"] = "jkt-pusat-gambir-2";
  auto acks = f.server.push({record("a", 1, bad)}, f.user(kPic), test::t0());
  CHECK(acks[0].status == AckStatus::Rejected);
  CHECK(acks[0].error_code == "SCOPE_DENIED");
  auto again = f.server.push({record("a", 1, bad)}, f.user(kPic), test::t0());
  CHECK(again[0].status == AckStatus::Duplicate);
  CHECK(again[0].original == AckStatus::Rejected);
}

TEST_CASE("wire framing round-trips and rejects damage") {
  Fixture f;
  std::vector<ChangeRecord> recs = {record("x", 1, f.form("ds-anc", 1, 2), 0),
                                    record("x", 2, review_payload({{"ds-anc", kUnit, "2025-01"},
                                                                   ReviewAction::Reject, "why", {}, 3}),
                                           4)};
  std::string wire = encode_records(recs);
  CHECK(decode_records(wire) == recs);
  CHECK(decode_records("").empty());
  CHECK(code_of([&] { decode_records(wire.substr(0, wire.size() - 5)); }) == ErrorCode::MalformedRecord);
  CHECK(code_of([&] { decode_records("abc\n{}\n"); }) == ErrorCode::MalformedRecord);
  CHECK(code_of([&] { decode_records("2\n{x\n"); }) == ErrorCode::MalformedRecord);
}

TEST_CASE("client pre-validation keeps doomed forms out of the queue") {
  Fixture f;
  ClientState c;
  c.client_id = "tab";
  c.user_id = kPic;
  json incomplete = f.form("ds-anc", 1, 2);
  incomplete["form"]["values"].erase(1);
  CHECK(code_of([&] { enqueue_offline(c, *f.md, incomplete); }) == ErrorCode::LocalQualityBlock);
  json out_of_range = f.form("ds-anc", 1.5, 2);
  CHECK(code_of([&] { enqueue_offline(c, *f.md, out_of_range); }) == ErrorCode::LocalQualityBlock);
  CHECK(c.queue.empty());
  CHECK(c.next_seq == 1);

  auto r1 = enqueue_offline(c, *f.md, f.form("ds-anc", 1, 2));
  auto r2 = enqueue_offline(c, *f.md, f.form("ds-anc", 2, 3));
  CHECK(r1.client_seq == 1);
  CHECK(r2.client_seq == 2);
  CHECK(r2.base_version == 1);

  auto acks = f.server.push(c.queue, f.user(kPic), test::t0());
  apply_acks(c, acks);
  CHECK(c.queue.empty());
  apply_pull(c, f.server.pull(c.cursor, f.user(kPic)));
  CHECK(c.replica.at({"anc-served", "2025-01", kUnit}).value == 2);
  CHECK(c.cursor == 2);
}

TEST_CASE("client state persists across restarts") {
  Fixture f;
  ClientState c;
  c.client_id = "tab";
  c.user_id = kPic;
  enqueue_offline(c, *f.md, f.form("ds-anc", 1, 2));
  auto path = (std::filesystem::temp_directory_path() / "spmdw-client-state.json").string();
  save_client_state(c, path);
  ClientState back = load_client_state(path);
  CHECK(to_json(back) == to_json(c));
  std::filesystem::remove(path);
}
