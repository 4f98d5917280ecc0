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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "spmdw/aggregation.hpp"
#include "spmdw/analytics.hpp"
#include "spmdw/error.hpp"
#include "spmdw/flows.hpp"
#include "spmdw/seed.hpp"
#include "spmdw/simulator.hpp"
#include "spmdw/value_io.hpp"
#include "support.hpp"

using namespace spmdw;
namespace fs = std::filesystem;

namespace {

constexpr double kDecimalRelTol = 1e-9;
constexpr double kSigma = 3.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& fn) {
  auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  char t[32];
  std::snprintf(t, sizeof t, "%.1fs", secs);
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " (" << t << ")" << std::endl;
}

// Aggregation oracle -------------------------------------------------------

Outcome aggregation_oracle() {
  std::mt19937_64 rng(2024);
  const Status floors[] = {Status::Submitted, Status::Verified, Status::Validated, Status::Published};
  long cells = 0, mismatches = 0;
  double worst = 0;
  for (int fixture = 0; fixture < 200; ++fixture) {
    Metadata md = test::random_metadata(rng, 50);
    Period period = parse_period("2025-01");
    auto facts = test::random_facts(md, period, rng);
    Store store;
    test::put_values(store, facts);
    auto snap = store.snapshot();
    for (const auto& u : md.parts().org_units) {
      for (const auto& e : md.parts().elements) {
        Status floor = floors[rng() % 4];
        auto got = aggregate_up(md, *snap, e.id, period, u.id, floor);
        auto want = test::oracle_rollup(md, facts, e.id, period.key(), u.id, floor);
        ++cells;
        if (got.has_value() != want.has_value()) {
          ++mismatches;
          continue;
        }
        if (!got) continue;
        if (e.value_type == ValueType::Decimal || e.aggregation == Aggregation::Average) {
          double rel = std::abs(got->value - *want) / std::max(1.0, std::abs(*want));
          worst = std::max(worst, rel);
          if (rel > kDecimalRelTol) ++mismatches;
        } else if (got->value != *want) {
          ++mismatches;
        }
      }
    }
  }
  std::ostringstream d;
  d << "200 fixtures, " << cells << " cells, " << mismatches << " mismatches, max decimal rel err " << worst
    << " (integer exact, decimal tol " << kDecimalRelTol << ")";
  return {mismatches == 0, d.str()};
}

// Hierarchy consistency ----------------------------------------------------

Outcome hierarchy_consistency() {
  auto md = test::seeded();
  Store store;
  Workflow wf(md, store, flow_policy(FlowPolicyName::Phase2C));
  Period period = parse_period("2025-01");
  for (const auto& sub : generate_submissions(*md, period, 11)) {
    wf.submit_form(sub, md->user(seed_pic_id(sub.org_unit_id)), test::t0());
  }
  auto snap = store.snapshot();
  long checked = 0, violations = 0;
  for (const auto& e : md->parts().elements) {
    if (e.aggregation != Aggregation::Sum) continue;
    for (const auto& parent : md->parts().org_units) {
      std::vector<const OrgUnit*> children;
      for (const auto& c : md->parts().org_units) {
        if (c.parent_id && *c.parent_id == parent.id) children.push_back(&c);
      }
      if (children.empty()) continue;
      double sum = 0;
      bool full = true;
      for (const OrgUnit* c : children) {
        auto cell = aggregate_up(*md, *snap, e.id, period, c->id, Status::Submitted);
        if (!cell) {
          full = false;
          break;
        }
        sum += cell->value;
      }
      if (!full) continue;
      auto p = aggregate_up(*md, *snap, e.id, period, parent.id, Status::Submitted);
      ++checked;
      if (!p || p->value != sum) ++violations;
    }
  }
  std::ostringstream d;
  d << checked << " (SUM element, internal node) pairs on the seeded fixture, " << violations << " violations";
  return {checked > 0 && violations == 0, d.str()};
}

// Single-entry authority ---------------------------------------------------

Outcome single_entry_authority() {
  auto md = test::seeded();
  const std::string unit = "jkt-barat-grogol-1";
  long pairs = 0, bad_elements = 0;
  std::map<std::string, int> allows;
  for (const auto& e : md->parts().elements) allows[e.id] = 0;
  for (const auto& ds : md->parts().datasets) {
    for (const auto& prog : md->parts().programs) {
      Store store;
      Workflow wf(md, store, flow_policy(FlowPolicyName::Phase2C));
      FormSubmission f = test::sample_form(*md, ds.id, unit, "2025-01");
      f.program_id = prog.id;
      bool allowed = true;
      try {
        wf.submit_form(f, md->user(seed_pic_id(unit)), test::t0());
      } catch (const Error& err) {
        if (err.code() != ErrorCode::BlockedByQuality) throw;
        for (const auto& f : err.details()["findings"]) {
          if (f["code"] == "AUTHORITY") allowed = false;
        }
        if (allowed) throw;
      }
      for (const auto& el : ds.element_ids) {
        ++pairs;
        if (allowed) ++allows[el];
        bool owner = md->element(el).owner_program_id == prog.id;
        if (allowed != owner) ++bad_elements;
      }
    }
  }
  long not_one = 0;
  for (const auto& [el, n] : allows) not_one += n != 1;
  std::ostringstream d;
  d << pairs << " (element, program) pairs, " << not_one << " elements without exactly one allow, "
    << bad_elements << " non-owner allows or owner denials";
  return {not_one == 0 && bad_elements == 0, d.str()};
}

// 4C gates -----------------------------------------------------------------

/// Independent z-score: sample deviation over prior stored values.
bool oracle_deviates(double value, const std::vector<double>& history) {
  if (history.size() < 3) return false;
  double mean = 0;
  for (double h : history) mean += h;
  mean /= static_cast<double>(history.size());
  double ss = 0;
  for (double h : history) ss += (h - mean) * (h - mean);
  double s = std::sqrt(ss / static_cast<double>(history.size() - 1));
  return s > 0 && std::abs(value - mean) > kSigma * s;
}

Outcome quality_gates() {
  auto md = test::seeded();
  std::mt19937_64 rng(404);
  std::vector<std::string> units;
  for (const auto& u : md->parts().org_units) {
    if (u.level == OrgLevel::Subdistrict) units.push_back(u.id);
  }
  const char* months[] = {"2024-10", "2024-11", "2024-12", "2025-01", "2025-02", "2025-03"};

  Store store;
  Workflow wf(md, store, flow_policy(FlowPolicyName::Phase2C));
  long attempts = 0, induced = 0, stored_incomplete = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto& ds = md->parts().datasets[rng() % md->parts().datasets.size()];
    std::string unit = units[rng() % units.size()];
    std::string period = months[rng() % 6];
    FormSubmission f = test::sample_form(*md, ds.id, unit, period, rng());
    if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.3) {
      auto it = f.values.begin();
      std::advance(it, rng() % f.values.size());
      f.values.erase(it);
      ++induced;
    }
    ++attempts;
    try {
      wf.submit_form(f, md->user(seed_pic_id(unit)), test::t0());
    } catch (const Error&) {
    }
  }
  auto snap = store.snapshot();
  std::map<FormKey, int> present;
  for (const auto& [key, v] : snap->values) {
    present[{md->dataset_of(v.element_id)->id, v.org_unit_id, v.period.key()}]++;
  }
  for (const auto& [form, n] : present) {
    if (n != static_cast<int>(md->dataset(form.dataset_id).element_ids.size())) ++stored_incomplete;
  }

  // Deviation gate: stable histories, half of them ending in a spike, then
  // validation attempts with and without justifications.
  Store dev_store;
  Workflow dev(md, dev_store, flow_policy(FlowPolicyName::Phase2C));
  const User& dinkes = md->user("dinkes");
  for (size_t i = 0; i < units.size(); ++i) {
    const std::string& unit = units[i];
    const User& pic = md->user(seed_pic_id(unit));
    std::normal_distribution<double> noise(0, 2);
    for (int m = 0; m < 4; ++m) {
      FormSubmission f = test::sample_form(*md, "ds-anc", unit, months[m]);
      f.values["anc-served"] = std::round(100 + noise(rng));
      f.values["anc-target"] = std::round(400 + noise(rng));
      dev.submit_form(f, pic, test::t0());
    }
    FormSubmission last = test::sample_form(*md, "ds-anc", unit, "2025-02");
    last.values["anc-served"] = (i % 2) ? 300 : std::round(100 + noise(rng));
    last.values["anc-target"] = std::round(400 + noise(rng));
    dev.submit_form(last, pic, test::t0());
    FormKey key{"ds-anc", unit, "2025-02"};
    const User& city = md->user("sudinkes-" + md->tree().unit(*md->tree().unit(*md->tree().unit(unit).parent_id).parent_id).id);
    dev.review({key, ReviewAction::Verify, "", {}, std::nullopt}, city, test::t0());
    ReviewRequest validate{key, ReviewAction::Validate, "", {}, std::nullopt};
    if (rng() % 2) validate.justifications["anc-served"] = "outreach campaign";
    try {
      dev.review(validate, dinkes, test::t0());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnjustifiedDeviation) throw;
    }
  }
  auto ds = dev_store.snapshot();
  long validated_flagged = 0, unjustified = 0;
  for (const auto& [key, form] : ds->forms) {
    if (form.status != Status::Validated) continue;
    for (const auto& el : md->dataset(key.dataset_id).element_ids) {
      const DataValue* v = ds->find_value({el, key.period, key.org_unit_id});
      std::vector<double> history;
      for (const auto& [vk, hv] : ds->values) {
        if (vk.element_id != el || vk.org_unit_id != key.org_unit_id) continue;
        if (!(hv.period < v->period) || hv.status == Status::Rejected || hv.status == Status::Draft) continue;
        history.push_back(hv.value);
      }
      if (!oracle_deviates(v->value, history)) continue;
      ++validated_flagged;
      if (v->justification.empty()) ++unjustified;
    }
  }
  std::ostringstream d;
  d << attempts << " attempts (" << induced << " made incomplete), " << present.size() << " forms stored, "
    << stored_incomplete << " partial; " << validated_flagged << " validated out-of-deviation values (k="
    << kSigma << "), " << unjustified << " without justification";
  return {stored_incomplete == 0 && unjustified == 0 && validated_flagged > 0, d.str()};
}

// Workflow legality --------------------------------------------------------

Outcome workflow_legality() {
  const Status statuses[] = {Status::Draft,     Status::Submitted, Status::Verified,
                             Status::Validated, Status::Published, Status::Rejected};
  const Role roles[] = {Role::EnumeratorPic, Role::SubofficeManager, Role::DepartmentManager, Role::Admin};
  const ReviewAction actions[] = {ReviewAction::Verify, ReviewAction::Validate, ReviewAction::Reject,
                                  ReviewAction::Publish};
  const FlowPolicyName policies[] = {FlowPolicyName::CurrentA, FlowPolicyName::Phase1B, FlowPolicyName::Phase2C};
  long combos = 0, mismatches = 0;
  for (auto pname : policies) {
    auto md = test::seeded(test::entry_level_for(pname));
    FlowPolicy policy = flow_policy(pname);
    std::string unit = pname == FlowPolicyName::Phase1B ? "jkt-pusat" : "jkt-pusat-gambir-1";
    std::map<Role, std::string> actor{{Role::EnumeratorPic, seed_pic_id(unit)},
                                      {Role::SubofficeManager, "sudinkes-jkt-pusat"},
                                      {Role::DepartmentManager, "dinkes"},
                                      {Role::Admin, "admin"}};
    FormSubmission base = test::sample_form(*md, "ds-anc", unit, "2025-01");
    for (Status s : statuses) {
      for (Role r : roles) {
        auto legal = legal_transitions(s, r, policy);
        for (ReviewAction a : actions) {
          ++combos;
          Store store;
          store.write([&](Transaction& tx) {
            FormState f;
            f.key = {"ds-anc", unit, "2025-01"};
            f.status = s;
            f.version = 1;
            f.submitted_at = test::t0();
            f.entered_by = seed_pic_id(unit);
            tx.put_form(f);
            for (const auto& [el, v] : base.values) {
              tx.put_value({el, unit, parse_period("2025-01"), v, s, 1, seed_pic_id(unit), "", test::t0()});
            }
          });
          Workflow wf(md, store, policy);
          bool ok = true;
          try {
            wf.review({{"ds-anc", unit, "2025-01"}, a, "reason given", {}, std::nullopt}, md->user(actor[r]),
                      test::t0());
          } catch (const Error& e) {
            if (e.code() != ErrorCode::IllegalTransition && e.code() != ErrorCode::RoleDenied) {
              ++mismatches;
              continue;
            }
            ok = false;
          }
          if (ok != (legal.count(a) > 0)) ++mismatches;
        }
      }
    }
  }

  // Random action sequences on one form each.
  std::mt19937_64 rng(77);
  auto md = test::seeded();
  const std::string unit = "jkt-utara-koja-2";
  const std::vector<std::string> users = {seed_pic_id(unit), "sudinkes-jkt-utara", "dinkes", "admin"};
  long sequences = 0, actions_taken = 0, backward_without_reject = 0, broken_chain = 0;
  for (int seq = 0; seq < 10000; ++seq) {
    Store store;
    Workflow wf(md, store, flow_policy(FlowPolicyName::Phase2C));
    FormKey key{"ds-anc", unit, "2025-01"};
    FormSubmission f = test::sample_form(*md, "ds-anc", unit, "2025-01", seq);
    wf.submit_form(f, md->user(users[0]), test::t0());
    int len = std::uniform_int_distribution<int>(4, 14)(rng);
    for (int i = 0; i < len; ++i) {
      const User& who = md->user(users[rng() % users.size()]);
      int kind = static_cast<int>(rng() % 5);
      ++actions_taken;
      try {
        if (kind == 4) {
          wf.submit_form(f, who, test::t0());
        } else {
          ReviewRequest r{key, actions[kind], (rng() % 4) ? "needs another look" : "", {}, std::nullopt};
          wf.review(r, who, test::t0());
        }
      } catch (const Error&) {
      }
    }
    ++sequences;
    auto snap = store.snapshot();
    Status prev = Status::Draft;
    for (const auto& t : snap->transitions) {
      if (t.from != prev) ++broken_chain;
      if (test::oracle_rank(t.to) < test::oracle_rank(t.from) && t.action != "REJECT") ++backward_without_reject;
      prev = t.to;
    }
    if (snap->form_status(key) != prev) ++broken_chain;
  }
  std::ostringstream d;
  d << combos << " (status, role, policy, action) combinations, " << mismatches << " disagree with legal_transitions; "
    << sequences << " random sequences (" << actions_taken << " actions), " << backward_without_reject
    << " backward moves without REJECT, " << broken_chain << " log/status gaps";
  return {mismatches == 0 && backward_without_reject == 0 && broken_chain == 0, d.str()};
}

// Non-blocking flow --------------------------------------------------------

Outcome non_blocking_flow() {
  std::ostringstream d;
  bool pass = true;
  for (auto pname : {FlowPolicyName::Phase1B, FlowPolicyName::Phase2C}) {
    auto md = test::seeded(test::entry_level_for(pname));
    Store store;
    Workflow wf(md, store, flow_policy(pname));
    std::string unit = pname == FlowPolicyName::Phase1B ? "jkt-timur" : "jkt-timur-cakung-3";
    FormSubmission f = test::sample_form(*md, "ds-tb", unit, "2025-01");
    wf.submit_form(f, md->user(seed_pic_id(unit)), test::t0());
    AnalyticsQuery q;
    q.rows = QueryDimension::OrgUnit;
    q.columns = QueryDimension::Period;
    q.row_items = {"jkt"};
    q.column_items = {"2025-01"};
    q.filters[QueryDimension::Element] = "tb-served";
    q.min_status = Status::Submitted;
    auto table = run_analytics(*md, *store.snapshot(), q);
    auto reviews = store.snapshot()->transitions.size() - 1;
    bool seen = table.cells[0][0].value && *table.cells[0][0].value == f.values["tb-served"];
    pass = pass && seen && reviews == 0;
    d << to_string(pname) << " visible at province after " << reviews << " reviews: " << (seen ? "yes" : "no")
      << "; ";
  }
  auto rows = compare_flows(nlohmann::json::parse(test::read_text(test::fixture_path("flows/jakarta_two_cities.json"))));
  for (const auto& r : rows) {
    int expected = flow_policy(r.policy).blocking ? 3 : 0;
    pass = pass && r.blocking_hops == expected;
    d << to_string(r.policy) << " hops=" << r.blocking_hops << " ";
  }
  pass = pass && rows.size() == 3;
  return {pass, d.str()};
}

// Sync ---------------------------------------------------------------------

Outcome sync_no_loss() {
  auto md = test::seeded();
  auto policy = flow_policy(FlowPolicyName::Phase2C);
  long lost = 0, dups = 0, diverged = 0, records = 0, conflicts = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Schedule s = parse_schedule(random_schedule(*md, seed), *md);
    SimResult r = simulate(s, md, policy, seed);
    lost += r.metrics.lost_records;
    dups += r.metrics.duplicate_applies;
    records += r.metrics.records;
    conflicts += r.metrics.conflicts;
    std::vector<std::pair<ChangeRecord, std::string>> in_order;
    for (const auto& e : r.enqueued) in_order.emplace_back(e.record, e.user);
    auto oracle = test::replay_connected(md, policy, in_order, s.server_time);
    if (test::store_fingerprint(*oracle, *md) != test::store_fingerprint(*r.final_state, *md)) ++diverged;
  }
  std::ostringstream d;
  d << "100 schedules, " << records << " records: lost=" << lost << " duplicates-applied=" << dups
    << " conflicts=" << conflicts << ", " << diverged << " final stores differ from the connected replay";
  return {lost == 0 && dups == 0 && diverged == 0, d.str()};
}

// Round trip ---------------------------------------------------------------

struct Crash {};

Outcome round_trip() {
  auto md = test::seeded();
  Store source;
  Workflow wf(md, source, flow_policy(FlowPolicyName::Phase2C));
  for (const char* p : {"2024-12", "2025-01"}) {
    for (const auto& sub : generate_submissions(*md, parse_period(p), 5)) {
      wf.submit_form(sub, md->user(seed_pic_id(sub.org_unit_id)), test::t0());
    }
  }
  std::string first = export_values(*source.snapshot(), *md);
  Store copy;
  import_values(copy, *md, first, ImportMode::Strict);
  std::string second = export_values(*copy.snapshot(), *md);
  bool identical = first == second;
  std::size_t rows = std::count(first.begin(), first.end(), '\n') - 1;

  // Fault injection on a STRICT import of the first 200 rows.
  std::string head;
  {
    std::istringstream in(first);
    std::string line;
    for (int i = 0; i <= 200 && std::getline(in, line); ++i) head += line + "\n";
  }
  std::vector<std::pair<std::string, std::size_t>> points;
  for (std::size_t i = 0; i < 200; ++i) points.emplace_back("record", i);
  for (const char* s : {"commit", "log_torn", "publish"}) points.emplace_back(s, 0);
  long torn = 0;
  for (const auto& [stage, index] : points) {
    fs::path dir = fs::temp_directory_path() / ("spmdw-accept-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    {
      Store store(dir);
      store.set_fault_hook([&, st = stage, ix = index](std::string_view s, std::size_t i) {
        if (s == st && i == ix) throw Crash{};
      });
      try {
        import_values(store, *md, head, ImportMode::Strict);
      } catch (const Crash&) {
      }
      if (!store.snapshot()->values.empty()) ++torn;
    }
    Store reopened(dir);
    auto n = reopened.snapshot()->values.size();
    if (n != 0 && n != 200) ++torn;
    fs::remove_all(dir);
  }
  // A bad row in STRICT mode stores nothing.
  std::string bad = head;
  bad.replace(bad.rfind(",SUBMITTED,"), 11, ",FINISHED,");
  Store strict;
  bool aborted = false;
  try {
    import_values(strict, *md, bad, ImportMode::Strict);
  } catch (const Error& e) {
    aborted = e.code() == ErrorCode::ImportAborted;
  }
  aborted = aborted && strict.snapshot()->values.empty();

  std::ostringstream d;
  d << rows << " rows export/import/export " << (identical ? "byte-identical" : "DIFFERENT") << "; "
    << points.size() << " fault points, " << torn << " partial stores; bad-row STRICT abort "
    << (aborted ? "stored nothing" : "FAILED");
  return {identical && torn == 0 && aborted, d.str()};
}

// API contract -------------------------------------------------------------

Outcome api_contract() {
  auto golden = nlohmann::json::parse(test::read_text(std::string(SPMDW_GOLDEN_DIR) + "/api_error_contract.json"));
  long code_mismatch = 0;
  for (int i = 0; i <= static_cast<int>(ErrorCode::Internal); ++i) {
    auto c = static_cast<ErrorCode>(i);
    std::string name(error_code_name(c));
    if (!golden["codes"].contains(name) || golden["codes"][name] != http_status(c)) ++code_mismatch;
  }
  auto pairs = test::error_contract_pairs();
  nlohmann::json observed = nlohmann::json::object();
  std::size_t n_pairs = 0;
  for (const auto& [endpoint, codes] : pairs.codes) {
    observed[endpoint] = codes;
    n_pairs += codes.size();
  }
  bool pairs_match = observed == golden["pairs"];

  test::ServiceHarness h;
  test::populate_everywhere(h);
  std::vector<std::string> users = {"dinkes"};
  for (const auto& u : h.md->parts().users) {
    if (u.role == Role::SubofficeManager) users.push_back(u.id);
  }
  std::mt19937_64 rng(5);
  std::vector<std::string> pics;
  for (const auto& u : h.md->parts().users) {
    if (u.role == Role::EnumeratorPic) pics.push_back(u.id);
  }
  std::shuffle(pics.begin(), pics.end(), rng);
  for (std::size_t i = 0; i < 12 && i < pics.size(); ++i) users.push_back(pics[i]);
  auto leaks = test::scope_scan(h, users);

  std::ostringstream d;
  d << n_pairs << " (endpoint, error code) pairs " << (pairs_match ? "match" : "DIFFER FROM") << " the golden file, "
    << pairs.mismatched_status.size() << " status mismatches, " << code_mismatch << " code table mismatches; "
    << "scope scan over " << users.size() << " users found " << leaks.size() << " out-of-scope units";
  return {pairs_match && code_mismatch == 0 && pairs.mismatched_status.empty() && leaks.empty(), d.str()};
}

}  // namespace

int main() {
  report("aggregation-oracle", aggregation_oracle);
  report("hierarchy-consistency", hierarchy_consistency);
  report("single-entry-authority", single_entry_authority);
  report("4c-gates", quality_gates);
  report("workflow-legality", workflow_legality);
  report("non-blocking-flow", non_blocking_flow);
  report("sync-no-loss", sync_no_loss);
  report("round-trip", round_trip);
  report("api-contract", api_contract);
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << (9 - failures) << "/9" << std::endl;
  return failures ? 1 : 0;
}
