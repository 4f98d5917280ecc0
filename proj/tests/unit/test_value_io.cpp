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

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include <unistd.h>

#include "spmdw/csv.hpp"
#include "spmdw/digest.hpp"
#include "spmdw/error.hpp"
#include "spmdw/numeric.hpp"
#include "spmdw/value_io.hpp"
#include "support.hpp"

using namespace spmdw;
namespace fs = std::filesystem;

namespace {

struct Row {
  std::string element, unit, period, value, status = "SUBMITTED", version = "1",
                                             updated = "2025-02-03T08:00:00Z", by = "pic", just = "";
};

std::string csv_of(const std::vector<Row>& rows) {
  std::string out(kValueRowHeader);
  out += "\n";
  for (const auto& r : rows) {
    out += r.element + "," + r.unit + "," + r.period + "," + r.value + "," + r.status + "," +
           r.version + "," + r.updated + "," + r.by + "," + r.just + "\n";
  }
  return out;
}

/// 50 complete two-element forms: 100 rows.
std::vector<Row> hundred_rows(const Metadata& md) {
  std::vector<Row> rows;
  std::mt19937_64 rng(3);
  for (const OrgUnit* u : md.tree().preorder()) {
    if (u->level != OrgLevel::Subdistrict) continue;
    for (std::string code : {"anc", "tb"}) {
      if (rows.size() == 100) return rows;
      int target = std::uniform_int_distribution<int>(50, 500)(rng);
      int served = std::uniform_int_distribution<int>(0, target)(rng);
      rows.push_back({code + "-served", u->id, "2025-01", std::to_string(served)});
      rows.push_back({code + "-target", u->id, "2025-01", std::to_string(target)});
    }
  }
  return rows;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("spmdw-io-" + std::to_string(::getpid()) + "-" + std::to_string(++counter));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Crash {};

}  // namespace

TEST_CASE("STRICT import is all or nothing") {
  auto md = test::seeded();
  auto rows = hundred_rows(*md);
  REQUIRE(rows.size() == 100);
  rows[57].value = "-4";
  Store store;
  try {
    import_values(store, *md, csv_of(rows), ImportMode::Strict);
    FAIL("expected ImportAborted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ImportAborted);
    // The partner row of the bad one comes first.
    CHECK(e.details()["rejected"][0]["line"] == 58);
  }
  CHECK(store.snapshot()->values.empty());
  CHECK(store.snapshot()->snapshot_id == 0);
}

TEST_CASE("SKIP_BAD keeps the good forms") {
  auto md = test::seeded();
  auto rows = hundred_rows(*md);
  rows[57].value = "-4";
  rows[10].element = "no-such-element";
  Store store;
  auto report = import_values(store, *md, csv_of(rows), ImportMode::SkipBad);
  // A rejected row takes the other row of its form with it.
  CHECK(report.applied == 96);
  REQUIRE(report.rejected.size() == 4);
  CHECK(report.rejected[0].line == 12);
  CHECK(report.rejected[0].code == "UNKNOWN_ELEMENT");
  CHECK(report.rejected[1].line == 13);
  CHECK(report.rejected[1].code == "BLOCKED_BY_QUALITY");
  CHECK(store.snapshot()->values.size() == 96);
  CHECK(store.snapshot()->forms.size() == 48);
  CHECK(store.snapshot()->transitions.size() == 48);
}

TEST_CASE("row checks") {
  auto md = test::seeded();
  auto one_form = [&](Row a) {
    Row b{"anc-target", a.unit, a.period, "100", a.status};
    Store store;
    auto report = import_values(store, *md, csv_of({a, b}), ImportMode::SkipBad);
    return report.rejected.empty() ? std::string() : report.rejected.front().code;
  };
  CHECK(one_form({"anc-served", "jkt-pusat-gambir-1", "2025-01", "10"}).empty());
  CHECK(one_form({"anc-served", "nowhere-1", "2025-01", "10"}) == "UNKNOWN_UNIT");
  CHECK(one_form({"anc-served", "jkt-pusat-gambir", "2025-01", "10"}) == "WRONG_LEVEL");
  CHECK(one_form({"anc-served", "jkt-pusat-gambir-1", "2025-Q1", "10"}) == "PERIOD_TYPE_MISMATCH");
  CHECK(one_form({"anc-served", "jkt-pusat-gambir-1", "2025-13", "10"}) == "MALFORMED_PERIOD_KEY");
  CHECK(one_form({"anc-served", "jkt-pusat-gambir-1", "2025-01", "1.5"}) == "BLOCKED_BY_QUALITY");
  CHECK(one_form({"anc-served", "jkt-pusat-gambir-1", "2025-01", "ten"}) == "INVALID_ARGUMENT");
  CHECK(one_form({"anc-served", "jkt-pusat-gambir-1", "2025-01", "10", "DONE"}) == "INVALID_ARGUMENT");

  Store store;
  Row a{"anc-served", "jkt-pusat-gambir-1", "2025-01", "10"};
  auto dup = import_values(store, *md, csv_of({a, a}), ImportMode::SkipBad);
  CHECK(std::any_of(dup.rejected.begin(), dup.rejected.end(),
                    [](const RejectedRow& r) { return r.code == "DUPLICATE_ID" && r.line == 3; }));

  CHECK_THROWS_AS(import_values(store, *md, "a,b\n", ImportMode::SkipBad), Error);
  try {
    import_values(store, *md, csv_of({a}) + "x,y\n", ImportMode::SkipBad);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedFile);
  }
}

TEST_CASE("stale versions are refused") {
  auto md = test::seeded();
  Store store;
  std::vector<Row> v1{{"anc-served", "jkt-pusat-gambir-1", "2025-01", "10"},
                      {"anc-target", "jkt-pusat-gambir-1", "2025-01", "20"}};
  import_values(store, *md, csv_of(v1), ImportMode::Strict);
  auto again = import_values(store, *md, csv_of(v1), ImportMode::SkipBad);
  CHECK(again.applied == 0);
  for (auto& r : v1) r.version = "2";
  CHECK(import_values(store, *md, csv_of(v1), ImportMode::SkipBad).applied == 2);
  CHECK(store.snapshot()->form_version({"ds-anc", "jkt-pusat-gambir-1", "2025-01"}) == 2);
}

TEST_CASE("export then import reproduces the store") {
  auto md = test::seeded();
  auto rows = hundred_rows(*md);
  std::mt19937_64 rng(9);
  const char* statuses[] = {"SUBMITTED", "VERIFIED", "VALIDATED", "PUBLISHED"};
  for (size_t i = 0; i < rows.size(); i += 2) {
    rows[i].status = rows[i + 1].status = statuses[rng() % 4];
    rows[i].just = "\"ok, \"\"quoted\"\"\"";
  }
  Store a;
  import_values(a, *md, csv_of(rows), ImportMode::Strict);
  std::string exported = export_values(*a.snapshot(), *md);
  Store b;
  import_values(b, *md, exported, ImportMode::Strict);
  CHECK(export_values(*b.snapshot(), *md) == exported);
  CHECK(a.snapshot()->values == b.snapshot()->values);
  CHECK(parse_csv(exported).size() == 101);
}

TEST_CASE("export filters") {
  auto md = test::seeded();
  Store store;
  auto rows = hundred_rows(*md);
  for (size_t i = 0; i < 20; ++i) rows[i].status = "VALIDATED";
  import_values(store, *md, csv_of(rows), ImportMode::Strict);
  ExportFilter f;
  f.min_status = Status::Validated;
  CHECK(parse_csv(export_values(*store.snapshot(), *md, f)).size() == 21);
  f = {};
  f.org_unit_id = "jkt-pusat-gambir";
  auto recs = parse_csv(export_values(*store.snapshot(), *md, f));
  for (size_t i = 1; i < recs.size(); ++i) CHECK(test::oracle_under(*md, recs[i].fields[1], "jkt-pusat-gambir"));
  f = {};
  f.from = parse_period("2025-02");
  CHECK(parse_csv(export_values(*store.snapshot(), *md, f)).size() == 1);
  f = {};
  f.org_unit_id = "atlantis";
  CHECK_THROWS_AS(export_values(*store.snapshot(), *md, f), Error);
}

TEST_CASE("a crash at every import boundary leaves all or nothing") {
  auto md = test::seeded();
  auto rows = hundred_rows(*md);
  std::string csv = csv_of(rows);
  std::vector<std::pair<std::string, std::size_t>> points;
  for (std::size_t i = 0; i < rows.size(); ++i) points.emplace_back("record", i);
  for (const char* s : {"commit", "log_torn", "publish"}) points.emplace_back(s, 0);
  for (const auto& [stage, index] : points) {
    CAPTURE(stage);
    CAPTURE(index);
    TempDir dir;
    {
      Store store(dir.path);
      store.set_fault_hook([&, stage = stage, index = index](std::string_view s, std::size_t i) {
        if (s == stage && i == index) throw Crash{};
      });
      CHECK_THROWS_AS(import_values(store, *md, csv, ImportMode::Strict), Crash);
      CHECK(store.snapshot()->values.empty());
    }
    Store reopened(dir.path);
    std::size_t n = reopened.snapshot()->values.size();
    CHECK(n == (stage == "publish" ? 100u : 0u));
  }
}

TEST_CASE("ministry export matches an independent rollup") {
  auto md = test::seeded();
  std::mt19937_64 rng(21);
  std::vector<DataValue> facts = test::random_facts(*md, parse_period("2025-01"), rng);
  Store store;
  test::put_values(store, facts);
  auto out = ministry_bridge_export(*store.snapshot(), *md, parse_period("2025-01"));

  std::map<std::pair<std::string, std::string>, double> expected;
  for (const auto& ind : md->parts().indicators) {
    for (const auto& u : md->parts().org_units) {
      if (u.level != OrgLevel::AdminCity) continue;
      auto num = test::oracle_rollup(*md, facts, ind.numerator_element_id, "2025-01", u.id, Status::Validated);
      auto den = test::oracle_rollup(*md, facts, ind.denominator_element_id, "2025-01", u.id, Status::Validated);
      if (!num || !den || *den == 0) continue;
      expected[{ind.id, u.id}] = *num / *den * ind.factor;
    }
  }
  auto recs = parse_csv(out.records_csv);
  REQUIRE(!recs.empty());
  CHECK(recs.size() - 1 == expected.size());
  CHECK(out.record_count == expected.size());
  for (size_t i = 1; i < recs.size(); ++i) {
    const auto& f = recs[i].fields;
    auto it = expected.find({f[1], f[3]});
    REQUIRE(it != expected.end());
    CHECK(*parse_number(f[6]) == doctest::Approx(it->second).epsilon(1e-9));
  }
  auto manifest = parse_csv(out.manifest_csv);
  REQUIRE(manifest.size() == 2);
  CHECK(manifest[1].fields[1] == std::to_string(expected.size()));
  CHECK(manifest[1].fields[2] == sha256_hex(out.records_csv));
}

TEST_CASE("audit of bundled files") {
  auto md = metadata_from_json(nlohmann::json::parse(test::read_text(test::fixture_path("validate/metadata.json"))));
  CHECK(audit_values(md, test::read_text(test::fixture_path("validate/clean.csv"))).empty());
  auto f = audit_values(md, test::read_text(test::fixture_path("validate/percent_150.csv")));
  REQUIRE(f.size() == 1);
  CHECK(f[0].code == "RANGE");
  CHECK(f[0].severity == Severity::Block);
  try {
    audit_values(md, test::read_text(test::fixture_path("validate/no_header.csv")));
    FAIL("expected MalformedFile");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedFile);
  }
}

TEST_CASE("audit finds incompleteness and unknown ids") {
  auto md = test::seeded();
  std::vector<Row> rows{{"anc-served", "jkt-pusat-gambir-1", "2025-01", "10"},
                        {"ghost", "jkt-pusat-gambir-1", "2025-01", "10"}};
  auto f = audit_values(*md, csv_of(rows));
  std::set<std::string> codes;
  for (const auto& x : f) codes.insert(x.code);
  CHECK(codes.count("UNKNOWN_ELEMENT"));
  CHECK(codes.count("INCOMPLETE"));
}
