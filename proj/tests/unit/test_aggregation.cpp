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

#include <cmath>
#include <random>

#include "spmdw/aggregation.hpp"
#include "spmdw/error.hpp"
#include "support.hpp"

using namespace spmdw;

namespace {

constexpr Status kFloors[] = {Status::Submitted, Status::Verified, Status::Validated, Status::Published};

DataValue fact(const std::string& el, const std::string& unit, const std::string& period, double v,
               Status s = Status::Submitted) {
  DataValue d;
  d.element_id = el;
  d.org_unit_id = unit;
  d.period = parse_period(period);
  d.value = v;
  d.status = s;
  d.version = 1;
  return d;
}

bool close(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(b)); }

}  // namespace

TEST_CASE("aggregate_up sums two subdistricts") {
  auto md = test::seeded();
  Store store;
  test::put_values(store, {fact("anc-served", "jkt-pusat-gambir-1", "2025-01", 3),
                           fact("anc-served", "jkt-pusat-gambir-2", "2025-01", 4)});
  auto snap = store.snapshot();
  auto cell = aggregate_up(*md, *snap, "anc-served", parse_period("2025-01"), "jkt-pusat-gambir",
                           Status::Submitted);
  REQUIRE(cell);
  CHECK(cell->value == 7);
  CHECK(cell->provenance == 2);
  CHECK(cell->status_floor == Status::Submitted);
  CHECK_FALSE(aggregate_up(*md, *snap, "anc-served", parse_period("2025-01"), "jkt-pusat-gambir",
                           Status::Verified));
  CHECK_THROWS_AS(aggregate_up(*md, *snap, "anc-served", parse_period("2025-01"), "nowhere",
                               Status::Submitted),
                  Error);
  CHECK_THROWS_AS(aggregate_up(*md, *snap, "ghost", parse_period("2025-01"), "jkt", Status::Submitted),
                  Error);
}

TEST_CASE("aggregate_period over a quarter") {
  auto md = test::seeded();
  Store store;
  test::put_values(store, {fact("anc-served", "jkt-pusat-gambir-1", "2025-01", 10),
                           fact("anc-served", "jkt-pusat-gambir-1", "2025-02", 12),
                           fact("anc-served", "jkt-pusat-gambir-1", "2025-03", 14),
                           fact("hypertension-mean-sbp", "jkt-pusat-gambir-1", "2025-01", 10),
                           fact("hypertension-mean-sbp", "jkt-pusat-gambir-1", "2025-02", 12),
                           fact("hypertension-mean-sbp", "jkt-pusat-gambir-1", "2025-03", 14)});
  auto snap = store.snapshot();
  auto q1 = parse_period("2025-Q1");
  CHECK(aggregate_period(*md, *snap, "anc-served", "jkt-pusat-gambir-1", q1, Status::Submitted)->value == 36);
  CHECK(aggregate_period(*md, *snap, "hypertension-mean-sbp", "jkt-pusat-gambir-1", q1, Status::Submitted)
            ->value == 12);
  CHECK_FALSE(aggregate_period(*md, *snap, "anc-served", "jkt-pusat-gambir-1", parse_period("2025-Q2"),
                               Status::Submitted));
  CHECK_THROWS_AS(aggregate_period(*md, *snap, "anc-served", "jkt-pusat-gambir-1",
                                   parse_period("2025-01"), Status::Submitted),
                  Error);
}

TEST_CASE("compute_indicator arithmetic and errors") {
  auto md = test::seeded();
  Store store;
  test::put_values(store, {fact("anc-served", "jkt-pusat-gambir-1", "2025-01", 80),
                           fact("anc-target", "jkt-pusat-gambir-1", "2025-01", 100),
                           fact("tb-served", "jkt-pusat-gambir-1", "2025-01", 5),
                           fact("tb-target", "jkt-pusat-gambir-1", "2025-01", 0),
                           fact("hiv-served", "jkt-pusat-gambir-1", "2025-01", 5)});
  auto snap = store.snapshot();
  Period jan = parse_period("2025-01");
  auto v = compute_indicator(*md, *snap, "ind-anc", "jkt-pusat-gambir-1", jan, Status::Submitted);
  CHECK(v.value == 80.0);
  CHECK(v.numerator.provenance == 1);
  auto code = [&](const char* ind) {
    try {
      compute_indicator(*md, *snap, ind, "jkt-pusat-gambir-1", jan, Status::Submitted);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  CHECK(code("ind-tb") == ErrorCode::ZeroDenominator);
  CHECK(code("ind-hiv") == ErrorCode::MissingDenominator);
  CHECK(code("ind-elderly") == ErrorCode::MissingNumerator);
  CHECK(code("ind-none") == ErrorCode::UnknownIndicator);
}

TEST_CASE("property: aggregate_up equals the leaf-walking oracle on random trees") {
  Period jan = parse_period("2025-01");
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    std::mt19937_64 rng(seed);
    Metadata md = test::random_metadata(rng, 50);
    auto facts = test::random_facts(md, jan, rng);
    Store store;
    test::put_values(store, facts);
    auto snap = store.snapshot();
    for (const auto& u : md.parts().org_units) {
      for (const char* el : {"count", "mean"}) {
        for (Status floor : kFloors) {
          auto got = aggregate_up(md, *snap, el, jan, u.id, floor);
          auto want = test::oracle_rollup(md, facts, el, "2025-01", u.id, floor);
          REQUIRE(got.has_value() == want.has_value());
          if (got) CHECK(close(got->value, *want));
        }
      }
    }
  }
}

TEST_CASE("property: SUM parent equals the sum of fully reported children") {
  Period jan = parse_period("2025-01");
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    std::mt19937_64 rng(seed);
    Metadata md = test::random_metadata(rng, 50);
    auto facts = test::random_facts(md, jan, rng);
    Store store;
    test::put_values(store, facts);
    auto snap = store.snapshot();
    for (const auto* u : md.tree().preorder()) {
      auto kids = md.tree().children(u->id);
      if (kids.empty()) continue;
      double sum = 0;
      bool all = true;
      for (const auto* k : kids) {
        auto c = aggregate_up(md, *snap, "count", jan, k->id, Status::Submitted);
        if (!c) {
          all = false;
          break;
        }
        sum += c->value;
      }
      if (!all) continue;
      auto parent = aggregate_up(md, *snap, "count", jan, u->id, Status::Submitted);
      REQUIRE(parent);
      CHECK(parent->value == sum);
    }
  }
}

TEST_CASE("property: raising min_status never increases provenance") {
  Period jan = parse_period("2025-01");
  std::mt19937_64 rng(77);
  Metadata md = test::random_metadata(rng, 50);
  auto facts = test::random_facts(md, jan, rng);
  Store store;
  test::put_values(store, facts);
  auto snap = store.snapshot();
  for (const auto& u : md.parts().org_units) {
    std::int64_t prev = INT64_MAX;
    for (Status floor : kFloors) {
      auto c = aggregate_up(md, *snap, "count", jan, u.id, floor);
      std::int64_t p = c ? c->provenance : 0;
      CHECK(p <= prev);
      prev = p;
    }
  }
}

TEST_CASE("property: coverage stays within the factor when every leaf satisfies served <= target") {
  Period jan = parse_period("2025-01");
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    Metadata md = test::random_metadata(rng, 40);
    std::vector<DataValue> facts;
    for (const auto* u : md.tree().subtree_at_level(md.tree().root().id, OrgLevel::Subdistrict)) {
      int target = std::uniform_int_distribution<int>(1, 500)(rng);
      int served = std::uniform_int_distribution<int>(0, target)(rng);
      facts.push_back(fact("target", u->id, "2025-01", target));
      facts.push_back(fact("count", u->id, "2025-01", served));
    }
    Store store;
    test::put_values(store, facts);
    auto snap = store.snapshot();
    for (const auto& u : md.parts().org_units) {
      auto v = compute_indicator(md, *snap, "ind", u.id, jan, Status::Submitted);
      CHECK(v.value <= 100.0);
      double num = *test::oracle_rollup(md, facts, "count", "2025-01", u.id, Status::Submitted);
      double den = *test::oracle_rollup(md, facts, "target", "2025-01", u.id, Status::Submitted);
      CHECK(close(v.value, 100.0 * num / den));
    }
  }
}
