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

#include <benchmark/benchmark.h>

#include "bench_fixture.hpp"
#include "spmdw/aggregation.hpp"
#include "spmdw/analytics.hpp"

using namespace spmdw;

static void BM_AggregateUpProvince(benchmark::State& state) {
  const auto& l = bench::loaded();
  auto snap = l.store->snapshot();
  Period p = parse_period("2025-01");
  for (auto _ : state) {
    auto cell = aggregate_up(*l.md, *snap, "anc-served", p, "jkt", Status::Submitted);
    benchmark::DoNotOptimize(cell);
  }
}
BENCHMARK(BM_AggregateUpProvince);

static void BM_QuarterIndicator(benchmark::State& state) {
  const auto& l = bench::loaded();
  auto snap = l.store->snapshot();
  Period q = parse_period("2024-Q4");
  for (auto _ : state) {
    auto cell = aggregate_cell(*l.md, *snap, "tb-served", "jkt-barat", q, Status::Submitted);
    benchmark::DoNotOptimize(cell);
  }
}
BENCHMARK(BM_QuarterIndicator);

static void BM_AnalyticsCityGrid(benchmark::State& state) {
  const auto& l = bench::loaded();
  auto snap = l.store->snapshot();
  AnalyticsQuery q;
  q.rows = QueryDimension::OrgUnit;
  q.columns = QueryDimension::Period;
  q.row_items = {"jkt"};
  q.expand_children = true;
  q.column_items = {"2024-11", "2024-12", "2025-01"};
  q.filters[QueryDimension::Indicator] = "ind-anc";
  q.min_status = Status::Submitted;
  for (auto _ : state) {
    auto table = run_analytics(*l.md, *snap, q);
    benchmark::DoNotOptimize(table);
  }
}
BENCHMARK(BM_AnalyticsCityGrid);
