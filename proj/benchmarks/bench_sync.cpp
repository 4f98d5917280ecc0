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
#include "spmdw/seed.hpp"
#include "spmdw/simulator.hpp"
#include "spmdw/sync.hpp"

using namespace spmdw;

static void BM_WireRoundTrip(benchmark::State& state) {
  const auto& l = bench::loaded();
  std::vector<ChangeRecord> records;
  std::int64_t seq = 1;
  for (const auto& f : generate_submissions(*l.md, parse_period("2025-02"), 3)) {
    records.push_back({"tablet", seq++, submit_payload(f), 0});
    if (records.size() == static_cast<std::size_t>(state.range(0))) break;
  }
  for (auto _ : state) {
    auto back = decode_records(encode_records(records));
    benchmark::DoNotOptimize(back);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records.size()));
}
BENCHMARK(BM_WireRoundTrip)->Arg(16)->Arg(256);

static void BM_SimulateRandomSchedule(benchmark::State& state) {
  const auto& l = bench::loaded();
  Schedule s = parse_schedule(random_schedule(*l.md, 42), *l.md);
  auto policy = flow_policy(FlowPolicyName::Phase2C);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    auto r = simulate(s, l.md, policy, seed++);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_SimulateRandomSchedule);
