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

#include <memory>

#include "bench_fixture.hpp"
#include "spmdw/seed.hpp"
#include "spmdw/value_io.hpp"
#include "spmdw/workflow.hpp"

using namespace spmdw;

// Each iteration submits one form with three months of history behind it.
static void BM_SubmitForm(benchmark::State& state) {
  const auto& l = bench::loaded();
  const std::vector<FormSubmission> forms =
      generate_submissions(*l.md, parse_period("2025-02"), 99);
  const std::string history = export_values(*l.store->snapshot(), *l.md);
  std::unique_ptr<Store> store;
  std::unique_ptr<Workflow> wf;
  std::size_t i = forms.size();
  for (auto _ : state) {
    if (i == forms.size()) {
      state.PauseTiming();
      wf.reset();
      store = std::make_unique<Store>();
      import_values(*store, *l.md, history, ImportMode::Strict);
      wf = std::make_unique<Workflow>(l.md, *store, flow_policy(FlowPolicyName::Phase2C));
      i = 0;
      state.ResumeTiming();
    }
    const auto& f = forms[i++];
    auto r = wf->submit_form(f, l.md->user(seed_pic_id(f.org_unit_id)), bench::bench_time());
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_SubmitForm)->Iterations(500);

static void BM_ExportValues(benchmark::State& state) {
  const auto& l = bench::loaded();
  auto snap = l.store->snapshot();
  for (auto _ : state) {
    auto csv = export_values(*snap, *l.md);
    benchmark::DoNotOptimize(csv);
  }
}
BENCHMARK(BM_ExportValues);
