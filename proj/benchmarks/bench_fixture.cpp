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

#include "bench_fixture.hpp"

#include "spmdw/seed.hpp"
#include "spmdw/workflow.hpp"

namespace spmdw::bench {

Timestamp bench_time() { return make_timestamp(2025, 2, 5); }

const Loaded& loaded() {
  static const Loaded data = [] {
    Loaded l;
    l.md = std::make_shared<const Metadata>(seed_metadata({}));
    l.store = std::make_unique<Store>();
    Workflow wf(l.md, *l.store, flow_policy(FlowPolicyName::Phase2C));
    std::uint64_t seed = 1;
    for (const char* p : {"2024-11", "2024-12", "2025-01"}) {
      for (const auto& sub : generate_submissions(*l.md, parse_period(p), seed++)) {
        wf.submit_form(sub, l.md->user(seed_pic_id(sub.org_unit_id)), bench_time());
      }
    }
    return l;
  }();
  return data;
}

}  // namespace spmdw::bench
