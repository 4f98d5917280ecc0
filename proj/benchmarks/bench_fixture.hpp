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

#include <memory>

#include "spmdw/metadata.hpp"
#include "spmdw/store.hpp"

namespace spmdw::bench {

/// Seeded metadata with every form submitted for 2024-11..2025-01.
struct Loaded {
  std::shared_ptr<const Metadata> md;
  std::unique_ptr<Store> store;
};

const Loaded& loaded();

Timestamp bench_time();

}  // namespace spmdw::bench
