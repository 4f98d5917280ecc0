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

#include <chrono>
#include <optional>
#include <string>

#include "spmdw/workflow.hpp"

namespace spmdw::cli {

struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "spmdw-data";
  std::string metadata;  // empty: the seeded Jakarta fixture
  FlowPolicyName policy = FlowPolicyName::Phase2C;
  double k_sigma = kDefaultKSigma;
  std::optional<int> deadline_days;
  std::chrono::seconds session_ttl{8 * 3600};
  int snapshot_every = 256;
};

/// Thrown for anything wrong with a config document; `what()` is ready to
/// print and carries line:column for syntax errors.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ServeConfig parse_config(const std::string& text, const std::string& name);
ServeConfig load_config(const std::string& path);

/// SPMDW_LISTEN, SPMDW_DATA_DIR and SPMDW_POLICY override the file.
void apply_env(ServeConfig& config);

}  // namespace spmdw::cli
