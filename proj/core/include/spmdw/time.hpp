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
#include <string>
#include <string_view>

namespace spmdw {

using Timestamp = std::chrono::sys_seconds;

/// UTC ISO-8601 with a literal `Z`, e.g. `2021-04-03T10:00:00Z`.
std::string format_timestamp(Timestamp t);

/// Accepts `YYYY-MM-DDTHH:MM:SSZ` and the bare date `YYYY-MM-DD` (midnight).
/// Throws Error(InvalidArgument) on anything else.
Timestamp parse_timestamp(std::string_view text);

Timestamp make_timestamp(int year, unsigned month, unsigned day,
                         int hour = 0, int minute = 0, int second = 0);

}  // namespace spmdw
