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

#include <optional>
#include <string>
#include <string_view>

namespace spmdw {

/// Shortest text that parses back to the same double. Integral values print
/// without a fraction ("7", not "7.0"), so output is stable across runs.
std::string format_number(double v);

/// Strict decimal parse of the whole string; nullopt on trailing junk,
/// empty input, or a non-finite result.
std::optional<double> parse_number(std::string_view text);

}  // namespace spmdw
