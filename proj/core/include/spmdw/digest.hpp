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

#include <string>
#include <string_view>

namespace spmdw {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// `bytes` random bytes from the system CSPRNG, hex encoded.
std::string random_hex(std::size_t bytes);

inline constexpr int kDefaultPbkdf2Iterations = 120000;

/// Credential record "pbkdf2-sha256$<iterations>$<salt hex>$<hash hex>".
/// An empty salt draws 16 random bytes.
std::string hash_password(std::string_view password, int iterations = kDefaultPbkdf2Iterations,
                          std::string_view salt_hex = {});

/// Constant-time comparison against a record from hash_password. False for
/// malformed records.
bool verify_password(std::string_view password, std::string_view record);

}  // namespace spmdw
