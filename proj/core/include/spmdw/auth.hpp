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
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "spmdw/metadata.hpp"
#include "spmdw/time.hpp"

namespace spmdw {

using Clock = std::function<Timestamp()>;

/// Current UTC time, truncated to seconds.
Timestamp system_now();

struct Session {
  std::string token;
  std::string user_id;
  Timestamp issued_at{};
  Timestamp expires_at{};
};

/// Server-side session table. Thread-safe.
class SessionTable {
 public:
  SessionTable(std::chrono::seconds ttl, Clock clock);

  /// Checks the password against the user's credential in constant time
  /// whether or not the user exists. Throws Error(BadCredentials).
  Session authenticate(const Metadata& md, std::string_view user_id, std::string_view password);

  /// Throws Unauthenticated for an unknown token, TokenExpired once past
  /// expires_at.
  Session resolve(std::string_view token);

  void revoke(std::string_view token);
  std::chrono::seconds ttl() const { return ttl_; }
  Timestamp now() const { return clock_(); }

 private:
  std::chrono::seconds ttl_;
  Clock clock_;
  std::mutex mutex_;
  std::map<std::string, Session, std::less<>> sessions_;
  std::string dummy_credential_;
};

}  // namespace spmdw
