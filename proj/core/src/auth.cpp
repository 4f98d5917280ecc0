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

#include "spmdw/auth.hpp"

#include "spmdw/digest.hpp"
#include "spmdw/error.hpp"

namespace spmdw {

Timestamp system_now() {
  return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

SessionTable::SessionTable(std::chrono::seconds ttl, Clock clock)
    : ttl_(ttl), clock_(clock ? std::move(clock) : Clock(system_now)) {
  if (ttl_.count() <= 0) throw Error(ErrorCode::InvalidArgument, "session ttl must be positive");
  dummy_credential_ = hash_password("", kDefaultPbkdf2Iterations);
}

Session SessionTable::authenticate(const Metadata& md, std::string_view user_id,
                                   std::string_view password) {
  const User* user = md.has_user(user_id) ? &md.user(user_id) : nullptr;
  bool ok;
  if (user && !user->credential.empty()) {
    ok = verify_password(password, user->credential);
  } else {
    verify_password(password, dummy_credential_);
    ok = false;
  }
  if (!ok) throw Error(ErrorCode::BadCredentials, "unknown user or wrong password");

  Session s;
  s.token = random_hex(32);
  s.user_id = user->id;
  s.issued_at = clock_();
  s.expires_at = s.issued_at + ttl_;
  std::lock_guard<std::mutex> lock(mutex_);
  sessions_[s.token] = s;
  return s;
}

Session SessionTable::resolve(std::string_view token) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = sessions_.find(token);
  if (it == sessions_.end()) throw Error(ErrorCode::Unauthenticated, "unknown session token");
  if (clock_() >= it->second.expires_at) {
    throw Error(ErrorCode::TokenExpired, "session expired");
  }
  return it->second;
}

void SessionTable::revoke(std::string_view token) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (auto it = sessions_.find(token); it != sessions_.end()) sessions_.erase(it);
}

}  // namespace spmdw
